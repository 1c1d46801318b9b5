#pragma once

#include <cstddef>
#include <vector>

namespace loadveil {

// Multilevel orthonormal Haar transform on a zero-padded power-of-two copy
// of the input.  Coefficient layout after the forward pass: index 0 holds
// the top-level approximation, indices 1..n-1 hold detail coefficients.
std::vector<double> haar_forward(const std::vector<double>& x);

// Inverse of haar_forward; coeffs.size() must be a power of two.
std::vector<double> haar_inverse(std::vector<double> coeffs);

// Zeroes the `count` smallest-magnitude detail coefficients in place
// (ties broken by index so the zero set is nested across counts).
void zero_smallest_details(std::vector<double>& coeffs, std::size_t count);

std::size_t next_pow2(std::size_t n);

}  // namespace loadveil
