#include "loadveil/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loadveil {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> haar_forward(const std::vector<double>& x) {
  std::size_t n = next_pow2(std::max<std::size_t>(x.size(), 1));
  std::vector<double> c(n, 0.0);
  std::copy(x.begin(), x.end(), c.begin());
  std::vector<double> tmp(n);
  for (std::size_t len = n; len > 1; len /= 2) {
    std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      tmp[i] = (c[2 * i] + c[2 * i + 1]) * kInvSqrt2;
      tmp[half + i] = (c[2 * i] - c[2 * i + 1]) * kInvSqrt2;
    }
    std::copy(tmp.begin(), tmp.begin() + len, c.begin());
  }
  return c;
}

std::vector<double> haar_inverse(std::vector<double> c) {
  std::size_t n = c.size();
  std::vector<double> tmp(n);
  for (std::size_t len = 2; len <= n; len *= 2) {
    std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      tmp[2 * i] = (c[i] + c[half + i]) * kInvSqrt2;
      tmp[2 * i + 1] = (c[i] - c[half + i]) * kInvSqrt2;
    }
    std::copy(tmp.begin(), tmp.begin() + len, c.begin());
  }
  return c;
}

void zero_smallest_details(std::vector<double>& coeffs, std::size_t count) {
  if (coeffs.size() < 2 || count == 0) return;
  std::size_t details = coeffs.size() - 1;
  count = std::min(count, details);
  std::vector<std::size_t> idx(details);
  std::iota(idx.begin(), idx.end(), 1);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    double ma = std::fabs(coeffs[a]), mb = std::fabs(coeffs[b]);
    if (ma != mb) return ma < mb;
    return a < b;
  });
  for (std::size_t i = 0; i < count; ++i) coeffs[idx[i]] = 0.0;
}

}  // namespace loadveil
