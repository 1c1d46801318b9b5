#pragma once

#include <cstdint>

#include "loadveil/profiles.hpp"

namespace loadveil {

// x with uniform noise of the given amplitude folded in through the
// clip-and-rebalance addition (non-negative, total preserved).
LoadProfile add_noise(const LoadProfile& x, double amplitude, std::uint64_t seed);

// Keeps readings at stamps {0, k, 2k, ...} and the final stamp, replaces
// everything between by linear interpolation.  k = 1 returns x unchanged;
// k >= T is rejected.
LoadProfile interpolate(const LoadProfile& x, int k);

// Haar compression: transform the zero-padded series, zero the
// ceil(rate * detail-count) smallest-magnitude detail coefficients,
// reconstruct, truncate to the original length, clamp at zero.
// rate must lie strictly between 0 and 1.
LoadProfile wavelet_compress(const LoadProfile& x, double rate);

// Strongest hiding probe: the flat profile with x's total consumption,
// perturbed by noise of the given amplitude.
LoadProfile best_privacy(const LoadProfile& x, double amplitude, std::uint64_t seed);

}  // namespace loadveil
