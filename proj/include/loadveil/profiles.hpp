#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace loadveil {

// A metered consumption series.  Values are non-negative and finite, length
// is at least 2, freq is the number of readings per day.
struct LoadProfile {
  std::vector<double> values;
  int freq = 1;
  std::string id;

  LoadProfile(std::vector<double> v, int readings_per_day, std::string name = "");

  std::size_t size() const { return values.size(); }
};

// First differences of a load profile; entries may be negative.
struct DiffProfile {
  std::vector<double> values;
};

// Additive perturbation drawn uniformly from [-amplitude, amplitude].
struct NoiseProfile {
  std::vector<double> values;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

// d_t = x_{t+1} - x_t, length T-1.
DiffProfile first_differences(const LoadProfile& x);

// t iid draws from Uniform[-amplitude, amplitude]; amplitude must be > 0.
NoiseProfile sample_noise(std::size_t t, double amplitude, std::uint64_t seed);

// Noise addition that keeps the series physical: clips x+u at zero, then
// rescales the positive entries until the original total consumption is
// restored to relative precision 1e-9.  When x+u already satisfies both
// constraints it is returned unchanged.
LoadProfile oplus(const LoadProfile& x, const NoiseProfile& u);

// Same length and total consumption as x, spread evenly over all stamps.
LoadProfile constant_profile(const LoadProfile& x);

}  // namespace loadveil
