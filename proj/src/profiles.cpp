#include "loadveil/profiles.hpp"

#include <cmath>
#include <utility>

#include "loadveil/errors.hpp"
#include "loadveil/rng.hpp"
#include "loadveil/stats.hpp"

namespace loadveil {

LoadProfile::LoadProfile(std::vector<double> v, int readings_per_day, std::string name)
    : values(std::move(v)), freq(readings_per_day), id(std::move(name)) {
  if (values.size() < 2) throw InvalidInput("load profile needs at least 2 readings");
  if (freq < 1) throw InvalidInput("readings per day must be >= 1");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvalidInput("non-finite reading at index " + std::to_string(i));
    if (values[i] < 0.0) throw InvalidInput("negative reading at index " + std::to_string(i));
  }
}

DiffProfile first_differences(const LoadProfile& x) {
  DiffProfile d;
  d.values.resize(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) d.values[t] = x.values[t + 1] - x.values[t];
  return d;
}

NoiseProfile sample_noise(std::size_t t, double amplitude, std::uint64_t seed) {
  if (t < 1) throw InvalidInput("noise length must be >= 1");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw InvalidInput("noise amplitude must be positive and finite");
  NoiseProfile u;
  u.amplitude = amplitude;
  u.seed = seed;
  u.values.resize(t);
  RngStream rng(seed);
  for (std::size_t i = 0; i < t; ++i) u.values[i] = rng.uniform(-amplitude, amplitude);
  return u;
}

LoadProfile oplus(const LoadProfile& x, const NoiseProfile& u) {
  if (x.size() != u.values.size()) throw InvalidInput("noise length does not match profile length");
  const std::size_t n = x.size();
  const double total = sum(x.values);
  if (total == 0.0) return x;  // all-zero profile: nothing to redistribute
  const double tol = 1e-9 * total;

  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = x.values[t] + u.values[t];

  for (int iter = 0; iter < 100; ++iter) {
    for (double& v : y)
      if (v < 0.0) v = 0.0;
    double part = sum(y);
    double surplus = total - part;
    if (std::fabs(surplus) <= tol) {
      LoadProfile out = x;
      out.values = std::move(y);
      return out;
    }
    if (part == 0.0) {
      // Noise wiped out every entry; fall back to an even spread.
      for (double& v : y) v = total / static_cast<double>(n);
      continue;
    }
    // Scaling the positive entries fixes the total in one step and cannot
    // create new negatives; the loop re-checks against the tolerance.
    double scale = total / part;
    for (double& v : y) v *= scale;
  }
  throw DegenerateInput("consumption rebalance did not converge");
}

LoadProfile constant_profile(const LoadProfile& x) {
  LoadProfile out = x;
  double m = mean(x.values);
  for (double& v : out.values) v = m;
  return out;
}

}  // namespace loadveil
