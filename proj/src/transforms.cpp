#include "loadveil/transforms.hpp"

#include <cmath>
#include <cstddef>

#include "loadveil/errors.hpp"
#include "loadveil/wavelet.hpp"

namespace loadveil {

LoadProfile add_noise(const LoadProfile& x, double amplitude, std::uint64_t seed) {
  return oplus(x, sample_noise(x.size(), amplitude, seed));
}

LoadProfile interpolate(const LoadProfile& x, int k) {
  const std::size_t n = x.size();
  if (k < 1) throw InvalidInput("interpolation stride must be >= 1");
  if (static_cast<std::size_t>(k) >= n) throw InvalidInput("interpolation stride must be smaller than the profile length");
  if (k == 1) return x;

  LoadProfile out = x;
  std::size_t left = 0;
  while (left + 1 < n) {
    std::size_t right = left + static_cast<std::size_t>(k);
    if (right >= n) right = n - 1;
    double lo = x.values[left], hi = x.values[right];
    double span = static_cast<double>(right - left);
    for (std::size_t t = left + 1; t < right; ++t)
      out.values[t] = lo + (hi - lo) * (static_cast<double>(t - left) / span);
    left = right;
  }
  return out;
}

LoadProfile wavelet_compress(const LoadProfile& x, double rate) {
  if (!(rate > 0.0) || !(rate < 1.0)) throw InvalidInput("compression rate must lie in (0,1)");
  std::vector<double> coeffs = haar_forward(x.values);
  std::size_t details = coeffs.size() - 1;
  auto count = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(details)));
  zero_smallest_details(coeffs, count);
  std::vector<double> rec = haar_inverse(std::move(coeffs));
  LoadProfile out = x;
  for (std::size_t t = 0; t < x.size(); ++t) out.values[t] = rec[t] < 0.0 ? 0.0 : rec[t];
  return out;
}

LoadProfile best_privacy(const LoadProfile& x, double amplitude, std::uint64_t seed) {
  return oplus(constant_profile(x), sample_noise(x.size(), amplitude, seed));
}

}  // namespace loadveil
