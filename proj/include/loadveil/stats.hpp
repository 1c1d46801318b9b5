#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace loadveil {

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : sum(v) / static_cast<double>(v.size());
}

// Population variance (divide by n).
inline double variance(std::span<const double> v) {
  if (v.size() < 1) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

inline double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

// Sample standard deviation (divide by n-1); used for spread statistics
// over finite score populations.
inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Pearson correlation; returns 0 when either side is constant.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  std::size_t n = a.size();
  if (n != b.size() || n < 2) return 0.0;
  double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace loadveil
