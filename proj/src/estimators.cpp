#include "loadveil/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "loadveil/errors.hpp"
#include "loadveil/rng.hpp"

namespace loadveil {

namespace {

void check_bins(const BinSpec& bins) {
  if (bins.h < 2) throw InvalidInput("histogram needs at least 2 bins");
  if (bins.range) {
    auto [lo, hi] = *bins.range;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw InvalidInput("histogram range must be finite with lo < hi");
  }
}

void check_samples(std::span<const double> xs, std::size_t min_n = 2) {
  if (xs.size() < min_n) throw InvalidInput("estimator needs at least " + std::to_string(min_n) + " samples");
  for (double v : xs)
    if (!std::isfinite(v)) throw InvalidInput("non-finite sample");
}

std::pair<double, double> data_range(std::span<const double> xs) {
  double lo = xs[0], hi = xs[0];
  for (double v : xs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

int bin_index(double v, double lo, double hi, int h) {
  if (!(hi > lo)) return 0;
  auto idx = static_cast<int>((v - lo) / (hi - lo) * static_cast<double>(h));
  return std::clamp(idx, 0, h - 1);
}

std::vector<std::int64_t> bin_counts(std::span<const double> xs, double lo, double hi, int h) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(h), 0);
  for (double v : xs) ++counts[static_cast<std::size_t>(bin_index(v, lo, hi, h))];
  return counts;
}

// H = log n - (1/n) sum c*log c, exact zero for a single occupied bin.
double entropy_of_counts(const std::vector<std::int64_t>& counts, std::int64_t n, double base) {
  double s = 0.0;
  for (std::int64_t c : counts)
    if (c > 0) s += static_cast<double>(c) * std::log(static_cast<double>(c));
  double nats = std::log(static_cast<double>(n)) - s / static_cast<double>(n);
  return nats / std::log(base);
}

// MI terms are summed in sorted order so that transposing the joint counts
// reproduces the result bit for bit.
double mi_of_joint(const std::vector<std::int64_t>& joint, int hx, int hy, std::int64_t n,
                   double base) {
  std::vector<std::int64_t> rx(static_cast<std::size_t>(hx), 0), cy(static_cast<std::size_t>(hy), 0);
  for (int i = 0; i < hx; ++i)
    for (int j = 0; j < hy; ++j) {
      std::int64_t c = joint[static_cast<std::size_t>(i * hy + j)];
      rx[static_cast<std::size_t>(i)] += c;
      cy[static_cast<std::size_t>(j)] += c;
    }
  std::vector<double> terms;
  terms.reserve(joint.size());
  for (int i = 0; i < hx; ++i)
    for (int j = 0; j < hy; ++j) {
      std::int64_t c = joint[static_cast<std::size_t>(i * hy + j)];
      if (c <= 0) continue;
      double ratio = (static_cast<double>(c) * static_cast<double>(n)) /
                     (static_cast<double>(rx[static_cast<std::size_t>(i)]) *
                      static_cast<double>(cy[static_cast<std::size_t>(j)]));
      terms.push_back(static_cast<double>(c) * std::log(ratio));
    }
  std::sort(terms.begin(), terms.end());
  double s = std::accumulate(terms.begin(), terms.end(), 0.0);
  double nats = s / static_cast<double>(n);
  return std::max(0.0, nats / std::log(base));
}

struct SharedHists {
  std::vector<std::int64_t> cx, cy;
  std::int64_t nx, ny;
};

SharedHists shared_histograms(std::span<const double> xs, std::span<const double> ys,
                              const BinSpec& bins) {
  check_bins(bins);
  check_samples(xs);
  check_samples(ys);
  double lo, hi;
  if (bins.range) {
    lo = bins.range->first;
    hi = bins.range->second;
  } else {
    auto [lx, hx] = data_range(xs);
    auto [ly, hy] = data_range(ys);
    lo = std::min(lx, ly);
    hi = std::max(hx, hy);
  }
  SharedHists out;
  out.cx = bin_counts(xs, lo, hi, bins.h);
  out.cy = bin_counts(ys, lo, hi, bins.h);
  out.nx = static_cast<std::int64_t>(xs.size());
  out.ny = static_cast<std::int64_t>(ys.size());
  return out;
}

}  // namespace

SamplePairs::SamplePairs(std::vector<double> x, std::vector<double> y)
    : xs(std::move(x)), ys(std::move(y)) {
  if (xs.size() != ys.size()) throw InvalidInput("paired samples must have equal lengths");
  check_samples(xs);
  check_samples(ys);
}

double hist_entropy(std::span<const double> xs, const BinSpec& bins, double base) {
  check_bins(bins);
  check_samples(xs);
  double lo, hi;
  if (bins.range) {
    lo = bins.range->first;
    hi = bins.range->second;
  } else {
    std::tie(lo, hi) = data_range(xs);
  }
  auto counts = bin_counts(xs, lo, hi, bins.h);
  return entropy_of_counts(counts, static_cast<std::int64_t>(xs.size()), base);
}

namespace {

// Joint h x h counts; the explicit range applies to both axes, otherwise
// each axis uses its own data range.
std::vector<std::int64_t> joint_counts(const SamplePairs& pairs, const BinSpec& bins) {
  double lox, hix, loy, hiy;
  if (bins.range) {
    lox = loy = bins.range->first;
    hix = hiy = bins.range->second;
  } else {
    std::tie(lox, hix) = data_range(pairs.xs);
    std::tie(loy, hiy) = data_range(pairs.ys);
  }
  int h = bins.h;
  std::vector<std::int64_t> joint(static_cast<std::size_t>(h) * static_cast<std::size_t>(h), 0);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    int i = bin_index(pairs.xs[t], lox, hix, h);
    int j = bin_index(pairs.ys[t], loy, hiy, h);
    ++joint[static_cast<std::size_t>(i * h + j)];
  }
  return joint;
}

}  // namespace

double hist_mi(const SamplePairs& pairs, const BinSpec& bins, double base) {
  check_bins(bins);
  auto joint = joint_counts(pairs, bins);
  return mi_of_joint(joint, bins.h, bins.h, static_cast<std::int64_t>(pairs.size()), base);
}

double hist_conditional_entropy(const SamplePairs& pairs, const BinSpec& bins, double base) {
  check_bins(bins);
  auto joint = joint_counts(pairs, bins);
  auto n = static_cast<std::int64_t>(pairs.size());
  std::vector<std::int64_t> cy(static_cast<std::size_t>(bins.h), 0);
  for (int i = 0; i < bins.h; ++i)
    for (int j = 0; j < bins.h; ++j) cy[static_cast<std::size_t>(j)] += joint[static_cast<std::size_t>(i * bins.h + j)];
  double hxy = entropy_of_counts(joint, n, base);
  double hy = entropy_of_counts(cy, n, base);
  return std::max(0.0, hxy - hy);
}

double hist_kl(std::span<const double> xs, std::span<const double> ys, const BinSpec& bins,
               double base) {
  auto hs = shared_histograms(xs, ys, bins);
  auto h = static_cast<std::size_t>(bins.h);
  bool needs_smoothing = false;
  for (std::size_t i = 0; i < h; ++i)
    if (hs.cx[i] > 0 && hs.cy[i] == 0) needs_smoothing = true;

  std::vector<double> p(h), q(h);
  for (std::size_t i = 0; i < h; ++i) {
    p[i] = static_cast<double>(hs.cx[i]) / static_cast<double>(hs.nx);
    q[i] = static_cast<double>(hs.cy[i]) / static_cast<double>(hs.ny);
  }
  if (needs_smoothing) {
    double ep = 1.0 / (static_cast<double>(hs.nx) * static_cast<double>(bins.h));
    double eq = 1.0 / (static_cast<double>(hs.ny) * static_cast<double>(bins.h));
    for (std::size_t i = 0; i < h; ++i) {
      p[i] = (p[i] + ep) / (1.0 + static_cast<double>(bins.h) * ep);
      q[i] = (q[i] + eq) / (1.0 + static_cast<double>(bins.h) * eq);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < h; ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return s / std::log(base);
}

double hist_k_divergence(std::span<const double> xs, std::span<const double> ys,
                         const BinSpec& bins, double base) {
  auto hs = shared_histograms(xs, ys, bins);
  auto h = static_cast<std::size_t>(bins.h);
  double s = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    double p = static_cast<double>(hs.cx[i]) / static_cast<double>(hs.nx);
    double q = static_cast<double>(hs.cy[i]) / static_cast<double>(hs.ny);
    if (p > 0.0) s += p * std::log(2.0 * p / (p + q));
  }
  return s / std::log(base);
}

double hist_tvd(std::span<const double> xs, std::span<const double> ys, const BinSpec& bins) {
  auto hs = shared_histograms(xs, ys, bins);
  auto h = static_cast<std::size_t>(bins.h);
  double s = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    double p = static_cast<double>(hs.cx[i]) / static_cast<double>(hs.nx);
    double q = static_cast<double>(hs.cy[i]) / static_cast<double>(hs.ny);
    s += std::fabs(p - q);
  }
  // Accumulated rounding can push the sum a few ulps past 2.
  return std::min(1.0, 0.5 * s);
}

double discrete_entropy(std::span<const int> labels, double base) {
  if (labels.empty()) return 0.0;
  std::map<int, std::int64_t> counts;
  for (int v : labels) ++counts[v];
  double s = 0.0;
  for (auto& [v, c] : counts) s += static_cast<double>(c) * std::log(static_cast<double>(c));
  auto n = static_cast<double>(labels.size());
  return (std::log(n) - s / n) / std::log(base);
}

double discrete_mi(std::span<const int> a, std::span<const int> b, double base) {
  if (a.size() != b.size()) throw InvalidInput("label sequences must have equal lengths");
  if (a.size() < 2) throw InvalidInput("estimator needs at least 2 samples");
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> ca, cb;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ++joint[{a[t], b[t]}];
    ++ca[a[t]];
    ++cb[b[t]];
  }
  auto n = static_cast<double>(a.size());
  std::vector<double> terms;
  terms.reserve(joint.size());
  for (auto& [key, c] : joint) {
    double ratio = (static_cast<double>(c) * n) /
                   (static_cast<double>(ca[key.first]) * static_cast<double>(cb[key.second]));
    terms.push_back(static_cast<double>(c) * std::log(ratio));
  }
  std::sort(terms.begin(), terms.end());
  double s = std::accumulate(terms.begin(), terms.end(), 0.0);
  return std::max(0.0, s / n / std::log(base));
}

namespace {

bool has_duplicates(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

void jitter_axis(std::vector<double>& v, std::uint64_t axis_tag) {
  auto [lo, hi] = data_range(v);
  double scale = (hi > lo ? hi - lo : 1.0) * 1e-10;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t z = RngStream::mix((static_cast<std::uint64_t>(i) << 1) ^ axis_tag);
    double u = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0,1)
    v[i] += scale * (u - 0.5);
  }
}

// Distance to the k-th nearest neighbor in max-norm, per point, via a
// bidirectional sweep over the x-sorted order.  Pruning: once |dx| reaches
// the current k-th best distance no farther point can improve it.
std::vector<double> knn_radii(const std::vector<double>& xs, const std::vector<double>& ys, int k) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  std::vector<double> sx(n), sy(n);
  for (std::size_t p = 0; p < n; ++p) {
    sx[p] = xs[order[p]];
    sy[p] = ys[order[p]];
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(k));
  std::vector<double> radii(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::fill(best.begin(), best.end(), inf);
    std::size_t l = p;
    std::size_t r = p + 1;
    while (true) {
      double dl = l > 0 ? sx[p] - sx[l - 1] : inf;
      double dr = r < n ? sx[r] - sx[p] : inf;
      double dx = std::min(dl, dr);
      if (!(dx < best.back())) break;
      std::size_t j;
      if (dl <= dr) {
        j = --l;
      } else {
        j = r++;
      }
      double dist = std::max(dx, std::fabs(sy[p] - sy[j]));
      if (dist < best.back()) {
        // insertion into the small sorted top-k buffer
        std::size_t pos = static_cast<std::size_t>(k) - 1;
        while (pos > 0 && best[pos - 1] > dist) {
          best[pos] = best[pos - 1];
          --pos;
        }
        best[pos] = dist;
      }
    }
    radii[order[p]] = best.back();
  }
  return radii;
}

}  // namespace

double knn_mi(const SamplePairs& pairs, int k) {
  const std::size_t n = pairs.size();
  if (k < 1) throw InvalidInput("neighbor count must be >= 1");
  if (n <= static_cast<std::size_t>(k)) throw InvalidInput("need more samples than neighbors");

  std::vector<double> xs = pairs.xs, ys = pairs.ys;
  if (has_duplicates(xs)) jitter_axis(xs, 0x6a09e667f3bcc908ULL);
  if (has_duplicates(ys)) jitter_axis(ys, 0xbb67ae8584caa73bULL);

  std::vector<double> radii = knn_radii(xs, ys, k);

  std::vector<double> sorted_x = xs, sorted_y = ys;
  std::sort(sorted_x.begin(), sorted_x.end());
  std::sort(sorted_y.begin(), sorted_y.end());
  auto strict_count = [](const std::vector<double>& v, double center, double eps) {
    auto lo = std::upper_bound(v.begin(), v.end(), center - eps);
    auto hi = std::lower_bound(v.begin(), v.end(), center + eps);
    return static_cast<std::int64_t>(hi - lo) - 1;  // excludes the point itself
  };

  // psi(m) = -gamma + H_{m-1} for integer arguments.
  std::vector<double> psi(n + 2, 0.0);
  constexpr double kEulerGamma = 0.57721566490153286061;
  psi[1] = -kEulerGamma;
  for (std::size_t m = 2; m < psi.size(); ++m)
    psi[m] = psi[m - 1] + 1.0 / static_cast<double>(m - 1);

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double eps = radii[i];
    if (!(eps > 0.0)) throw DegenerateInput("repeated points defeat the neighbor search");
    std::int64_t nx = strict_count(sorted_x, xs[i], eps);
    std::int64_t ny = strict_count(sorted_y, ys[i], eps);
    acc += psi[static_cast<std::size_t>(nx) + 1] + psi[static_cast<std::size_t>(ny) + 1];
  }
  return psi[static_cast<std::size_t>(k)] + psi[n] - acc / static_cast<double>(n);
}

}  // namespace loadveil
