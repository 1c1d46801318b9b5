#include "loadveil/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "loadveil/errors.hpp"
#include "loadveil/estimators.hpp"
#include "loadveil/stats.hpp"
#include "loadveil/wavelet.hpp"

namespace loadveil {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kE = 2.71828182845904523536;

const std::vector<MeasureInfo>& catalog_storage() {
  static const std::vector<MeasureInfo> infos = {
      {MeasureId::CS, "CS", Orientation::HigherMorePrivate, false, true,
       "1 - NMI(kmeans(x), kmeans(y))"},
      {MeasureId::dCS, "dCS", Orientation::HigherMorePrivate, true, true,
       "CS on first differences"},
      {MeasureId::R2, "R2", Orientation::LowerMorePrivate, false, false,
       "squared Pearson correlation of (x_t, y_t)"},
      {MeasureId::dR2, "dR2", Orientation::LowerMorePrivate, true, false,
       "R2 on first differences"},
      {MeasureId::Rp, "Rp", Orientation::LowerMorePrivate, false, true,
       "1 - E[(x - nn_mean(y))^2] / Var(x)"},
      {MeasureId::CE, "CE", Orientation::HigherMorePrivate, false, false,
       "H(x|y), histogram plug-in"},
      {MeasureId::dCE, "dCE", Orientation::HigherMorePrivate, true, false,
       "CE on first differences"},
      {MeasureId::dERz, "dERz", Orientation::HigherMorePrivate, true, false,
       "H(dy)/H(dx) including zero steps"},
      {MeasureId::dERnz, "dERnz", Orientation::HigherMorePrivate, true, false,
       "H(dy)/H(dx) on nonzero steps"},
      {MeasureId::dFMed, "dFMed", Orientation::HigherMorePrivate, true, true,
       "share of x edges with no same-sign y edge"},
      {MeasureId::dFMr, "dFMr", Orientation::HigherMorePrivate, true, true,
       "edge count ratio |edges(dy)| / |edges(dx)|"},
      {MeasureId::dFM, "dFM", Orientation::HigherMorePrivate, true, true,
       "1 - min(1, edge mass ratio)"},
      {MeasureId::K, "K", Orientation::HigherMorePrivate, false, false,
       "KL(p_x || (p_x + p_y)/2)"},
      {MeasureId::KL, "KL", Orientation::HigherMorePrivate, false, false,
       "KL(p_x || p_y)"},
      {MeasureId::dKL, "dKL", Orientation::HigherMorePrivate, true, false,
       "KL on first differences"},
      {MeasureId::LV, "LV", Orientation::LowerMorePrivate, false, false, "Var(y)"},
      {MeasureId::MIs, "MIs", Orientation::LowerMorePrivate, false, true,
       "MI between length-2 windows"},
      {MeasureId::MIi, "MIi", Orientation::LowerMorePrivate, false, false,
       "MI between per-stamp readings"},
      {MeasureId::MIm, "MIm", Orientation::LowerMorePrivate, false, false,
       "sum_f p(f) MI(x, y | segment f)"},
      {MeasureId::dMIb, "dMIb", Orientation::LowerMorePrivate, true, true,
       "MI of thresholded step indicators"},
      {MeasureId::dMIs, "dMIs", Orientation::LowerMorePrivate, true, true,
       "MI of step signs"},
      {MeasureId::dMIi, "dMIi", Orientation::LowerMorePrivate, true, false,
       "MIi on first differences"},
      {MeasureId::RUr, "RUr", Orientation::LowerMorePrivate, false, true,
       "1 - H(x - linfit(y)) / H(x)"},
      {MeasureId::RUw, "RUw", Orientation::LowerMorePrivate, false, true,
       "1 - H(x - denoise(y)) / H(x)"},
      {MeasureId::TVD, "TVD", Orientation::HigherMorePrivate, false, false,
       "total variation distance of marginals"},
  };
  return infos;
}

struct Resolved {
  int h = 20;
  int knn_k = 2;
  int clusters = 8;
  double tau = kNaN;  // NaN: 0.05 * max |dx| at evaluation time
  int w = 0;
  double base = 2.0;
  bool use_knn = false;
  double range_lo = kNaN, range_hi = kNaN;
  int k_reg = 5;

  BinSpec bins() const {
    BinSpec b;
    b.h = h;
    if (!std::isnan(range_lo) || !std::isnan(range_hi)) b.range = {range_lo, range_hi};
    return b;
  }
};

bool mi_family(MeasureId id) {
  switch (id) {
    case MeasureId::MIs:
    case MeasureId::MIi:
    case MeasureId::MIm:
    case MeasureId::dMIb:
    case MeasureId::dMIs:
    case MeasureId::dMIi:
      return true;
    default:
      return false;
  }
}

Resolved resolve_params(const MeasureSpec& spec) {
  Resolved r;
  r.base = mi_family(spec.id) ? 2.0 : kE;
  for (const auto& [key, val] : spec.params) {
    if (key == "h") {
      r.h = static_cast<int>(val);
      if (r.h < 2) throw InvalidInput("h must be >= 2");
    } else if (key == "k") {
      r.knn_k = static_cast<int>(val);
      if (r.knn_k < 1) throw InvalidInput("k must be >= 1");
    } else if (key == "clusters") {
      r.clusters = static_cast<int>(val);
      if (r.clusters < 2) throw InvalidInput("clusters must be >= 2");
    } else if (key == "tau") {
      if (!(val >= 0.0)) throw InvalidInput("tau must be >= 0");
      r.tau = val;
    } else if (key == "w") {
      r.w = static_cast<int>(val);
      if (r.w < 0) throw InvalidInput("w must be >= 0");
    } else if (key == "base") {
      if (!(val > 1.0)) throw InvalidInput("base must be > 1");
      r.base = val;
    } else if (key == "estimator") {
      if (val != 0.0 && val != 1.0) throw InvalidInput("estimator must be 0 (histogram) or 1 (nn)");
      r.use_knn = val == 1.0;
    } else if (key == "range_lo") {
      r.range_lo = val;
    } else if (key == "range_hi") {
      r.range_hi = val;
    } else if (key == "k_reg") {
      r.k_reg = static_cast<int>(val);
      if (r.k_reg < 1) throw InvalidInput("k_reg must be >= 1");
    } else {
      throw InvalidInput("unknown hyperparameter: " + key);
    }
  }
  bool has_lo = !std::isnan(r.range_lo), has_hi = !std::isnan(r.range_hi);
  if (has_lo != has_hi) throw InvalidInput("range_lo and range_hi must be given together");
  if (has_lo && !(r.range_lo < r.range_hi)) throw InvalidInput("range_lo must be < range_hi");
  return r;
}

double resolve_tau(const Resolved& p, const std::vector<double>& dx) {
  if (!std::isnan(p.tau)) return p.tau;
  double m = 0.0;
  for (double v : dx) m = std::max(m, std::fabs(v));
  return 0.05 * m;
}

//===--- correlation family ---===//

double r2_value(const std::vector<double>& x, const std::vector<double>& y, int w) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double best = 0.0;
  for (int delta = -w; delta <= w; ++delta) {
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -delta);
    std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - delta);
    if (hi - lo < 2) continue;
    std::vector<double> a(x.begin() + lo, x.begin() + hi);
    std::vector<double> b(y.begin() + lo + delta, y.begin() + hi + delta);
    double r = pearson(a, b);
    best = std::max(best, r * r);
  }
  return best;
}

// Mean of the k x-values whose y is closest to y_t (the point itself is
// left out); exploits a y-sorted order for the neighbor scan.
std::vector<double> nn_regression(const std::vector<double>& x, const std::vector<double>& y,
                                  int k_reg) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  std::vector<double> sy(n), sx(n);
  for (std::size_t p = 0; p < n; ++p) {
    sy[p] = y[order[p]];
    sx[p] = x[order[p]];
  }
  auto k = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(k_reg), n - 1));
  std::vector<double> fitted(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t l = p, r = p + 1;
    double acc = 0.0;
    for (std::size_t taken = 0; taken < k; ++taken) {
      double dl = l > 0 ? sy[p] - sy[l - 1] : std::numeric_limits<double>::infinity();
      double dr = r < n ? sy[r] - sy[p] : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        acc += sx[--l];
      } else {
        acc += sx[r++];
      }
    }
    fitted[order[p]] = acc / static_cast<double>(k);
  }
  return fitted;
}

double rp_value(const std::vector<double>& x, const std::vector<double>& y, int k_reg,
                std::string& note) {
  double vx = variance(x);
  if (vx == 0.0) {
    note = "constant user load, no reconstructable structure";
    return 0.0;
  }
  std::vector<double> fitted = nn_regression(x, y, k_reg);
  double mse = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) mse += (x[t] - fitted[t]) * (x[t] - fitted[t]);
  mse /= static_cast<double>(x.size());
  return std::clamp(1.0 - mse / vx, 0.0, 1.0);
}

//===--- clustering family ---===//

std::vector<int> kmeans1d_labels(const std::vector<double>& v, int want, std::string& note) {
  const std::size_t n = v.size();
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = 1;
  for (std::size_t t = 1; t < n; ++t)
    if (sorted[t] != sorted[t - 1]) ++distinct;
  int c = static_cast<int>(std::min(static_cast<std::size_t>(want), distinct));
  if (c < want) note = "clusters lowered to " + std::to_string(c) + " (distinct values)";
  if (c < 1) c = 1;

  std::vector<double> centroids(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    auto pos = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * static_cast<double>(n) /
                                        static_cast<double>(c));
    centroids[static_cast<std::size_t>(i)] = sorted[std::min(pos, n - 1)];
  }

  std::vector<int> labels(n, 0);
  std::vector<int> prev(n, -1);
  for (int iter = 0; iter < 50; ++iter) {
    // Ordered centroids let assignment reduce to boundary comparisons.
    std::vector<double> bounds(static_cast<std::size_t>(c) - 1);
    for (int i = 0; i + 1 < c; ++i)
      bounds[static_cast<std::size_t>(i)] =
          (centroids[static_cast<std::size_t>(i)] + centroids[static_cast<std::size_t>(i + 1)]) / 2.0;
    for (std::size_t t = 0; t < n; ++t) {
      auto it = std::upper_bound(bounds.begin(), bounds.end(), v[t]);
      labels[t] = static_cast<int>(it - bounds.begin());
    }
    if (labels == prev) break;
    prev = labels;
    std::vector<double> acc(static_cast<std::size_t>(c), 0.0);
    std::vector<std::size_t> cnt(static_cast<std::size_t>(c), 0);
    for (std::size_t t = 0; t < n; ++t) {
      acc[static_cast<std::size_t>(labels[t])] += v[t];
      ++cnt[static_cast<std::size_t>(labels[t])];
    }
    for (int i = 0; i < c; ++i)
      if (cnt[static_cast<std::size_t>(i)] > 0)
        centroids[static_cast<std::size_t>(i)] =
            acc[static_cast<std::size_t>(i)] / static_cast<double>(cnt[static_cast<std::size_t>(i)]);
  }
  return labels;
}

double cs_value(const std::vector<double>& x, const std::vector<double>& y, int clusters,
                std::string& note) {
  std::vector<int> lx = kmeans1d_labels(x, clusters, note);
  std::vector<int> ly = kmeans1d_labels(y, clusters, note);
  double hx = discrete_entropy(lx, kE);
  double hy = discrete_entropy(ly, kE);
  double nmi;
  if (hx + hy == 0.0) {
    nmi = 1.0;  // both partitions are trivial, hence identical
  } else {
    nmi = 2.0 * discrete_mi(lx, ly, kE) / (hx + hy);
  }
  return std::clamp(1.0 - nmi, 0.0, 1.0);
}

//===--- entropy ratio and feature mass ---===//

double entropy_or_zero(const std::vector<double>& v, int h) {
  if (v.size() < 2) return 0.0;
  BinSpec bins;
  bins.h = h;
  return hist_entropy(v, bins, kE);
}

double er_value(const std::vector<double>& dx, const std::vector<double>& dy, int h,
                bool drop_zeros) {
  std::vector<double> a = dx, b = dy;
  if (drop_zeros) {
    std::erase(a, 0.0);
    std::erase(b, 0.0);
  }
  double hx = entropy_or_zero(a, h);
  if (hx == 0.0) throw DegenerateInput("zero step entropy in the user load");
  return entropy_or_zero(b, h) / hx;
}

struct EdgeSet {
  std::vector<std::size_t> idx;
  double mass = 0.0;
};

EdgeSet edges_of(const std::vector<double>& d, double tau) {
  EdgeSet e;
  for (std::size_t t = 0; t < d.size(); ++t)
    if (std::fabs(d[t]) > tau) {
      e.idx.push_back(t);
      e.mass += std::fabs(d[t]);
    }
  return e;
}

//===--- removed uncertainty ---===//

double ru_value(const std::vector<double>& x, const std::vector<double>& xhat, int h) {
  BinSpec bins;
  bins.h = h;
  double hx = hist_entropy(x, bins, kE);
  if (hx == 0.0) throw DegenerateInput("zero entropy user load");
  std::vector<double> resid(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) resid[t] = x[t] - xhat[t];
  return 1.0 - hist_entropy(resid, bins, kE) / hx;
}

std::vector<double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double my = mean(y), mx = mean(x);
  double syy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    syy += (y[t] - my) * (y[t] - my);
    sxy += (x[t] - mx) * (y[t] - my);
  }
  double b = syy > 0.0 ? sxy / syy : 0.0;
  double a = mx - b * my;
  std::vector<double> fit(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) fit[t] = a + b * y[t];
  return fit;
}

std::vector<double> wavelet_denoise(const std::vector<double>& y) {
  std::vector<double> coeffs = haar_forward(y);
  std::size_t details = coeffs.size() - 1;
  auto count = static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(details)));
  zero_smallest_details(coeffs, count);
  std::vector<double> rec = haar_inverse(std::move(coeffs));
  rec.resize(y.size());
  return rec;
}

//===--- information family ---===//

double windowed_mi(const std::vector<double>& x, const std::vector<double>& y, int h, double base) {
  const std::size_t n = x.size() - 1;
  if (n < 2) throw InvalidInput("windowed MI needs at least 3 readings");
  auto hs = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(h))));
  auto range_x = std::minmax_element(x.begin(), x.end());
  auto range_y = std::minmax_element(y.begin(), y.end());
  double lox = *range_x.first, hix = *range_x.second;
  double loy = *range_y.first, hiy = *range_y.second;
  auto bin = [hs](double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    auto i = static_cast<int>((v - lo) / (hi - lo) * hs);
    return std::clamp(i, 0, hs - 1);
  };
  std::vector<int> bx(n), by(n);
  for (std::size_t t = 0; t < n; ++t) {
    bx[t] = bin(x[t], lox, hix) * hs + bin(x[t + 1], lox, hix);
    by[t] = bin(y[t], loy, hiy) * hs + bin(y[t + 1], loy, hiy);
  }
  return discrete_mi(bx, by, base);
}

double segmented_mi(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& features, const Resolved& p) {
  double lo, hi;
  if (!std::isnan(p.range_lo)) {
    lo = p.range_lo;
    hi = p.range_hi;
  } else {
    auto rx = std::minmax_element(x.begin(), x.end());
    auto ry = std::minmax_element(y.begin(), y.end());
    lo = std::min(*rx.first, *ry.first);
    hi = std::max(*rx.second, *ry.second);
  }
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> segments;
  for (std::size_t t = 0; t < x.size(); ++t) {
    auto& seg = segments[features[t]];
    seg.first.push_back(x[t]);
    seg.second.push_back(y[t]);
  }
  BinSpec bins;
  bins.h = p.h;
  bins.range = {lo, hi};
  double acc = 0.0;
  for (auto& [f, seg] : segments) {
    if (seg.first.size() < 2) continue;  // too short to estimate, contributes nothing
    double w = static_cast<double>(seg.first.size()) / static_cast<double>(x.size());
    acc += w * hist_mi(SamplePairs(seg.first, seg.second), bins, p.base);
  }
  return acc;
}

}  // namespace

const std::vector<MeasureInfo>& measure_catalog() { return catalog_storage(); }

const MeasureInfo& measure_info(MeasureId id) {
  return catalog_storage()[static_cast<std::size_t>(id)];
}

std::string_view measure_name(MeasureId id) { return measure_info(id).name; }

Orientation measure_orientation(MeasureId id) { return measure_info(id).orientation; }

MeasureId measure_from_name(std::string_view name) {
  for (const MeasureInfo& info : catalog_storage())
    if (info.name == name) return info.id;
  throw InvalidInput("unknown measure: " + std::string(name));
}

PrivacyScore evaluate(const MeasureSpec& spec, const LoadProfile& x, const LoadProfile& y) {
  if (x.size() != y.size()) throw InvalidInput("profiles must have equal lengths");
  const MeasureInfo& info = measure_info(spec.id);
  Resolved p = resolve_params(spec);

  std::vector<double> dx, dy;
  if (info.uses_differences) {
    if (x.size() < 3) throw InvalidInput("difference-based measures need at least 3 readings");
    dx = first_differences(x).values;
    dy = first_differences(y).values;
  }

  PrivacyScore score;
  score.id = spec.id;
  double v = 0.0;

  switch (spec.id) {
    case MeasureId::CS:
      v = cs_value(x.values, y.values, p.clusters, score.note);
      break;
    case MeasureId::dCS:
      v = cs_value(dx, dy, p.clusters, score.note);
      break;
    case MeasureId::R2:
      v = r2_value(x.values, y.values, p.w);
      break;
    case MeasureId::dR2:
      v = r2_value(dx, dy, p.w);
      break;
    case MeasureId::Rp:
      v = rp_value(x.values, y.values, p.k_reg, score.note);
      break;
    case MeasureId::CE:
      v = hist_conditional_entropy(SamplePairs(x.values, y.values), p.bins(), p.base);
      break;
    case MeasureId::dCE:
      v = hist_conditional_entropy(SamplePairs(dx, dy), p.bins(), p.base);
      break;
    case MeasureId::dERz:
      v = er_value(dx, dy, p.h, false);
      break;
    case MeasureId::dERnz:
      v = er_value(dx, dy, p.h, true);
      break;
    case MeasureId::dFMed: {
      double tau = resolve_tau(p, dx);
      EdgeSet ex = edges_of(dx, tau);
      if (ex.idx.empty()) throw DegenerateInput("user load has no edges above tau");
      std::size_t unmatched = 0;
      for (std::size_t t : ex.idx) {
        bool matched = std::fabs(dy[t]) > tau && std::signbit(dy[t]) == std::signbit(dx[t]);
        if (!matched) ++unmatched;
      }
      v = static_cast<double>(unmatched) / static_cast<double>(ex.idx.size());
      break;
    }
    case MeasureId::dFMr: {
      double tau = resolve_tau(p, dx);
      EdgeSet ex = edges_of(dx, tau);
      if (ex.idx.empty()) throw DegenerateInput("user load has no edges above tau");
      EdgeSet ey = edges_of(dy, tau);
      v = static_cast<double>(ey.idx.size()) / static_cast<double>(ex.idx.size());
      break;
    }
    case MeasureId::dFM: {
      double tau = resolve_tau(p, dx);
      EdgeSet ex = edges_of(dx, tau);
      if (ex.idx.empty() || ex.mass == 0.0) throw DegenerateInput("user load has no edges above tau");
      EdgeSet ey = edges_of(dy, tau);
      v = 1.0 - std::min(1.0, ey.mass / ex.mass);
      break;
    }
    case MeasureId::K:
      v = hist_k_divergence(x.values, y.values, p.bins(), p.base);
      break;
    case MeasureId::KL:
      v = hist_kl(x.values, y.values, p.bins(), p.base);
      break;
    case MeasureId::dKL:
      v = hist_kl(dx, dy, p.bins(), p.base);
      break;
    case MeasureId::LV:
      v = variance(y.values);
      break;
    case MeasureId::MIs:
      v = windowed_mi(x.values, y.values, p.h, p.base);
      break;
    case MeasureId::MIi:
      if (p.use_knn) {
        v = knn_mi(SamplePairs(x.values, y.values), p.knn_k) / std::log(p.base);
        if (v < 0.0) score.note = "negative nn estimate";
      } else {
        v = hist_mi(SamplePairs(x.values, y.values), p.bins(), p.base);
      }
      break;
    case MeasureId::MIm:
      if (spec.features.empty()) throw InvalidInput("MIm needs a features vector");
      if (spec.features.size() != x.size())
        throw InvalidInput("features vector length must match the profile length");
      v = segmented_mi(x.values, y.values, spec.features, p);
      break;
    case MeasureId::dMIb: {
      double tau = resolve_tau(p, dx);
      std::vector<int> bx(dx.size()), by(dy.size());
      for (std::size_t t = 0; t < dx.size(); ++t) {
        bx[t] = std::fabs(dx[t]) > tau ? 1 : 0;
        by[t] = std::fabs(dy[t]) > tau ? 1 : 0;
      }
      v = discrete_mi(bx, by, p.base);
      break;
    }
    case MeasureId::dMIs: {
      std::vector<int> sx(dx.size()), sy(dy.size());
      auto sgn = [](double d) { return d > 0.0 ? 1 : (d < 0.0 ? -1 : 0); };
      for (std::size_t t = 0; t < dx.size(); ++t) {
        sx[t] = sgn(dx[t]);
        sy[t] = sgn(dy[t]);
      }
      v = discrete_mi(sx, sy, p.base);
      break;
    }
    case MeasureId::dMIi:
      if (p.use_knn) {
        v = knn_mi(SamplePairs(dx, dy), p.knn_k) / std::log(p.base);
        if (v < 0.0) score.note = "negative nn estimate";
      } else {
        v = hist_mi(SamplePairs(dx, dy), p.bins(), p.base);
      }
      break;
    case MeasureId::RUr:
      v = ru_value(x.values, linear_fit(x.values, y.values), p.h);
      break;
    case MeasureId::RUw:
      v = ru_value(x.values, wavelet_denoise(y.values), p.h);
      break;
    case MeasureId::TVD:
      v = hist_tvd(x.values, y.values, p.bins());
      break;
  }

  score.value = v;
  score.oriented_value = info.orientation == Orientation::HigherMorePrivate ? v : -v;
  return score;
}

}  // namespace loadveil
