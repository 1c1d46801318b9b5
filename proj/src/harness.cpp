#include "loadveil/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "loadveil/errors.hpp"
#include "loadveil/estimators.hpp"
#include "loadveil/rng.hpp"
#include "loadveil/stats.hpp"
#include "loadveil/transforms.hpp"

namespace loadveil {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags for the different experiment families.
constexpr std::uint64_t kTagNoise = 1;
constexpr std::uint64_t kTagInterp = 2;
constexpr std::uint64_t kTagCompress = 3;
constexpr std::uint64_t kTagBest = 4;
constexpr std::uint64_t kTagBench = 5;

void parallel_for(std::size_t total, int threads, const std::function<void(std::size_t)>& fn) {
  int t = resolve_threads(threads);
  if (t <= 1 || total < 2) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t p = i; p <= j; ++p) ranks[idx[p]] = r;
    i = j + 1;
  }
  return ranks;
}

//===--- regularized incomplete beta, for the Student-t tail ---===//

double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log1p(-x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cont_frac(a, b, x) / a;
  return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double t, int dof) {
  if (dof < 1) throw InvalidInput("degrees of freedom must be >= 1");
  double v = static_cast<double>(dof);
  double x = v / (v + t * t);
  double tail = 0.5 * reg_ibeta(v / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("rank correlation needs equal lengths");
  if (a.size() < 3) throw InvalidInput("rank correlation needs at least 3 observations");
  std::vector<double> ra = average_ranks(a);
  std::vector<double> rb = average_ranks(b);
  return pearson(ra, rb);
}

double spearman_pvalue(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("rank correlation needs equal lengths");
  const std::size_t n = a.size();
  if (n < 4) throw InvalidInput("p-value needs at least 4 observations");

  std::vector<double> ra = average_ranks(a);
  std::vector<double> rb = average_ranks(b);
  double rho = pearson(ra, rb);
  double ma = mean(ra), mb = mean(rb);
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += (ra[i] - ma) * (ra[i] - ma);
    sb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (sa <= 0.0 || sb <= 0.0) return 1.0;  // constant side: no evidence against the null

  if (n < 10) {
    // Exact permutation null: every distinct arrangement of b's ranks is
    // equally likely (ties collapse arrangements uniformly).
    std::vector<double> perm = rb;
    std::sort(perm.begin(), perm.end());
    double denom = std::sqrt(sa * sb);
    double threshold = std::fabs(rho) - 1e-12;
    std::uint64_t total = 0, hits = 0;
    do {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += (ra[i] - ma) * (perm[i] - mb);
      ++total;
      if (std::fabs(dot / denom) >= threshold) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
  }

  if (std::fabs(rho) >= 1.0) return 2.0 / std::tgamma(static_cast<double>(n) + 1.0);
  double v = static_cast<double>(n - 2);
  double t = rho * std::sqrt(v / (1.0 - rho * rho));
  double p = reg_ibeta(v / 2.0, 0.5, v / (v + t * t));
  return std::clamp(p, 0.0, 1.0);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LOADVEIL_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ProfileSet::ProfileSet(std::vector<LoadProfile> p, std::vector<std::vector<double>> f)
    : profiles(std::move(p)), features(std::move(f)) {
  if (profiles.size() < 2) throw InvalidInput("evaluation set needs at least 2 profiles");
  std::size_t t = profiles[0].size();
  for (const LoadProfile& lp : profiles)
    if (lp.size() != t) throw InvalidInput("evaluation set profiles must share one length");
  if (!features.empty()) {
    if (features.size() != profiles.size())
      throw InvalidInput("need one features vector per profile");
    for (const auto& fv : features)
      if (fv.size() != t) throw InvalidInput("features vectors must match the profile length");
  }
}

ProfileSet::ProfileSet(HouseholdSet hs)
    : ProfileSet(std::move(hs.profiles), std::move(hs.features)) {}

OrientedMeasure oriented_measure(MeasureSpec spec) {
  std::string name(measure_name(spec.id));
  auto est = spec.params.find("estimator");
  if (est != spec.params.end() && est->second == 1.0) name += "k";
  OrientedMeasure om;
  om.name = std::move(name);
  om.eval = [spec = std::move(spec)](const LoadProfile& x, const LoadProfile& y,
                                     const std::vector<double>& features) {
    MeasureSpec local = spec;
    if (local.id == MeasureId::MIm && !features.empty()) local.features = features;
    return evaluate(local, x, y).oriented_value;
  };
  return om;
}

namespace {

const std::vector<double>& features_of(const ProfileSet& set, std::size_t i) {
  static const std::vector<double> empty;
  return set.features.empty() ? empty : set.features[i];
}

LoadProfile apply_probe(Probe probe, const LoadProfile& x, double g, std::uint64_t seed) {
  switch (probe) {
    case Probe::AddNoise:
      return add_noise(x, g * stddev(x.values), seed);
    case Probe::Interpolate:
      return interpolate(x, static_cast<int>(g));
    case Probe::Compress:
      return wavelet_compress(x, g);
  }
  throw InvalidInput("unknown probe");
}

std::uint64_t probe_tag(Probe probe) {
  switch (probe) {
    case Probe::AddNoise:
      return kTagNoise;
    case Probe::Interpolate:
      return kTagInterp;
    case Probe::Compress:
      return kTagCompress;
  }
  return 0;
}

bool in_band(double v) { return std::isfinite(v) && v >= 0.9 && v <= 1.1; }

double mean_of_finite(const std::vector<double>& v) {
  double acc = 0.0;
  std::size_t cnt = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      acc += x;
      ++cnt;
    }
  return cnt > 0 ? acc / static_cast<double>(cnt) : kNaN;
}

}  // namespace

MonotonicityResult run_monotonicity(const OrientedMeasure& m, const ProfileSet& set, Probe probe,
                                    std::span<const double> grid, const HarnessConfig& cfg) {
  if (grid.size() < 3) throw InvalidInput("perturbation grid needs at least 3 levels");
  const std::size_t n = set.size();
  MonotonicityResult result;
  result.scores.assign(n, std::vector<double>(grid.size(), kNaN));
  result.rhos.assign(n, kNaN);

  RngStream root(cfg.seed);
  std::vector<double> gv(grid.begin(), grid.end());
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const LoadProfile& x = set.profiles[i];
    bool ok = true;
    for (std::size_t k = 0; k < gv.size(); ++k) {
      try {
        std::uint64_t seed = root.derive(probe_tag(probe), i, k).next_u64();
        LoadProfile y = apply_probe(probe, x, gv[k], seed);
        double s = m.eval(x, y, features_of(set, i));
        if (!std::isfinite(s)) throw DegenerateInput("non-finite score");
        result.scores[i][k] = s;
      } catch (const InvalidInput&) {
        ok = false;
      } catch (const DegenerateInput&) {
        ok = false;
      }
    }
    if (ok) result.rhos[i] = spearman(result.scores[i], gv);
  });

  for (double r : result.rhos)
    if (!std::isfinite(r)) ++result.skipped;
  result.mean_rho = mean_of_finite(result.rhos);
  return result;
}

SymmetryResult run_symmetry(const OrientedMeasure& m, const ProfileSet& set,
                            const HarnessConfig& cfg) {
  const std::size_t n = set.size();
  SymmetryResult result;
  result.scores.assign(n, std::vector<double>(n, kNaN));

  parallel_for(n * n, cfg.threads, [&](std::size_t task) {
    std::size_t i = task / n, j = task % n;
    if (i == j) return;
    try {
      double s = m.eval(set.profiles[i], set.profiles[j], features_of(set, i));
      result.scores[i][j] = std::isfinite(s) ? s : kNaN;
    } catch (const InvalidInput&) {
    } catch (const DegenerateInput&) {
    }
  });

  std::vector<double> syms;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> varying_user, varying_grid;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      if (std::isfinite(result.scores[i][k])) varying_user.push_back(result.scores[i][k]);
      if (std::isfinite(result.scores[k][i])) varying_grid.push_back(result.scores[k][i]);
    }
    if (varying_user.size() < 2 || varying_grid.size() < 2) {
      ++result.degenerate;
      continue;
    }
    double den = sample_stddev(varying_grid);
    if (den == 0.0) {
      ++result.degenerate;
      continue;
    }
    syms.push_back(sample_stddev(varying_user) / den);
  }
  result.mean_sym = syms.empty() ? kNaN : mean(syms);
  return result;
}

BestPrivacyResult run_best_privacy(const OrientedMeasure& m, const ProfileSet& set,
                                   std::span<const double> grid,
                                   const std::vector<std::vector<std::vector<double>>>& mono_scores,
                                   const HarnessConfig& cfg) {
  if (grid.size() < 4) throw InvalidInput("best-privacy grid needs at least 4 levels");
  const std::size_t n = set.size();
  BestPrivacyResult result;
  result.best_scores.assign(n, std::vector<double>(grid.size(), kNaN));

  RngStream root(cfg.seed);
  std::vector<double> gv(grid.begin(), grid.end());
  std::vector<double> flat_indicator(n, kNaN);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const LoadProfile& x = set.profiles[i];
    bool ok = true;
    for (std::size_t k = 0; k < gv.size(); ++k) {
      try {
        std::uint64_t seed = root.derive(kTagBest, i, k).next_u64();
        LoadProfile y = best_privacy(x, gv[k] * stddev(x.values), seed);
        double s = m.eval(x, y, features_of(set, i));
        if (!std::isfinite(s)) throw DegenerateInput("non-finite score");
        result.best_scores[i][k] = s;
      } catch (const InvalidInput&) {
        ok = false;
      } catch (const DegenerateInput&) {
        ok = false;
      }
    }
    if (ok) flat_indicator[i] = spearman_pvalue(result.best_scores[i], gv) >= 0.1 ? 1.0 : 0.0;
  });

  for (double v : flat_indicator)
    if (!std::isfinite(v)) ++result.skipped;
  result.bp1 = mean_of_finite(flat_indicator);

  // Share of monotonicity scores strictly below the profile's weakest
  // best-privacy score.
  std::size_t total = 0, below = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double min_best = kNaN;
    bool valid = true;
    for (double s : result.best_scores[i]) {
      if (!std::isfinite(s)) {
        valid = false;
        break;
      }
      min_best = std::isnan(min_best) ? s : std::min(min_best, s);
    }
    if (!valid) continue;
    for (const auto& probe_scores : mono_scores) {
      if (i >= probe_scores.size()) continue;
      for (double s : probe_scores[i])
        if (std::isfinite(s)) {
          ++total;
          if (s < min_best) ++below;
        }
    }
  }
  result.bp2 = total > 0 ? static_cast<double>(below) / static_cast<double>(total) : kNaN;
  return result;
}

double run_worst_privacy(const OrientedMeasure& m, const ProfileSet& set,
                         const std::vector<std::vector<std::vector<double>>>& collected,
                         const HarnessConfig& cfg) {
  const std::size_t n = set.size();
  std::vector<double> self(n, kNaN);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    try {
      double s = m.eval(set.profiles[i], set.profiles[i], features_of(set, i));
      self[i] = std::isfinite(s) ? s : kNaN;
    } catch (const InvalidInput&) {
    } catch (const DegenerateInput&) {
    }
  });

  std::size_t total = 0, above = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(self[i])) continue;
    for (const auto& scores : collected) {
      if (i >= scores.size()) continue;
      for (double s : scores[i])
        if (std::isfinite(s)) {
          ++total;
          if (s > self[i]) ++above;
        }
    }
  }
  return total > 0 ? static_cast<double>(above) / static_cast<double>(total) : kNaN;
}

RequirementReport run_requirements(const std::vector<MeasureSpec>& specs, const ProfileSet& set,
                                   const HarnessConfig& cfg) {
  RequirementReport report;
  std::vector<double> interp(cfg.interp_grid.begin(), cfg.interp_grid.end());

  for (const MeasureSpec& spec : specs) {
    OrientedMeasure om = oriented_measure(spec);
    MonotonicityResult an = run_monotonicity(om, set, Probe::AddNoise, cfg.noise_grid, cfg);
    MonotonicityResult in = run_monotonicity(om, set, Probe::Interpolate, interp, cfg);
    MonotonicityResult cm = run_monotonicity(om, set, Probe::Compress, cfg.compress_grid, cfg);
    SymmetryResult sy = run_symmetry(om, set, cfg);

    std::vector<std::vector<std::vector<double>>> mono = {an.scores, in.scores, cm.scores};
    BestPrivacyResult bp = run_best_privacy(om, set, cfg.noise_grid, mono, cfg);

    std::vector<std::vector<std::vector<double>>> collected = std::move(mono);
    collected.push_back(bp.best_scores);
    double lp = run_worst_privacy(om, set, collected, cfg);

    RequirementRow row;
    row.measure = om.name;
    row.an = an.mean_rho;
    row.in = in.mean_rho;
    row.c = cm.mean_rho;
    row.sy = sy.mean_sym;
    row.bp1 = bp.bp1;
    row.bp2 = bp.bp2;
    row.lp = lp;
    row.pass_an = in_band(row.an);
    row.pass_in = in_band(row.in);
    row.pass_c = in_band(row.c);
    row.pass_sy = in_band(row.sy);
    row.pass_bp1 = in_band(row.bp1);
    row.pass_bp2 = in_band(row.bp2);
    row.pass_lp = in_band(row.lp);
    row.skipped = an.skipped + in.skipped + cm.skipped + sy.degenerate + bp.skipped;
    report.rows.push_back(std::move(row));
  }
  return report;
}

ConsistencyMatrix consistency_matrix(const std::vector<MeasureSpec>& specs, const ProfileSet& set,
                                     const HarnessConfig& cfg) {
  const std::size_t m = specs.size();
  const std::size_t n = set.size();
  if (m < 2) throw InvalidInput("consistency needs at least 2 measures");

  std::vector<OrientedMeasure> oms;
  oms.reserve(m);
  for (const MeasureSpec& spec : specs) oms.push_back(oriented_measure(spec));

  // scores[q][i][j] = oriented measure q on (x_i, x_j)
  std::vector<std::vector<std::vector<double>>> scores(
      m, std::vector<std::vector<double>>(n, std::vector<double>(n, kNaN)));
  parallel_for(m * n * n, cfg.threads, [&](std::size_t task) {
    std::size_t q = task / (n * n);
    std::size_t i = (task / n) % n;
    std::size_t j = task % n;
    if (i == j) return;
    try {
      double s = oms[q].eval(set.profiles[i], set.profiles[j], features_of(set, i));
      scores[q][i][j] = std::isfinite(s) ? s : kNaN;
    } catch (const InvalidInput&) {
    } catch (const DegenerateInput&) {
    }
  });

  ConsistencyMatrix result;
  for (const OrientedMeasure& om : oms) result.names.push_back(om.name);
  result.rho.assign(m, std::vector<double>(m, 1.0));

  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      std::vector<double> per_anchor;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> va, vb;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double sa = scores[a][i][j], sb = scores[b][i][j];
          if (std::isfinite(sa) && std::isfinite(sb)) {
            va.push_back(sa);
            vb.push_back(sb);
          }
        }
        if (va.size() < 3) {
          ++result.skipped;
          continue;
        }
        per_anchor.push_back(spearman(va, vb));
      }
      double entry = per_anchor.empty() ? kNaN : mean(per_anchor);
      result.rho[a][b] = entry;
      result.rho[b][a] = entry;
    }
  }
  return result;
}

std::vector<EstimatorBenchRow> estimator_bench(const std::vector<KnownMiSpec>& specs,
                                               std::span<const int> k_values,
                                               std::span<const int> h_values,
                                               const HarnessConfig& cfg) {
  if (specs.empty()) throw InvalidInput("bench needs at least one pair spec");
  const std::size_t pairs = specs.size();
  const std::size_t configs = k_values.size() + h_values.size();
  std::vector<std::vector<double>> errs(configs, std::vector<double>(pairs, kNaN));

  RngStream root(cfg.seed);
  constexpr double kLn2 = 0.69314718055994530942;
  std::vector<int> kv(k_values.begin(), k_values.end());
  std::vector<int> hv(h_values.begin(), h_values.end());
  parallel_for(pairs, cfg.threads, [&](std::size_t p) {
    std::uint64_t seed = root.derive(kTagBench, p).next_u64();
    SamplePairs data = gen_known_mi_pair(specs[p], seed);
    double truth = specs[p].true_mi_bits();
    for (std::size_t c = 0; c < kv.size(); ++c)
      errs[c][p] = std::fabs(knn_mi(data, kv[c]) / kLn2 - truth);
    for (std::size_t c = 0; c < hv.size(); ++c) {
      BinSpec bins;
      bins.h = hv[c];
      errs[kv.size() + c][p] = std::fabs(hist_mi(data, bins, 2.0) - truth);
    }
  });

  std::vector<EstimatorBenchRow> rows;
  for (std::size_t c = 0; c < configs; ++c) {
    EstimatorBenchRow row;
    row.config = c < kv.size() ? "nn k=" + std::to_string(kv[c])
                               : "hist h=" + std::to_string(hv[c - kv.size()]);
    std::vector<double> e = errs[c];
    std::sort(e.begin(), e.end());
    std::size_t half = e.size() / 2;
    row.median_abs_err = e.size() % 2 == 1 ? e[half] : 0.5 * (e[half - 1] + e[half]);
    row.sd_abs_err = sample_stddev(e);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<KnownMiSpec> default_bench_specs() {
  std::vector<KnownMiSpec> specs;
  specs.reserve(100);
  const int ms[3] = {2, 4, 8};
  for (int p = 0; p < 100; ++p) {
    int m = ms[p % 3];
    double eps = static_cast<double>(p) / 99.0;
    auto n = static_cast<std::size_t>(
        std::lround(1000.0 * std::pow(10.0, static_cast<double>(p % 7) / 6.0)));
    specs.emplace_back(m, eps, n);
  }
  return specs;
}

}  // namespace loadveil
