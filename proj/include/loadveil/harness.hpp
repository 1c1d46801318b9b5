#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "loadveil/measures.hpp"
#include "loadveil/profiles.hpp"
#include "loadveil/synth.hpp"

namespace loadveil {

// Spearman rank correlation with average ranks for ties; 0 when either
// side is constant.  Inputs must have equal lengths >= 3.
double spearman(std::span<const double> a, std::span<const double> b);

// Two-sided p-value for the null of independence.  Exact permutation
// distribution below n = 10, Student-t approximation with n-2 degrees of
// freedom otherwise.  Inputs must have equal lengths >= 4.
double spearman_pvalue(std::span<const double> a, std::span<const double> b);

// Student-t CDF, exposed for calibration tests.
double student_t_cdf(double t, int dof);

// Evaluation set: equal-length profiles, optionally with per-profile
// segmentation features (consumed by MIm).
struct ProfileSet {
  std::vector<LoadProfile> profiles;
  std::vector<std::vector<double>> features;  // empty, or one vector per profile

  ProfileSet(std::vector<LoadProfile> p, std::vector<std::vector<double>> f = {});
  explicit ProfileSet(HouseholdSet hs);
  std::size_t size() const { return profiles.size(); }
};

// A measure bound to its hyperparameters, returning oriented scores
// (higher = more private).  Custom instances let tests plug in synthetic
// measures.
struct OrientedMeasure {
  std::string name;
  std::function<double(const LoadProfile& x, const LoadProfile& y,
                       const std::vector<double>& features)>
      eval;
};

// Adapter from the measure registry; per-profile features override the
// spec's own features vector when present.
OrientedMeasure oriented_measure(MeasureSpec spec);

enum class Probe { AddNoise, Interpolate, Compress };

struct HarnessConfig {
  std::uint64_t seed = 1;
  std::vector<double> noise_grid = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0};  // times std(x)
  std::vector<int> interp_grid = {2, 4, 8, 16, 32};
  std::vector<double> compress_grid = {0.2, 0.4, 0.6, 0.8, 0.95};
  int threads = 0;  // 0: LOADVEIL_THREADS env or hardware concurrency
};

int resolve_threads(int requested);

struct MonotonicityResult {
  double mean_rho = 0.0;
  std::vector<double> rhos;                 // NaN for skipped profiles
  std::vector<std::vector<double>> scores;  // oriented, [profile][grid], NaN on failure
  std::size_t skipped = 0;
};

// Perturbs every profile along the grid and rank-correlates oriented
// scores with the perturbation level.  Noise amplitudes are grid value
// times std(x).
MonotonicityResult run_monotonicity(const OrientedMeasure& m, const ProfileSet& set, Probe probe,
                                    std::span<const double> grid, const HarnessConfig& cfg);

struct SymmetryResult {
  double mean_sym = 0.0;
  std::vector<std::vector<double>> scores;  // [i][j] for PM(x_i, x_j), NaN on failure/diagonal
  std::size_t degenerate = 0;
};

// Ratio of the score spread when varying the user load against the spread
// when varying the grid load, averaged over anchor profiles.
SymmetryResult run_symmetry(const OrientedMeasure& m, const ProfileSet& set,
                            const HarnessConfig& cfg);

struct BestPrivacyResult {
  double bp1 = 0.0;  // share of profiles whose best-privacy scores look flat (p >= 0.1)
  double bp2 = 0.0;  // share of monotonicity scores strictly below every best score
  std::vector<std::vector<double>> best_scores;
  std::size_t skipped = 0;
};

BestPrivacyResult run_best_privacy(const OrientedMeasure& m, const ProfileSet& set,
                                   std::span<const double> grid,
                                   const std::vector<std::vector<std::vector<double>>>& mono_scores,
                                   const HarnessConfig& cfg);

// Share of collected experiment scores strictly more private than the
// no-hiding score PM(x, x).
double run_worst_privacy(const OrientedMeasure& m, const ProfileSet& set,
                         const std::vector<std::vector<std::vector<double>>>& collected,
                         const HarnessConfig& cfg);

struct RequirementRow {
  std::string measure;
  double an = 0.0, in = 0.0, c = 0.0, sy = 0.0, bp1 = 0.0, bp2 = 0.0, lp = 0.0;
  bool pass_an = false, pass_in = false, pass_c = false, pass_sy = false, pass_bp1 = false,
       pass_bp2 = false, pass_lp = false;
  std::size_t skipped = 0;  // profile-level skips across experiments
};

struct RequirementReport {
  std::vector<RequirementRow> rows;
};

// The full battery: three monotonicity probes, symmetry, best-privacy and
// worst-privacy, one row per measure, pass band [0.9, 1.1] per column.
RequirementReport run_requirements(const std::vector<MeasureSpec>& specs, const ProfileSet& set,
                                   const HarnessConfig& cfg);

struct ConsistencyMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rho;  // mean per-anchor rank correlation
  std::size_t skipped = 0;
};

ConsistencyMatrix consistency_matrix(const std::vector<MeasureSpec>& specs, const ProfileSet& set,
                                     const HarnessConfig& cfg);

struct EstimatorBenchRow {
  std::string config;
  double median_abs_err = 0.0;
  double sd_abs_err = 0.0;
};

// Absolute estimation error on sample pairs with known mutual information,
// per nn neighbor count and per histogram size, in bits.
std::vector<EstimatorBenchRow> estimator_bench(const std::vector<KnownMiSpec>& specs,
                                               std::span<const int> k_values,
                                               std::span<const int> h_values,
                                               const HarnessConfig& cfg);

// The standard 100-pair bench suite: cell counts cycling {2,4,8}, mixing
// rates covering [0,1], sample sizes log-spaced in [1e3, 1e4].
std::vector<KnownMiSpec> default_bench_specs();

}  // namespace loadveil
