#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace loadveil {

// Binning for histogram estimators.  Without an explicit range the grid is
// data-driven (min/max of the samples it is built from); with one, samples
// outside the range are clamped into the edge bins.
struct BinSpec {
  int h = 20;
  std::optional<std::pair<double, double>> range;
};

// Paired samples of two scalar series, equal lengths >= 2, finite entries.
struct SamplePairs {
  std::vector<double> xs, ys;

  SamplePairs(std::vector<double> x, std::vector<double> y);
  std::size_t size() const { return xs.size(); }
};

// Plug-in histogram entropy of one sample set, in log units of `base`.
double hist_entropy(std::span<const double> xs, const BinSpec& bins, double base);

// Plug-in mutual information on an h x h joint histogram.  Exactly
// symmetric in the two coordinates and never negative.
double hist_mi(const SamplePairs& pairs, const BinSpec& bins, double base);

// H(X|Y) = H(X,Y) - H(Y) on the shared joint histogram.
double hist_conditional_entropy(const SamplePairs& pairs, const BinSpec& bins, double base);

// KL(p||q) between the two sample histograms on a shared grid (pooled
// min/max unless the range is explicit).  Bins where p>0 but q=0 would be
// infinite, so in that case both histograms receive additive smoothing
// 1/(n*h) per bin and are renormalized.
double hist_kl(std::span<const double> xs, std::span<const double> ys, const BinSpec& bins,
               double base);

// KL(p || (p+q)/2); bounded by log 2 in the chosen base.
double hist_k_divergence(std::span<const double> xs, std::span<const double> ys,
                         const BinSpec& bins, double base);

// Total variation distance between the two sample histograms, in [0,1].
double hist_tvd(std::span<const double> xs, std::span<const double> ys, const BinSpec& bins);

// Entropy / mutual information of integer label sequences (exact symbol
// counts, no binning).
double discrete_entropy(std::span<const int> labels, double base);
double discrete_mi(std::span<const int> a, std::span<const int> b, double base);

// Kraskov-Stoegbauer-Grassberger mutual information (variant 1) with
// max-norm neighborhoods and strict marginal counts, in nats.  Duplicate
// coordinates are broken by a deterministic index-seeded jitter of relative
// magnitude 1e-10.  Small negative estimates are possible and returned
// as-is.
double knn_mi(const SamplePairs& pairs, int k);

}  // namespace loadveil
