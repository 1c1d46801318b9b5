#include "loadveil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loadveil/errors.hpp"
#include "loadveil/rng.hpp"
#include "loadveil/stats.hpp"

namespace loadveil {

namespace {

// Stream tags keep the draw sequences of unrelated purposes apart.
constexpr std::uint64_t kTagUserLoad = 0x75736572;
constexpr std::uint64_t kTagGridFrac = 0x67726964;
constexpr std::uint64_t kTagKnownMi = 0x6b6d69;
constexpr std::uint64_t kTagHousehold = 0x686f7573;

}  // namespace

RangeSwapMap::RangeSwapMap(std::array<int, 4> p) : perm(p) {
  std::array<bool, 4> seen{false, false, false, false};
  for (int v : perm) {
    if (v < 1 || v > 4) throw InvalidInput("band map entries must lie in 1..4");
    if (seen[static_cast<std::size_t>(v - 1)]) throw InvalidInput("band map must be a permutation");
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

SwapMaps default_swap_maps() {
  return SwapMaps{RangeSwapMap({2, 3, 1, 4}), RangeSwapMap({2, 3, 4, 1})};
}

std::pair<LoadProfile, DeviceSchedule> gen_user_load(std::size_t t, int f, std::uint64_t seed) {
  if (f < 4 || f % 4 != 0) throw InvalidInput("readings per day must be a positive multiple of 4");
  if (t < static_cast<std::size_t>(f)) throw InvalidInput("need at least one full day of readings");

  DeviceSchedule schedule;
  schedule.freq = f;
  schedule.device.resize(t);
  const int block = f / 4;
  for (std::size_t i = 0; i < t; ++i)
    schedule.device[i] = static_cast<int>((i % static_cast<std::size_t>(f)) / static_cast<std::size_t>(block)) + 1;

  RngStream rng = RngStream(seed).derive(kTagUserLoad);
  std::vector<double> values(t);
  for (std::size_t i = 0; i < t; ++i)
    values[i] = static_cast<double>(schedule.device[i] - 1) + rng.uniform();
  return {LoadProfile(std::move(values), f, "user"), std::move(schedule)};
}

LoadProfile apply_algorithm(const LoadProfile& x, const DeviceSchedule& schedule,
                            HidingAlgorithm algo, const SwapMaps& maps, std::uint64_t seed) {
  if (x.size() != schedule.device.size()) throw InvalidInput("schedule length does not match profile length");
  RngStream rng = RngStream(seed).derive(kTagGridFrac);
  std::vector<double> values(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double frac = rng.uniform();
    int d = schedule.device[i];
    switch (algo) {
      case HidingAlgorithm::A:
        values[i] = 4.0 * frac;
        break;
      case HidingAlgorithm::B:
        values[i] = static_cast<double>(d - 1) + frac;
        break;
      case HidingAlgorithm::C:
        values[i] = static_cast<double>(maps.c.perm[static_cast<std::size_t>(d - 1)] - 1) + frac;
        break;
      case HidingAlgorithm::D:
        values[i] = static_cast<double>(maps.d.perm[static_cast<std::size_t>(d - 1)] - 1) + frac;
        break;
    }
  }
  return LoadProfile(std::move(values), x.freq, "grid");
}

std::vector<double> mim_features(const DeviceSchedule& schedule, std::size_t shift) {
  const std::size_t t = schedule.device.size();
  if (shift >= t) throw InvalidInput("feature shift must be smaller than the schedule length");
  std::vector<double> features(t);
  for (std::size_t i = 0; i < t; ++i)
    features[i] = static_cast<double>(schedule.device[(i + t - shift) % t]);
  return features;
}

KnownMiSpec::KnownMiSpec(int m_cells, double eps, std::size_t samples)
    : m(m_cells), epsilon(eps), n(samples) {
  if (m < 2) throw InvalidInput("need at least 2 cells");
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0)) throw InvalidInput("mixing rate must lie in [0,1]");
  if (n < 10 * static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
    throw InvalidInput("need at least 10*m^2 samples");
}

double KnownMiSpec::true_mi_bits() const {
  const double md = static_cast<double>(m);
  const double diag = (1.0 - epsilon + epsilon / md) / md;
  const double off = epsilon / (md * md);
  double mi = 0.0;
  if (diag > 0.0) mi += md * diag * std::log2(diag * md * md);
  if (off > 0.0) mi += md * (md - 1.0) * off * std::log2(off * md * md);
  return std::max(0.0, mi);
}

SamplePairs gen_known_mi_pair(const KnownMiSpec& spec, std::uint64_t seed) {
  RngStream rng = RngStream(seed).derive(kTagKnownMi);
  const auto m = static_cast<std::uint64_t>(spec.m);
  std::vector<double> xs(spec.n), ys(spec.n);
  for (std::size_t s = 0; s < spec.n; ++s) {
    auto i = rng.uniform_int(m);
    auto j = i;
    if (rng.uniform() < spec.epsilon) j = rng.uniform_int(m);
    xs[s] = static_cast<double>(i) + rng.uniform();
    ys[s] = static_cast<double>(j) + rng.uniform();
  }
  return SamplePairs(std::move(xs), std::move(ys));
}

HouseholdSet make_household_set(std::size_t n_profiles, std::size_t t, int f, std::uint64_t seed) {
  if (n_profiles < 2) throw InvalidInput("household set needs at least 2 profiles");
  if (f < 4 || f % 4 != 0) throw InvalidInput("readings per day must be a positive multiple of 4");
  if (t < static_cast<std::size_t>(f)) throw InvalidInput("need at least one full day of readings");

  HouseholdSet set;
  set.freq = f;
  set.profiles.reserve(n_profiles);
  set.features.reserve(n_profiles);

  const auto fs = static_cast<std::size_t>(f);
  for (std::size_t p = 0; p < n_profiles; ++p) {
    RngStream rng = RngStream(seed).derive(kTagHousehold, p);
    RngStream shifts = rng.derive(1);
    RngStream draws = rng.derive(2);
    RngStream habits = rng.derive(5);

    // Household habit: uneven daily device-block lengths (roughly 10%-40%
    // of the day each), so marginal entropies differ across profiles.
    std::array<double, 4> g{};
    double gs = 0.0;
    for (double& v : g) {
      v = 0.5 + habits.uniform();
      gs += v;
    }
    std::array<int, 4> widths{};
    int acc = 0;
    for (std::size_t d = 0; d < 3; ++d) {
      widths[d] = std::max(1, static_cast<int>(std::floor(static_cast<double>(f) * g[d] / gs)));
      acc += widths[d];
    }
    widths[3] = f - acc;
    while (widths[3] < 1) {
      auto big = static_cast<std::size_t>(
          std::max_element(widths.begin(), widths.begin() + 3) - widths.begin());
      --widths[big];
      ++widths[3];
    }
    std::vector<int> day(fs);
    std::size_t pos = 0;
    for (int d = 0; d < 4; ++d)
      for (int r = 0; r < widths[static_cast<std::size_t>(d)]; ++r) day[pos++] = d + 1;

    // The schedule phase is re-jittered independently every day; across
    // households the active-device processes are then close to independent,
    // like unrelated meters.
    std::vector<double> values(t);
    std::vector<double> features(t);
    std::uint64_t shift = 0;
    for (std::size_t i = 0; i < t; ++i) {
      if (i % fs == 0) shift = shifts.uniform_int(fs);
      int d = day[(i + shift) % fs];
      features[i] = static_cast<double>(d);
      values[i] = static_cast<double>(d - 1) + draws.uniform();
    }
    LoadProfile profile(std::move(values), f, "h" + std::to_string(p));

    // A per-household baseline-noise floor with its own amplitude.
    double amplitude = 0.05 + 0.25 * rng.derive(3).uniform();
    profile = oplus(profile, sample_noise(t, amplitude, rng.derive(4).next_u64()));
    set.profiles.push_back(std::move(profile));
    set.features.push_back(std::move(features));
  }
  return set;
}

}  // namespace loadveil
