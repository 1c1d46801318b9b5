#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "loadveil/estimators.hpp"
#include "loadveil/profiles.hpp"

namespace loadveil {

// Which of the four devices is active at each stamp (values 1..4).
struct DeviceSchedule {
  std::vector<int> device;
  int freq = 4;
};

// Grid-side hiding algorithms for the four-device household:
//   A ignores the schedule entirely (uniform over the full range),
//   B replays the active device's band,
//   C and D replay a permuted band.
enum class HidingAlgorithm { A, B, C, D };

// Permutation of the device bands; perm[d-1] is the band replayed when
// device d is active.
struct RangeSwapMap {
  std::array<int, 4> perm;
  explicit RangeSwapMap(std::array<int, 4> p);
};

struct SwapMaps {
  RangeSwapMap c;
  RangeSwapMap d;
};

// Defaults chosen so that the four algorithms produce strictly separated
// correlation levels (A < D < C < B for both R2 and dR2 in expectation):
// C cycles bands 1->2->3->1 keeping band 4, D cycles all four bands.
SwapMaps default_swap_maps();

// Daily schedule of four equal consecutive blocks, one device per block;
// the active device draws Uniform[d-1, d].  f must be a positive multiple
// of 4 and T >= f.
std::pair<LoadProfile, DeviceSchedule> gen_user_load(std::size_t t, int f, std::uint64_t seed);

// Grid load for the given schedule.  Per stamp, all algorithms share the
// same underlying uniform draw, so B, C, and D differ only by which band
// the draw is placed in.
LoadProfile apply_algorithm(const LoadProfile& x, const DeviceSchedule& schedule,
                            HidingAlgorithm algo, const SwapMaps& maps, std::uint64_t seed);

// Device-id vector cyclically delayed by `shift` stamps; the segmentation
// input for MIm.  shift must be smaller than the schedule length.
std::vector<double> mim_features(const DeviceSchedule& schedule, std::size_t shift);

// Paired samples with analytically known mutual information: cell index i
// is uniform on {0..m-1}, j equals i with probability 1-eps and is
// redrawn uniformly otherwise; both coordinates are then spread uniformly
// inside their unit cells.
struct KnownMiSpec {
  int m;
  double epsilon;
  std::size_t n;

  KnownMiSpec(int m_cells, double eps, std::size_t samples);
  double true_mi_bits() const;
};

SamplePairs gen_known_mi_pair(const KnownMiSpec& spec, std::uint64_t seed);

// Bundle of synthetic household profiles with per-profile device
// schedules.  Profiles differ in their daily block lengths and carry a
// little baseline noise, so marginal shapes vary across the set.
struct HouseholdSet {
  std::vector<LoadProfile> profiles;
  std::vector<std::vector<double>> features;  // device ids per profile
  int freq = 4;
};

HouseholdSet make_household_set(std::size_t n_profiles, std::size_t t, int f, std::uint64_t seed);

}  // namespace loadveil
