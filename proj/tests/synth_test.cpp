#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "loadveil/errors.hpp"
#include "loadveil/estimators.hpp"
#include "loadveil/rng.hpp"
#include "loadveil/stats.hpp"
#include "loadveil/synth.hpp"

using namespace loadveil;

TEST_CASE("household load generation") {
  SUBCASE("frequency validation") {
    CHECK_THROWS_AS(gen_user_load(100, 10, 1), InvalidInput);  // not a multiple of 4
    CHECK_THROWS_AS(gen_user_load(100, 0, 1), InvalidInput);
    CHECK_THROWS_AS(gen_user_load(100, 200, 1), InvalidInput);  // less than one day
  }

  auto [x, schedule] = gen_user_load(6400, 200, 3);
  REQUIRE(x.size() == 6400);
  REQUIRE(schedule.device.size() == 6400);
  CHECK(x.freq == 200);
  CHECK(schedule.freq == 200);

  SUBCASE("four equal consecutive blocks per day") {
    for (std::size_t t = 0; t < 6400; ++t) {
      int expected = 1 + static_cast<int>((t % 200) / 50);
      CHECK(schedule.device[t] == expected);
    }
    // 32 days, each device active 50 stamps per day.
    std::array<int, 5> per_day{};
    for (std::size_t t = 0; t < 200; ++t) ++per_day[static_cast<std::size_t>(schedule.device[t])];
    for (int d = 1; d <= 4; ++d) CHECK(per_day[static_cast<std::size_t>(d)] == 50);
  }

  SUBCASE("values stay in the active device band") {
    for (std::size_t t = 0; t < 6400; ++t) {
      double d = schedule.device[t];
      CHECK(x.values[t] >= d - 1.0);
      CHECK(x.values[t] <= d);
    }
  }

  SUBCASE("device-2 block mean") {
    std::vector<double> block;
    for (std::size_t t = 0; t < 6400; ++t)
      if (schedule.device[t] == 2) block.push_back(x.values[t]);
    CHECK(block.size() == 1600);
    CHECK(std::fabs(mean(block) - 1.5) <= 0.02);
  }

  SUBCASE("seed determinism") {
    auto [again, s2] = gen_user_load(6400, 200, 3);
    CHECK(again.values == x.values);
    auto [other, s3] = gen_user_load(6400, 200, 4);
    CHECK(other.values != x.values);
  }
}

TEST_CASE("band permutation maps") {
  CHECK_THROWS_AS(RangeSwapMap(std::array<int, 4>{1, 1, 3, 4}), InvalidInput);
  CHECK_THROWS_AS(RangeSwapMap(std::array<int, 4>{0, 2, 3, 4}), InvalidInput);

  SwapMaps maps = default_swap_maps();
  CHECK(maps.c.perm == std::array<int, 4>{{2, 3, 1, 4}});
  CHECK(maps.d.perm == std::array<int, 4>{{2, 3, 4, 1}});
}

TEST_CASE("hiding algorithms") {
  auto [x, schedule] = gen_user_load(6400, 200, 11);
  SwapMaps maps = default_swap_maps();
  LoadProfile ya = apply_algorithm(x, schedule, HidingAlgorithm::A, maps, 12);
  LoadProfile yb = apply_algorithm(x, schedule, HidingAlgorithm::B, maps, 12);
  LoadProfile yc = apply_algorithm(x, schedule, HidingAlgorithm::C, maps, 12);
  LoadProfile yd = apply_algorithm(x, schedule, HidingAlgorithm::D, maps, 12);

  BinSpec bins;
  bins.range = {{0.0, 4.0}};

  SUBCASE("replayed bands follow the permutation") {
    for (std::size_t t = 0; t < x.size(); ++t) {
      int d = schedule.device[t];
      CHECK(ya.values[t] >= 0.0);
      CHECK(ya.values[t] <= 4.0);
      CHECK(yb.values[t] >= d - 1.0);
      CHECK(yb.values[t] <= d);
      int pc = maps.c.perm[static_cast<std::size_t>(d - 1)];
      CHECK(yc.values[t] >= pc - 1.0);
      CHECK(yc.values[t] <= pc);
      int pd = maps.d.perm[static_cast<std::size_t>(d - 1)];
      CHECK(yd.values[t] >= pd - 1.0);
      CHECK(yd.values[t] <= pd);
    }
  }

  SUBCASE("permuted bands carry identical information") {
    // With bin edges aligned to the unit bands the three grids are exact
    // bin permutations of each other.
    double ib = hist_mi(SamplePairs(x.values, yb.values), bins, 2.0);
    double ic = hist_mi(SamplePairs(x.values, yc.values), bins, 2.0);
    double id = hist_mi(SamplePairs(x.values, yd.values), bins, 2.0);
    CHECK(std::fabs(ib - ic) <= 1e-12);
    CHECK(std::fabs(ib - id) <= 1e-12);
    CHECK(ib == doctest::Approx(2.0).epsilon(0.02 / 2.0));
  }

  SUBCASE("full-range replacement is uninformative") {
    double ia = hist_mi(SamplePairs(x.values, ya.values), bins, 2.0);
    CHECK(ia <= 0.06);
  }

  SUBCASE("band replay preserves the marginal distribution") {
    // Both sides are uniform within the same occupied bands; at n=6400 and
    // h=20 the sampling fluctuation of the empirical TVD is ~0.02.
    CHECK(hist_tvd(x.values, yb.values, bins) <= 0.05);
  }

  SUBCASE("schedule length must match") {
    auto [shorter, s2] = gen_user_load(400, 200, 1);
    CHECK_THROWS_AS(apply_algorithm(shorter, schedule, HidingAlgorithm::B, maps, 1), InvalidInput);
  }
}

TEST_CASE("segmentation features") {
  auto [x, schedule] = gen_user_load(1000, 200, 21);

  std::vector<double> f0 = mim_features(schedule, 0);
  REQUIRE(f0.size() == 1000);
  for (std::size_t t = 0; t < f0.size(); ++t)
    CHECK(f0[t] == static_cast<double>(schedule.device[t]));

  // The daily schedule repeats, so a full-day delay changes nothing.
  CHECK(mim_features(schedule, 200) == f0);

  std::vector<double> f25 = mim_features(schedule, 25);
  for (std::size_t t = 0; t < f25.size(); ++t)
    CHECK(f25[t] == static_cast<double>(schedule.device[(t + 1000 - 25) % 1000]));

  CHECK_THROWS_AS(mim_features(schedule, 1000), InvalidInput);
}

TEST_CASE("known mutual information pairs") {
  SUBCASE("spec validation") {
    CHECK_THROWS_AS(KnownMiSpec(1, 0.5, 1000), InvalidInput);
    CHECK_THROWS_AS(KnownMiSpec(4, -0.1, 1000), InvalidInput);
    CHECK_THROWS_AS(KnownMiSpec(4, 1.1, 1000), InvalidInput);
    CHECK_THROWS_AS(KnownMiSpec(4, 0.5, 100), InvalidInput);  // below 10*m^2
  }

  SUBCASE("closed form against hand-computed sums") {
    CHECK(KnownMiSpec(4, 0.0, 1000).true_mi_bits() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(KnownMiSpec(8, 0.0, 1000).true_mi_bits() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(KnownMiSpec(4, 1.0, 1000).true_mi_bits() == doctest::Approx(0.0).epsilon(1e-12));
    // Exhaustive 16-cell summation: 0.451205059...
    CHECK(KnownMiSpec(4, 0.5, 1000).true_mi_bits() ==
          doctest::Approx(0.45120505930460153).epsilon(1e-12));
    CHECK(KnownMiSpec(2, 0.3, 1000).true_mi_bits() ==
          doctest::Approx(0.39015969528359956).epsilon(1e-12));
    CHECK(KnownMiSpec(8, 0.9, 1000).true_mi_bits() ==
          doctest::Approx(0.04297369751415568).epsilon(1e-12));
  }

  SUBCASE("samples live in their cells and reproduce the target") {
    KnownMiSpec spec(4, 0.0, 100000);
    SamplePairs p = gen_known_mi_pair(spec, 17);
    REQUIRE(p.size() == 100000);
    for (std::size_t s = 0; s < 200; ++s) {
      CHECK(p.xs[s] >= 0.0);
      CHECK(p.xs[s] < 4.0);
      // At eps=0 both coordinates share one cell.
      CHECK(std::floor(p.xs[s]) == std::floor(p.ys[s]));
    }
    BinSpec cells;
    cells.h = 4;
    cells.range = {{0.0, 4.0}};
    CHECK(std::fabs(hist_mi(p, cells, 2.0) - 2.0) <= 0.03);
  }

  SUBCASE("plug-in on the exact cells converges") {
    KnownMiSpec spec(2, 0.5, 10000);
    BinSpec cells;
    cells.h = 2;
    cells.range = {{0.0, 2.0}};
    double truth = spec.true_mi_bits();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      double est = hist_mi(gen_known_mi_pair(spec, seed), cells, 2.0);
      CHECK(std::fabs(est - truth) <= 0.03);
    }
  }
}

TEST_CASE("bundled household set") {
  HouseholdSet set = make_household_set(4, 512, 128, 9);
  REQUIRE(set.profiles.size() == 4);
  REQUIRE(set.features.size() == 4);
  CHECK(set.freq == 128);

  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(set.profiles[p].size() == 512);
    CHECK(set.profiles[p].freq == 128);
    CHECK(set.profiles[p].id == "h" + std::to_string(p));
    REQUIRE(set.features[p].size() == 512);
    for (double f : set.features[p]) {
      CHECK(f >= 1.0);
      CHECK(f <= 4.0);
      CHECK(f == std::floor(f));
    }
    for (double v : set.profiles[p].values) CHECK(v >= 0.0);
  }

  // Households differ from each other but are stable per seed.
  CHECK(set.profiles[0].values != set.profiles[1].values);
  HouseholdSet again = make_household_set(4, 512, 128, 9);
  CHECK(again.profiles[2].values == set.profiles[2].values);

  CHECK_THROWS_AS(make_household_set(1, 512, 128, 9), InvalidInput);
  CHECK_THROWS_AS(make_household_set(4, 512, 130, 9), InvalidInput);
  CHECK_THROWS_AS(make_household_set(4, 64, 128, 9), InvalidInput);
}
