#include <doctest.h>

#include <cmath>
#include <vector>

#include "loadveil/errors.hpp"
#include "loadveil/profiles.hpp"
#include "loadveil/rng.hpp"
#include "loadveil/stats.hpp"
#include "loadveil/transforms.hpp"

using namespace loadveil;

namespace {

double total_variation(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += std::fabs(v[i] - v[i - 1]);
  return s;
}

LoadProfile random_profile(std::size_t t, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(t);
  for (double& x : v) x = rng.uniform(0.0, 4.0);
  return LoadProfile(v, 4);
}

}  // namespace

TEST_CASE("interpolation") {
  SUBCASE("stride one is the identity") {
    LoadProfile x = random_profile(32, 3);
    CHECK(interpolate(x, 1).values == x.values);
  }
  SUBCASE("linear data is a fixed point") {
    LoadProfile x({0.0, 5.0, 10.0, 15.0}, 4);
    LoadProfile y = interpolate(x, 3);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(y.values[i] == doctest::Approx(x.values[i]).epsilon(1e-12));
  }
  SUBCASE("between kept zeros everything is zero") {
    LoadProfile x({0.0, 9.0, 0.0, 9.0, 0.0}, 5);
    LoadProfile y = interpolate(x, 2);
    for (double v : y.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("kept stamps carry the original readings") {
    LoadProfile x = random_profile(37, 9);
    LoadProfile y = interpolate(x, 5);
    for (std::size_t i = 0; i < x.size(); i += 5) CHECK(y.values[i] == x.values[i]);
    CHECK(y.values.back() == x.values.back());
  }
  SUBCASE("granularity bounds") {
    LoadProfile x = random_profile(8, 1);
    CHECK_THROWS_AS(interpolate(x, 8), InvalidInput);
    CHECK_THROWS_AS(interpolate(x, 0), InvalidInput);
    CHECK_THROWS_AS(interpolate(x, -2), InvalidInput);
  }
  SUBCASE("subsampling cannot increase total variation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      LoadProfile x = random_profile(100, 100 + seed);
      for (int k : {2, 4, 8, 16, 32}) {
        LoadProfile y = interpolate(x, k);
        CHECK(total_variation(y.values) <= total_variation(x.values) + 1e-9);
      }
    }
  }
}

TEST_CASE("wavelet compression") {
  SUBCASE("rate bounds") {
    LoadProfile x = random_profile(16, 2);
    CHECK_THROWS_AS(wavelet_compress(x, 0.0), InvalidInput);
    CHECK_THROWS_AS(wavelet_compress(x, 1.0), InvalidInput);
    CHECK_THROWS_AS(wavelet_compress(x, -0.1), InvalidInput);
    CHECK_THROWS_AS(wavelet_compress(x, 1.5), InvalidInput);
  }
  SUBCASE("vanishing rate only drops an exact-zero detail") {
    // Equal adjacent readings on an even boundary put a zero coefficient in
    // the finest band, so zeroing one coefficient reconstructs exactly.
    LoadProfile x({5.0, 5.0, 1.0, 2.0, 3.0, 4.0, 7.0, 8.0}, 8);
    LoadProfile y = wavelet_compress(x, 1e-9);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(y.values[i] == doctest::Approx(x.values[i]).epsilon(1e-9));
  }
  SUBCASE("constants are invariant") {
    LoadProfile x(std::vector<double>(64, 3.25), 8);
    for (double rate : {0.2, 0.5, 0.95}) {
      LoadProfile y = wavelet_compress(x, rate);
      for (double v : y.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
    }
  }
  SUBCASE("zeroing every detail leaves the pairwise mean plateau") {
    std::vector<double> alt(64);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : 3.0;
    LoadProfile y = wavelet_compress(LoadProfile(alt, 8), 0.99);
    for (double v : y.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("reconstruction error grows with the rate") {
    LoadProfile x = random_profile(37, 31);  // exercises the padded branch
    double prev = -1.0;
    for (double rate : {0.2, 0.4, 0.6, 0.8, 0.95}) {
      LoadProfile y = wavelet_compress(x, rate);
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = y.values[i] - x.values[i];
        err += d * d;
      }
      CHECK(err >= prev - 1e-12);
      prev = err;
    }
  }
  SUBCASE("output stays non-negative") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      LoadProfile x = random_profile(50, 200 + seed);
      LoadProfile y = wavelet_compress(x, 0.8);
      for (double v : y.values) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("noise probe") {
  LoadProfile x = random_profile(256, 8);
  SUBCASE("total consumption is preserved") {
    double big = 5.0 * *std::max_element(x.values.begin(), x.values.end());
    LoadProfile y = add_noise(x, big, 99);
    CHECK(std::fabs(sum(y.values) - sum(x.values)) <= 1e-9 * sum(x.values));
    for (double v : y.values) CHECK(v >= 0.0);
  }
  SUBCASE("determinism") {
    CHECK(add_noise(x, 1.0, 5).values == add_noise(x, 1.0, 5).values);
    CHECK(add_noise(x, 1.0, 5).values != add_noise(x, 1.0, 6).values);
  }
  SUBCASE("average deviation grows with amplitude") {
    double sigma = stddev(x.values);
    double small = 0.0, large = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      LoadProfile a = add_noise(x, 0.1 * sigma, 1000 + s);
      LoadProfile b = add_noise(x, 2.0 * sigma, 2000 + s);
      for (std::size_t i = 0; i < x.size(); ++i) {
        small += std::fabs(a.values[i] - x.values[i]);
        large += std::fabs(b.values[i] - x.values[i]);
      }
    }
    CHECK(large > small);
  }
}

TEST_CASE("strongest hiding probe") {
  SUBCASE("keeps the total and forgets the shape") {
    LoadProfile x = random_profile(10000, 77);
    LoadProfile y = best_privacy(x, 0.5, 3);
    CHECK(std::fabs(sum(y.values) - sum(x.values)) <= 1e-9 * sum(x.values));
    CHECK(std::fabs(pearson(y.values, x.values)) < 0.05);
  }
  SUBCASE("vanishing amplitude approaches the flat profile") {
    LoadProfile x = random_profile(64, 4);
    LoadProfile y = best_privacy(x, 1e-12, 1);
    double m = mean(x.values);
    for (double v : y.values) CHECK(v == doctest::Approx(m).epsilon(1e-9));
  }
}
