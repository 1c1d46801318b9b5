#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "loadveil/errors.hpp"
#include "loadveil/harness.hpp"
#include "loadveil/measures.hpp"
#include "loadveil/stats.hpp"
#include "loadveil/synth.hpp"

using namespace loadveil;

namespace {

ProfileSet small_set(std::size_t n = 6, std::uint64_t seed = 3) {
  return ProfileSet(make_household_set(n, 512, 128, seed));
}

OrientedMeasure perturbation_size() {
  OrientedMeasure om;
  om.name = "pert";
  om.eval = [](const LoadProfile& x, const LoadProfile& y, const std::vector<double>&) {
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) s += std::fabs(y.values[t] - x.values[t]);
    return s / static_cast<double>(x.size());
  };
  return om;
}

}  // namespace

TEST_CASE("rank correlation") {
  std::vector<double> up = {1.0, 2.0, 3.0};
  CHECK(spearman(up, std::vector<double>{10.0, 20.0, 30.0}) == doctest::Approx(1.0));
  CHECK(spearman(up, std::vector<double>{3.0, 2.0, 1.0}) == doctest::Approx(-1.0));

  // Average ranks under a tie; cross-checked against the rank formula.
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> b = {1.0, 1.0, 3.0, 4.0};
  CHECK(spearman(a, b) == doctest::Approx(0.9486832980505139).epsilon(1e-12));

  CHECK(spearman(a, std::vector<double>{5.0, 5.0, 5.0, 5.0}) == 0.0);

  CHECK_THROWS_AS(spearman(up, std::vector<double>{1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(spearman(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}),
                  InvalidInput);
}

TEST_CASE("rank correlation significance") {
  SUBCASE("perfectly monotone short series counts two extreme arrangements") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<double> b = {2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    CHECK(spearman_pvalue(a, b) == doctest::Approx(2.0 / 720.0).epsilon(1e-12));
  }
  SUBCASE("exact permutation count on a short series") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<double> b = {2.0, 1.0, 3.0, 5.0, 4.0, 6.0};
    CHECK(spearman(a, b) == doctest::Approx(0.8857142857142858).epsilon(1e-12));
    CHECK(spearman_pvalue(a, b) == doctest::Approx(24.0 / 720.0).epsilon(1e-12));
  }
  SUBCASE("ties collapse the arrangement space uniformly") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> b = {1.0, 1.0, 3.0, 4.0};
    CHECK(spearman_pvalue(a, b) == doctest::Approx(2.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("constant side carries no evidence") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(spearman_pvalue(a, std::vector<double>(5, 7.0)) == 1.0);
  }
  SUBCASE("t reference for longer series") {
    std::vector<double> a = {3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0, 5.5, 3.5, 8.0, 7.0};
    std::vector<double> b = {2.0, 0.5, 5.0, 2.5, 4.0, 8.5, 1.0, 7.0, 6.0, 2.8, 9.0, 6.5};
    CHECK(spearman(a, b) == doctest::Approx(0.9580419580419581).epsilon(1e-12));
    CHECK(spearman_pvalue(a, b) == doctest::Approx(9.5435818268384e-07).epsilon(1e-6));
  }
  SUBCASE("t reference with ties") {
    std::vector<double> a = {1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7};
    std::vector<double> b = {2, 1, 1, 3, 2, 5, 4, 4, 7, 5, 8, 6, 9, 7};
    CHECK(spearman(a, b) == doctest::Approx(0.9131425765341166).epsilon(1e-12));
    CHECK(spearman_pvalue(a, b) == doctest::Approx(5.129733054759653e-06).epsilon(1e-6));
  }
  SUBCASE("needs four observations") {
    CHECK_THROWS_AS(spearman_pvalue(std::vector<double>{1.0, 2.0, 3.0},
                                    std::vector<double>{1.0, 2.0, 3.0}),
                    InvalidInput);
  }
}

TEST_CASE("t distribution") {
  CHECK(student_t_cdf(1.5, 10) == doctest::Approx(0.9177463367772799).epsilon(1e-10));
  CHECK(student_t_cdf(-2.0, 5) == doctest::Approx(0.05096973941492914).epsilon(1e-10));
  CHECK(student_t_cdf(0.0, 7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_cdf(3.2, 18) == doctest::Approx(0.9975187550019964).epsilon(1e-10));
  CHECK(student_t_cdf(-0.7, 3) == doctest::Approx(0.2671634991523818).epsilon(1e-10));
  for (double t : {0.3, 1.1, 2.7}) {
    CHECK(student_t_cdf(t, 9) + student_t_cdf(-t, 9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(student_t_cdf(t, 9) > student_t_cdf(t - 0.1, 9));
  }
  CHECK_THROWS_AS(student_t_cdf(1.0, 0), InvalidInput);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  setenv("LOADVEIL_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  CHECK(resolve_threads(2) == 2);  // explicit request wins
  setenv("LOADVEIL_THREADS", "garbage", 1);
  CHECK(resolve_threads(0) >= 1);
  unsetenv("LOADVEIL_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("profile set validation") {
  std::vector<LoadProfile> one = {LoadProfile({1.0, 2.0}, 2)};
  CHECK_THROWS_AS(ProfileSet{one}, InvalidInput);

  std::vector<LoadProfile> ragged = {LoadProfile({1.0, 2.0}, 2), LoadProfile({1.0, 2.0, 3.0}, 2)};
  CHECK_THROWS_AS(ProfileSet{ragged}, InvalidInput);

  std::vector<LoadProfile> pair = {LoadProfile({1.0, 2.0}, 2), LoadProfile({2.0, 1.0}, 2)};
  CHECK_THROWS_AS(ProfileSet(pair, {{1.0, 2.0}}), InvalidInput);          // one features vector
  CHECK_THROWS_AS(ProfileSet(pair, {{1.0}, {2.0}}), InvalidInput);        // wrong length
  CHECK_NOTHROW(ProfileSet(pair, {{1.0, 2.0}, {1.0, 2.0}}));
}

TEST_CASE("oriented adapter") {
  OrientedMeasure tvd = oriented_measure(MeasureSpec{MeasureId::TVD, {}, {}});
  CHECK(tvd.name == "TVD");
  MeasureSpec nn{MeasureId::MIi, {{"estimator", 1.0}}, {}};
  CHECK(oriented_measure(nn).name == "MIik");

  LoadProfile x({1.0, 2.0, 3.0, 2.0, 1.0, 0.5, 2.5, 3.5}, 4);
  CHECK(tvd.eval(x, x, {}) == 0.0);
  OrientedMeasure r2 = oriented_measure(MeasureSpec{MeasureId::R2, {}, {}});
  CHECK(r2.eval(x, x, {}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("monotonicity experiment") {
  ProfileSet set = small_set(8);
  HarnessConfig cfg;

  SUBCASE("a growing perturbation is detected") {
    MonotonicityResult r = run_monotonicity(perturbation_size(), set, Probe::AddNoise,
                                            cfg.noise_grid, cfg);
    CHECK(r.skipped == 0);
    CHECK(r.mean_rho >= 0.95);
  }
  SUBCASE("a constant measure correlates with nothing") {
    OrientedMeasure flat{"flat", [](const LoadProfile&, const LoadProfile&,
                                    const std::vector<double>&) { return 1.0; }};
    MonotonicityResult r = run_monotonicity(flat, set, Probe::Interpolate,
                                            std::vector<double>{2, 4, 8, 16}, cfg);
    CHECK(r.mean_rho == 0.0);
    CHECK(r.skipped == 0);
  }
  SUBCASE("failing profiles are skipped and counted") {
    OrientedMeasure broken{"broken", [](const LoadProfile&, const LoadProfile&,
                                        const std::vector<double>&) -> double {
                             throw DegenerateInput("nope");
                           }};
    MonotonicityResult r = run_monotonicity(broken, set, Probe::Compress, cfg.compress_grid, cfg);
    CHECK(r.skipped == set.size());
    CHECK(std::isnan(r.mean_rho));
  }
  SUBCASE("grids need at least three levels") {
    CHECK_THROWS_AS(run_monotonicity(perturbation_size(), set, Probe::AddNoise,
                                     std::vector<double>{0.5, 1.0}, cfg),
                    InvalidInput);
  }
  SUBCASE("rank statistics ignore monotone rescaling of the measure") {
    OrientedMeasure tvd = oriented_measure(MeasureSpec{MeasureId::TVD, {}, {}});
    OrientedMeasure exp_tvd{"exp", [&tvd](const LoadProfile& x, const LoadProfile& y,
                                          const std::vector<double>& f) {
                              return std::exp(tvd.eval(x, y, f));
                            }};
    MonotonicityResult a = run_monotonicity(tvd, set, Probe::AddNoise, cfg.noise_grid, cfg);
    MonotonicityResult b = run_monotonicity(exp_tvd, set, Probe::AddNoise, cfg.noise_grid, cfg);
    CHECK(a.mean_rho == b.mean_rho);
  }
}

TEST_CASE("symmetry experiment") {
  ProfileSet set = small_set();
  HarnessConfig cfg;

  SUBCASE("an exactly symmetric measure scores one") {
    OrientedMeasure tvd = oriented_measure(MeasureSpec{MeasureId::TVD, {}, {}});
    SymmetryResult r = run_symmetry(tvd, set, cfg);
    CHECK(r.degenerate == 0);
    CHECK(r.mean_sym == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("a measure that ignores the grid load is flagged") {
    OrientedMeasure first_only{"first", [](const LoadProfile& x, const LoadProfile&,
                                           const std::vector<double>&) {
                                 return mean(x.values);
                               }};
    SymmetryResult r = run_symmetry(first_only, set, cfg);
    CHECK(r.degenerate == set.size());
    CHECK(std::isnan(r.mean_sym));
  }
}

TEST_CASE("best and worst privacy experiments") {
  ProfileSet set = small_set();
  HarnessConfig cfg;
  OrientedMeasure tvd = oriented_measure(MeasureSpec{MeasureId::TVD, {}, {}});
  OrientedMeasure neg{"neg", [&tvd](const LoadProfile& x, const LoadProfile& y,
                                    const std::vector<double>& f) {
                        return -tvd.eval(x, y, f);
                      }};

  MonotonicityResult mono_pos = run_monotonicity(tvd, set, Probe::AddNoise, cfg.noise_grid, cfg);
  MonotonicityResult mono_neg = run_monotonicity(neg, set, Probe::AddNoise, cfg.noise_grid, cfg);

  BestPrivacyResult bp_pos =
      run_best_privacy(tvd, set, cfg.noise_grid, {mono_pos.scores}, cfg);
  BestPrivacyResult bp_neg =
      run_best_privacy(neg, set, cfg.noise_grid, {mono_neg.scores}, cfg);
  CHECK(bp_pos.bp1 >= 0.0);
  CHECK(bp_pos.bp1 <= 1.0);
  CHECK(bp_neg.bp2 <= 0.1);  // flipped orientation pushes the share to zero
  CHECK(bp_pos.bp2 >= bp_neg.bp2);

  double lp_pos = run_worst_privacy(tvd, set, {mono_pos.scores, bp_pos.best_scores}, cfg);
  double lp_neg = run_worst_privacy(neg, set, {mono_neg.scores, bp_neg.best_scores}, cfg);
  CHECK(lp_pos == 1.0);  // distance from x is strictly positive for y != x
  CHECK(lp_neg <= 0.1);

  CHECK_THROWS_AS(run_best_privacy(tvd, set, std::vector<double>{1.0, 2.0, 3.0},
                                   {mono_pos.scores}, cfg),
                  InvalidInput);
}

TEST_CASE("requirement battery assembles all columns") {
  ProfileSet set = small_set();
  HarnessConfig cfg;
  std::vector<MeasureSpec> specs = {MeasureSpec{MeasureId::TVD, {}, {}},
                                    MeasureSpec{MeasureId::MIi, {}, {}}};
  RequirementReport report = run_requirements(specs, set, cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].measure == "TVD");
  CHECK(report.rows[1].measure == "MIi");
  for (const RequirementRow& row : report.rows) {
    CHECK(row.an >= -1.0);
    CHECK(row.an <= 1.0);
    CHECK(row.bp1 >= 0.0);
    CHECK(row.bp1 <= 1.0);
    CHECK(row.bp2 >= 0.0);
    CHECK(row.bp2 <= 1.0);
    CHECK(row.lp >= 0.0);
    CHECK(row.lp <= 1.0);
    CHECK(row.pass_lp == (row.lp >= 0.9 && row.lp <= 1.1));
  }
  CHECK(report.rows[0].lp == 1.0);

  SUBCASE("thread count does not change any number") {
    HarnessConfig one = cfg, four = cfg;
    one.threads = 1;
    four.threads = 4;
    RequirementReport a = run_requirements(specs, set, one);
    RequirementReport b = run_requirements(specs, set, four);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].an == b.rows[i].an);
      CHECK(a.rows[i].in == b.rows[i].in);
      CHECK(a.rows[i].c == b.rows[i].c);
      CHECK(a.rows[i].sy == b.rows[i].sy);
      CHECK(a.rows[i].bp1 == b.rows[i].bp1);
      CHECK(a.rows[i].bp2 == b.rows[i].bp2);
      CHECK(a.rows[i].lp == b.rows[i].lp);
      CHECK(a.rows[i].skipped == b.rows[i].skipped);
    }
  }
}

TEST_CASE("consistency matrix") {
  ProfileSet set = small_set(6, 5);
  HarnessConfig cfg;
  std::vector<MeasureSpec> specs = {MeasureSpec{MeasureId::MIi, {}, {}},
                                    MeasureSpec{MeasureId::CE, {}, {}},
                                    MeasureSpec{MeasureId::TVD, {}, {}}};
  ConsistencyMatrix m = consistency_matrix(specs, set, cfg);
  REQUIRE(m.names.size() == 3);
  REQUIRE(m.rho.size() == 3);

  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m.rho[i][i] == 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m.rho[i][j] == m.rho[j][i]);
      CHECK(m.rho[i][j] >= -1.0 - 1e-12);
      CHECK(m.rho[i][j] <= 1.0 + 1e-12);
    }
  }

  // Shared-grid estimates make the level and conditional-entropy scores
  // rank-identical per anchor.
  CHECK(m.rho[0][1] >= 0.999999);

  CHECK_THROWS_AS(consistency_matrix({specs[0]}, set, cfg), InvalidInput);
}

TEST_CASE("estimator benchmark") {
  std::vector<KnownMiSpec> specs = default_bench_specs();
  REQUIRE(specs.size() == 100);
  CHECK(specs[0].m == 2);
  CHECK(specs[0].epsilon == 0.0);
  CHECK(specs[0].n == 1000);
  CHECK(specs[99].epsilon == 1.0);

  HarnessConfig cfg;
  std::vector<int> ks = {2};
  std::vector<int> hs = {10};
  std::vector<EstimatorBenchRow> rows = estimator_bench(specs, ks, hs, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].config == "nn k=2");
  CHECK(rows[1].config == "hist h=10");
  CHECK(rows[0].median_abs_err <= 0.1);
  CHECK(rows[1].median_abs_err > rows[0].median_abs_err);
  CHECK(rows[0].sd_abs_err >= 0.0);
}
