#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loadveil/cli_io.hpp"
#include "loadveil/errors.hpp"
#include "loadveil/measures.hpp"
#include "loadveil/synth.hpp"

namespace {

struct CommonFlags {
  loadveil::ExperimentConfig cfg;
  std::string config_path;
  std::uint64_t seed = 0;
  bool check = false;
  CLI::App* sub = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& fl) {
  fl.sub = sub;
  sub->add_option("--config", fl.config_path, "flat key=value config file");
  sub->add_option("--profiles", fl.cfg.profiles, "CSV path or synth:household<N>");
  sub->add_option("--format", fl.cfg.format, "profile CSV layout: long|wide");
  sub->add_option("--measures", fl.cfg.measures, "measure specs, e.g. MIi or MIi:estimator=1")
      ->delimiter(',');
  sub->add_option("--noise-grid", fl.cfg.noise_grid, "noise amplitudes, times std(x)")
      ->delimiter(',');
  sub->add_option("--interp-grid", fl.cfg.interp_grid, "interpolation strides")->delimiter(',');
  sub->add_option("--compress-grid", fl.cfg.compress_grid, "compression rates")->delimiter(',');
  sub->add_option("--seed", fl.seed, "master seed (required)");
  sub->add_option("--out", fl.cfg.out_dir, "report output directory");
  sub->add_option("--formats", fl.cfg.formats, "report formats: csv,markdown,json")
      ->delimiter(',');
  sub->add_option("--threads", fl.cfg.threads, "worker threads (0: LOADVEIL_THREADS or auto)");
  sub->add_option("--T", fl.cfg.t, "synthetic series length");
  sub->add_option("--f", fl.cfg.f, "synthetic stamps per day");
  sub->add_option("--n-seeds", fl.cfg.n_seeds, "seeds averaged in scenario tables");
  sub->add_option("--sweep-f", fl.cfg.sweep_f, "frequencies for freq-sweep")->delimiter(',');
  sub->add_option("--shifts", fl.cfg.shifts, "feature shifts for mim-shift")->delimiter(',');
  sub->add_option("--measure", fl.cfg.sweep_measure, "measure for freq-sweep");
  sub->add_option("--bench-k", fl.cfg.bench_k, "nn neighbor counts for estimator-bench")
      ->delimiter(',');
  sub->add_option("--bench-h", fl.cfg.bench_h, "histogram sizes for estimator-bench")->delimiter(',');
  sub->add_flag("--check", fl.check, "exit 2 when any suite band fails");
}

// Config file first, then CLI flags on top.
loadveil::ExperimentConfig resolve(CommonFlags& fl, const std::string& suite) {
  loadveil::ExperimentConfig cfg;
  if (!fl.config_path.empty()) loadveil::load_config_file(fl.config_path, cfg);
  auto keep = [&](const char* flag, auto member) {
    if (fl.sub->count(flag) > 0) cfg.*member = fl.cfg.*member;
  };
  keep("--profiles", &loadveil::ExperimentConfig::profiles);
  keep("--format", &loadveil::ExperimentConfig::format);
  keep("--measures", &loadveil::ExperimentConfig::measures);
  keep("--noise-grid", &loadveil::ExperimentConfig::noise_grid);
  keep("--interp-grid", &loadveil::ExperimentConfig::interp_grid);
  keep("--compress-grid", &loadveil::ExperimentConfig::compress_grid);
  keep("--out", &loadveil::ExperimentConfig::out_dir);
  keep("--formats", &loadveil::ExperimentConfig::formats);
  keep("--threads", &loadveil::ExperimentConfig::threads);
  keep("--T", &loadveil::ExperimentConfig::t);
  keep("--f", &loadveil::ExperimentConfig::f);
  keep("--n-seeds", &loadveil::ExperimentConfig::n_seeds);
  keep("--sweep-f", &loadveil::ExperimentConfig::sweep_f);
  keep("--shifts", &loadveil::ExperimentConfig::shifts);
  keep("--measure", &loadveil::ExperimentConfig::sweep_measure);
  keep("--bench-k", &loadveil::ExperimentConfig::bench_k);
  keep("--bench-h", &loadveil::ExperimentConfig::bench_h);
  if (fl.sub->count("--seed") > 0) cfg.seed = fl.seed;
  cfg.suite = suite;
  if (!cfg.seed) throw loadveil::InvalidInput("--seed is required (no wall-clock default)");
  return cfg;
}

int run_suite(CommonFlags& fl, const std::string& suite) {
  loadveil::ExperimentConfig cfg = resolve(fl, suite);
  loadveil::ReportBundle bundle = loadveil::run(cfg);
  loadveil::write_reports(bundle, cfg.out_dir, cfg.formats);
  for (const loadveil::ReportTable& t : bundle.tables)
    std::cout << loadveil::render_table(bundle, t, "markdown") << "\n";
  for (const std::string& f : cfg.formats)
    for (const loadveil::ReportTable& t : bundle.tables)
      std::cout << "wrote " << cfg.out_dir << "/" << t.name << "."
                << ((f == "markdown" || f == "md") ? "md" : f) << "\n";
  for (const std::string& msg : bundle.check_failures) std::cout << "check: " << msg << "\n";
  if (fl.check && !bundle.check_failures.empty()) return 2;
  return 0;
}

int list_measures() {
  std::cout << "name,orientation,differences,reconstructed,formula\n";
  for (const loadveil::MeasureInfo& info : loadveil::measure_catalog()) {
    std::cout << info.name << ","
              << (info.orientation == loadveil::Orientation::HigherMorePrivate ? "higher"
                                                                               : "lower")
              << "," << (info.uses_differences ? "yes" : "no") << ","
              << (info.reconstructed ? "yes" : "no") << "," << info.formula << "\n";
  }
  return 0;
}

int eval_one(const std::string& spec_text, const std::string& x_path, const std::string& y_path,
             const std::string& format) {
  loadveil::CsvFormat fmt = loadveil::csv_format_from_name(format);
  loadveil::MeasureSpec spec = loadveil::parse_measure_spec(spec_text);
  loadveil::LoadProfile x = loadveil::read_profiles(x_path, fmt).front();
  loadveil::LoadProfile y = loadveil::read_profiles(y_path, fmt).front();
  loadveil::PrivacyScore score = loadveil::evaluate(spec, x, y);
  std::cout << loadveil::measure_name(score.id) << " value=" << score.value
            << " oriented=" << score.oriented_value;
  if (!score.note.empty()) std::cout << " note=" << score.note;
  std::cout << "\n";
  return 0;
}

int gen_synth(std::size_t n, std::size_t t, int f, std::uint64_t seed, const std::string& out) {
  loadveil::HouseholdSet hs = loadveil::make_household_set(n, t, f, seed);
  loadveil::write_profiles(out, hs.profiles);
  std::cout << "wrote " << hs.profiles.size() << " profiles (T=" << t << ", freq=" << f << ") to "
            << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"load-hiding privacy measure evaluation"};
  app.require_subcommand(1);

  CLI::App* list = app.add_subcommand("list-measures", "print the measure catalog");

  CLI::App* one = app.add_subcommand("measure", "evaluate one measure on two profile files");
  std::string spec_text, x_path, y_path, one_format = "wide";
  one->add_option("--measure", spec_text, "measure spec, e.g. MIi:h=20")->required();
  one->add_option("--x", x_path, "user load CSV")->required();
  one->add_option("--y", y_path, "grid load CSV")->required();
  one->add_option("--format", one_format, "profile CSV layout: long|wide");

  const char* suites[] = {"requirements",  "consistency", "synth-eval",
                          "freq-sweep",    "mim-shift",   "estimator-bench"};
  const char* descs[] = {"requirement battery (AN IN C SY BP1 BP2 LP)",
                         "pairwise rank-correlation matrix of measures",
                         "hiding algorithms A-D on synthetic loads",
                         "one measure against stamps-per-day",
                         "segment-feature misalignment scan",
                         "known-MI estimator error benchmark"};
  std::vector<CommonFlags> flags(6);
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(suites[i], descs[i]), flags[i]);

  CLI::App* synth = app.add_subcommand("synth", "generate and persist a synthetic household set");
  std::size_t synth_n = 50, synth_t = 6400;
  int synth_f = 200;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "profiles.csv";
  synth->add_option("--n", synth_n, "number of profiles");
  synth->add_option("--T", synth_t, "series length");
  synth->add_option("--f", synth_f, "stamps per day");
  synth->add_option("--seed", synth_seed, "master seed (required)")->required();
  synth->add_option("--out", synth_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list->parsed()) return list_measures();
    if (one->parsed()) return eval_one(spec_text, x_path, y_path, one_format);
    if (synth->parsed()) return gen_synth(synth_n, synth_t, synth_f, synth_seed, synth_out);
    for (int i = 0; i < 6; ++i)
      if (flags[i].sub->parsed()) return run_suite(flags[i], suites[i]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
