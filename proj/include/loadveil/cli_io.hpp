#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loadveil/harness.hpp"
#include "loadveil/measures.hpp"
#include "loadveil/profiles.hpp"
#include "loadveil/synth.hpp"

namespace loadveil {

inline constexpr std::string_view kVersion = "0.1.0";

enum class CsvFormat { Long, Wide };

CsvFormat csv_format_from_name(std::string_view name);  // "long" | "wide"

// Profile CSV.  Wide: optional `# freq=<int>` comment, a header row of
// profile ids, one row per reading.  Long: same comment, optional
// `id,index,value` header, rows (profile_id, index, value) with contiguous
// indices per profile.  Negative readings and malformed rows are rejected
// with their row number.
std::vector<LoadProfile> read_profiles(const std::string& path, CsvFormat format);
void write_profiles(const std::string& path, const std::vector<LoadProfile>& profiles);

// "MIi" or "MIi:estimator=1,k=4" -> spec with parameter overrides.
MeasureSpec parse_measure_spec(const std::string& text);

struct ExperimentConfig {
  std::string suite;                        // requirements | consistency | synth-eval |
                                            // freq-sweep | mim-shift | estimator-bench
  std::string profiles = "synth:household50";  // path or synth:household<N>
  std::string format = "wide";
  std::vector<std::string> measures;        // empty -> default working set
  std::vector<double> noise_grid;           // empty -> harness defaults
  std::vector<int> interp_grid;
  std::vector<double> compress_grid;
  std::optional<std::uint64_t> seed;        // required, never defaulted from the clock
  std::string out_dir = "reports";
  std::vector<std::string> formats = {"csv"};
  int threads = 0;
  std::size_t t = 6400;                     // synthetic series length
  int f = 200;                              // stamps per day
  int n_seeds = 10;                         // scenario averaging
  std::vector<int> sweep_f = {4, 8, 20, 40, 100, 200, 400, 800};
  std::vector<std::size_t> shifts = {0, 1, 2, 4, 8, 16, 25};
  std::string sweep_measure = "dR2";
  std::vector<int> bench_k = {1, 2, 4};
  std::vector<int> bench_h = {10, 20};
};

// Flat key=value file, `#` comments.  Unknown keys and malformed values are
// rejected with their line number.  CLI flags are applied on top by the
// caller.
void load_config_file(const std::string& path, ExperimentConfig& cfg);

// FNV-1a over the canonical serialization; equal hashes mean equal tables.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct ReportCell {
  enum class Kind { Text, Number } kind = Kind::Number;
  std::string text;
  double num = 0.0;

  static ReportCell number(double v);
  static ReportCell label(std::string s);
};

struct ReportTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<ReportCell>> rows;
};

struct ReportBundle {
  std::vector<ReportTable> tables;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version{kVersion};
  std::vector<std::string> check_failures;  // empty when all suite bands hold
};

// One file per table per format under dir, written atomically
// (temp + rename).  Human tables carry 6 significant digits; json keeps
// full precision.  Non-finite cells become the "degenerate" marker.
void write_reports(const ReportBundle& bundle, const std::string& dir,
                   const std::vector<std::string>& formats);

// Renders one table as csv | markdown | json text, exactly as written to
// disk.
std::string render_table(const ReportBundle& bundle, const ReportTable& table,
                         const std::string& format);

// Scenario runners (synthetic household, seed-averaged raw measure values).
struct ScenarioRow {
  std::string algo;
  double r2, mii, mim, dr2, ce;
};
std::vector<ScenarioRow> synth_eval(std::size_t t, int f, int n_seeds, std::uint64_t seed,
                                    const SwapMaps& maps);
std::vector<std::pair<int, double>> freq_sweep(MeasureId id, std::span<const int> fs,
                                               std::size_t t, int n_seeds, std::uint64_t seed);
std::vector<std::pair<std::size_t, double>> mim_shift(std::span<const std::size_t> shifts,
                                                      std::size_t t, int f, int n_seeds,
                                                      std::uint64_t seed);

// Builds the evaluation set named by cfg.profiles (synth spec or CSV path).
ProfileSet load_profile_set(const ExperimentConfig& cfg);

// Executes cfg.suite and assembles tables plus suite-specific band checks.
ReportBundle run(const ExperimentConfig& cfg);

}  // namespace loadveil
