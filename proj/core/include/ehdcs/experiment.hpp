#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ehdcs/scci.hpp"

namespace ehdcs {

enum class Preset { fig3, fig4, fig5, fig6, table1, table2, fig7, fig8, custom };

const char* to_string(Preset p);
std::optional<Preset> parse_preset(const std::string& text);

struct ModeSet {
  bool cs = true;
  bool dcs = true;
  bool bound = true;
  bool oracle = false;
};

inline constexpr int kCsvSchemaVersion = 1;

// Flat experiment description. A preset fills in defaults; config files and
// command-line flags override individual keys.
struct ExperimentConfig {
  Preset preset = Preset::custom;

  ScciParams scci;  // n, K, s_common, s_innov
  double tau = 1.0;
  std::vector<double> ratios{1.0};      // lambda / lambda_c, one curve each
  std::vector<double> energies{200.0};  // total mean 1/lambda_c + 1/lambda

  // Sweeps over the number of sensors.
  std::vector<int> k_values;
  double k_energy = 300.0;
  int k_s_common = 4;
  int k_s_innov = 1;

  // Sweeps over total sparsity s_c' + s'.
  std::vector<int> sparsity_totals;
  std::vector<double> innov_over_common;  // s' / s_c', one curve each
  int sparsity_total = 6;                 // fixed total for split curves over K

  ModeSet modes;
  long long trials = 10000;
  long long oracle_trials = 100000;
  std::uint64_t seed = 42;
  double threshold = 1e-4;
  double target_pidr = 1e-2;

  // Sensor traces.
  double slot_window = 1.0;                  // seconds of harvesting per slot
  std::vector<double> panel_areas;           // cm^2
  double panel_area = 40.0;                  // cm^2, for sweeps over K
  double power_density_mean = 10.0;          // µW/cm^2, common + innovation
  std::vector<int> motes{2, 3};
  int bits = 8;
  double radio_kbps = 250.0;
  double radio_mw = 62.64;
  int signal_length = 397;
  std::optional<std::filesystem::path> data_path;

  std::filesystem::path out = "results";
  int workers = 0;  // 0: EHDCS_WORKERS or hardware concurrency
  bool gnuplot = true;
  bool use_ledger = true;

  // Line of the config file that set each key (for diagnostics).
  std::map<std::string, int> key_lines;
};

ExperimentConfig preset_config(Preset preset);

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  int line = 0;  // 0 when the value did not come from a file
  std::string key;
  std::string message;
};

std::string format_diagnostic(const Diagnostic& d, const std::string& source = {});

// Applies one `key = value` setting; parse problems are appended to diags.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   int line, std::vector<Diagnostic>& diags);

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
};

// Grammar: one `key = value` per line, '#' starts a comment, lists are
// comma separated, `a:b:step` expands to an inclusive range, fractions and
// `inf` are accepted for ratios. A `preset` key (anywhere) selects the
// defaults the other keys override.
ParsedConfig parse_config(std::istream& in);
ParsedConfig load_config(const std::filesystem::path& path);

// All problems at once; an empty list (or warnings only) means runnable.
std::vector<Diagnostic> validate(const ExperimentConfig& config);
bool has_errors(const std::vector<Diagnostic>& diags);

struct RunOutput {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

// Runs the experiment and writes CSV files (plus gnuplot scripts) into
// config.out. Progress lines go to `log` when given.
RunOutput run(const ExperimentConfig& config, std::ostream* log = nullptr);

// Trace file used by the trace presets: the full dataset when present,
// otherwise the bundled synthetic sample.
struct TraceSource {
  std::filesystem::path file;
  bool synthetic = false;
};
std::optional<TraceSource> locate_traces(const ExperimentConfig& config);

}  // namespace ehdcs
