#include "ehdcs/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ehdcs/analysis.hpp"
#include "ehdcs/dataio.hpp"
#include "ehdcs/energy.hpp"
#include "ehdcs/montecarlo.hpp"
#include "ehdcs/parallel.hpp"
#include "ehdcs/rng.hpp"
#include "json.hpp"

namespace ehdcs {

namespace {

constexpr std::pair<Preset, const char*> kPresetNames[] = {
    {Preset::fig3, "fig3"},     {Preset::fig4, "fig4"},     {Preset::fig5, "fig5"},
    {Preset::fig6, "fig6"},     {Preset::table1, "table1"}, {Preset::table2, "table2"},
    {Preset::fig7, "fig7"},     {Preset::fig8, "fig8"},     {Preset::custom, "custom"},
};

std::vector<double> range(double from, double to, double step) {
  std::vector<double> v;
  for (double x = from; x <= to + 1e-9 * std::abs(step); x += step) v.push_back(x);
  return v;
}

std::vector<int> irange(int from, int to) {
  std::vector<int> v;
  for (int k = from; k <= to; ++k) v.push_back(k);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = lower(trim(raw));
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const auto a = parse_number(s.substr(0, slash));
    const auto b = parse_number(s.substr(slash + 1));
    if (!a || !b || *b == 0.0) return std::nullopt;
    return *a / *b;
  }
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream is(item);
      std::string p;
      while (std::getline(is, p, ':')) parts.push_back(p);
      if (parts.size() != 3) return std::nullopt;
      const auto a = parse_number(parts[0]), b = parse_number(parts[1]), step = parse_number(parts[2]);
      if (!a || !b || !step || !(*step > 0.0) || !std::isfinite(*a) || !std::isfinite(*b)) return std::nullopt;
      for (double x : range(*a, *b, *step)) out.push_back(x);
    } else {
      const auto v = parse_number(item);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
  }
  return out;
}

std::optional<bool> parse_bool(const std::string& raw) {
  const std::string s = lower(trim(raw));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  return std::nullopt;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

const char* to_string(Preset p) {
  for (const auto& [preset, name] : kPresetNames)
    if (preset == p) return name;
  return "custom";
}

std::optional<Preset> parse_preset(const std::string& text) {
  const std::string t = lower(trim(text));
  for (const auto& [preset, name] : kPresetNames)
    if (t == name) return preset;
  return std::nullopt;
}

ExperimentConfig preset_config(Preset preset) {
  ExperimentConfig c;
  c.preset = preset;
  c.scci = ScciParams{50, 2, 4, 1, 1.0};
  c.tau = 1.0;
  switch (preset) {
    case Preset::fig3:
      c.scci.s_common = 5;
      c.ratios = {5.0};
      c.energies = range(5, 150, 5);
      c.k_values = irange(2, 10);
      c.k_energy = 40.0;
      c.k_s_common = 7;
      c.k_s_innov = 1;
      c.modes = {false, false, true, true};
      break;
    case Preset::fig4:
      c.ratios = {0.5, 5.0};
      c.energies = range(100, 500, 50);
      break;
    case Preset::fig5:
      c.ratios = {1.0};
      c.energies = {300.0};
      c.sparsity_totals = {3, 6, 9, 12, 15};
      c.innov_over_common = {0.5, 2.0};
      break;
    case Preset::fig6:
      c.ratios = {1.0};
      c.k_values = irange(2, 10);
      c.k_energy = 300.0;
      c.k_s_common = 4;
      c.k_s_innov = 1;
      c.sparsity_total = 6;
      c.innov_over_common = {0.2, 0.5, 1.0};
      break;
    case Preset::table1:
      c.ratios = {0.0, 0.4, 4.0 / 3.0, std::numeric_limits<double>::infinity()};
      c.energies = {200.0, 300.0};
      break;
    case Preset::table2:
      c.ratios = {1.0, 2.0};
      c.k_values = {2, 5, 8};
      c.modes = {true, true, false, false};
      c.target_pidr = 1e-2;
      break;
    case Preset::fig7:
      c.ratios = {1.0};
      c.panel_areas = range(10, 80, 5);
      c.motes = {2, 3};
      c.trials = 1000;
      c.threshold = 1e-3;
      c.modes = {true, true, false, false};
      break;
    case Preset::fig8:
      c.ratios = {1.0};
      c.k_values = irange(2, 8);
      c.panel_area = 40.0;
      c.motes = {2, 3, 1, 4, 7, 8, 9, 10};
      c.trials = 1000;
      c.threshold = 1e-3;
      c.modes = {true, true, false, false};
      break;
    case Preset::custom:
      break;
  }
  return c;
}

std::string format_diagnostic(const Diagnostic& d, const std::string& source) {
  std::ostringstream os;
  if (!source.empty()) os << source << ':';
  if (d.line > 0) os << d.line << ": ";
  else if (!source.empty()) os << ' ';
  os << (d.severity == Diagnostic::Severity::error ? "error" : "warning");
  if (!d.key.empty()) os << " [" << d.key << ']';
  os << ": " << d.message;
  return os.str();
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value,
                   int line, std::vector<Diagnostic>& diags) {
  const std::string key = lower(trim(raw_key));
  auto bad = [&](const std::string& msg) {
    diags.push_back({Diagnostic::Severity::error, line, key, msg + " (got '" + trim(value) + "')"});
  };
  auto set_int = [&](auto& field) {
    if (auto v = parse_integer(value)) field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
    else bad("expected an integer");
  };
  auto set_double = [&](double& field) {
    if (auto v = parse_number(value)) field = *v;
    else bad("expected a number");
  };
  auto set_doubles = [&](std::vector<double>& field) {
    if (auto v = parse_list(value)) field = *v;
    else bad("expected a comma-separated list of numbers or a:b:step ranges");
  };
  auto set_ints = [&](std::vector<int>& field) {
    auto v = parse_list(value);
    if (!v) return bad("expected a comma-separated list of integers or a:b:step ranges");
    std::vector<int> out;
    for (double x : *v) {
      if (x != std::floor(x) || !std::isfinite(x)) return bad("expected integers");
      out.push_back(static_cast<int>(x));
    }
    field = out;
  };

  c.key_lines[key] = line;
  if (key == "preset") {
    if (!parse_preset(value)) bad("unknown preset; expected fig3..fig8, table1, table2 or custom");
  } else if (key == "n") set_int(c.scci.n);
  else if (key == "k") set_int(c.scci.K);
  else if (key == "s_common") set_int(c.scci.s_common);
  else if (key == "s_innov") set_int(c.scci.s_innov);
  else if (key == "value_scale") set_double(c.scci.value_scale);
  else if (key == "tau") set_double(c.tau);
  else if (key == "ratios") set_doubles(c.ratios);
  else if (key == "energies") set_doubles(c.energies);
  else if (key == "k_values") set_ints(c.k_values);
  else if (key == "k_energy") set_double(c.k_energy);
  else if (key == "k_s_common") set_int(c.k_s_common);
  else if (key == "k_s_innov") set_int(c.k_s_innov);
  else if (key == "sparsity_totals") set_ints(c.sparsity_totals);
  else if (key == "innov_over_common") set_doubles(c.innov_over_common);
  else if (key == "sparsity_total") set_int(c.sparsity_total);
  else if (key == "modes") {
    ModeSet m{false, false, false, false};
    std::stringstream ss(value);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
      const std::string t = lower(trim(item));
      if (t.empty()) continue;
      any = true;
      if (t == "cs") m.cs = true;
      else if (t == "dcs") m.dcs = true;
      else if (t == "bound") m.bound = true;
      else if (t == "oracle") m.oracle = true;
      else return bad("unknown mode '" + t + "'; expected cs, dcs, bound or oracle");
    }
    if (!any) return bad("modes must name at least one of cs, dcs, bound, oracle");
    c.modes = m;
  } else if (key == "trials") set_int(c.trials);
  else if (key == "oracle_trials") set_int(c.oracle_trials);
  else if (key == "seed") {
    const std::string t = trim(value);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad("expected a non-negative integer");
    else c.seed = v;
  } else if (key == "threshold") set_double(c.threshold);
  else if (key == "target_pidr") set_double(c.target_pidr);
  else if (key == "slot_window") set_double(c.slot_window);
  else if (key == "panel_areas") set_doubles(c.panel_areas);
  else if (key == "panel_area") set_double(c.panel_area);
  else if (key == "power_density_mean") set_double(c.power_density_mean);
  else if (key == "motes") set_ints(c.motes);
  else if (key == "bits") set_int(c.bits);
  else if (key == "radio_kbps") set_double(c.radio_kbps);
  else if (key == "radio_mw") set_double(c.radio_mw);
  else if (key == "signal_length") set_int(c.signal_length);
  else if (key == "data_path") c.data_path = std::filesystem::path(trim(value));
  else if (key == "out") c.out = std::filesystem::path(trim(value));
  else if (key == "workers") set_int(c.workers);
  else if (key == "gnuplot") {
    if (auto b = parse_bool(value)) c.gnuplot = *b;
    else bad("expected true or false");
  } else if (key == "ledger") {
    if (auto b = parse_bool(value)) c.use_ledger = *b;
    else bad("expected true or false");
  } else {
    c.key_lines.erase(key);
    diags.push_back({Diagnostic::Severity::error, line, key, "unknown key"});
  }
}

ParsedConfig parse_config(std::istream& in) {
  struct Entry {
    std::string key, value;
    int line;
  };
  std::vector<Entry> entries;
  ParsedConfig out;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    if (trim(text).empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      out.diagnostics.push_back({Diagnostic::Severity::error, line, {}, "expected 'key = value'"});
      continue;
    }
    const std::string key = lower(trim(text.substr(0, eq)));
    if (key.empty()) {
      out.diagnostics.push_back({Diagnostic::Severity::error, line, {}, "missing key before '='"});
      continue;
    }
    entries.push_back({key, text.substr(eq + 1), line});
  }
  Preset preset = Preset::custom;
  for (const auto& e : entries)
    if (e.key == "preset")
      if (auto p = parse_preset(e.value)) preset = *p;
  out.config = preset_config(preset);
  for (const auto& e : entries) apply_setting(out.config, e.key, e.value, e.line, out.diagnostics);
  return out;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ParsedConfig p;
    p.diagnostics.push_back({Diagnostic::Severity::error, 0, {}, "cannot read config file " + path.string()});
    return p;
  }
  return parse_config(in);
}

std::optional<TraceSource> locate_traces(const ExperimentConfig& config) {
  const auto dir = resolve_data_dir(config.data_path);
  std::error_code ec;
  if (std::filesystem::is_regular_file(dir, ec)) return TraceSource{dir, false};
  if (auto full = find_full_dataset(dir)) return TraceSource{*full, false};
  const auto local = dir / bundled_sample_path().filename();
  if (std::filesystem::is_regular_file(local, ec)) return TraceSource{local, true};
  return std::nullopt;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto line_of = [&](const std::string& key) {
    auto it = c.key_lines.find(key);
    return it == c.key_lines.end() ? 0 : it->second;
  };
  auto error = [&](const std::string& key, const std::string& msg) {
    d.push_back({Diagnostic::Severity::error, line_of(key), key, msg});
  };
  auto warning = [&](const std::string& key, const std::string& msg) {
    d.push_back({Diagnostic::Severity::warning, line_of(key), key, msg});
  };
  const bool traces = c.preset == Preset::fig7 || c.preset == Preset::fig8;

  if (c.trials < 1) error("trials", "trials must be >= 1");
  if (c.modes.oracle && c.oracle_trials < 1) error("oracle_trials", "oracle_trials must be >= 1");
  if (c.scci.n < 1) error("n", "n must be >= 1");
  if (c.scci.K < 1) error("k", "K must be >= 1");
  if (c.scci.s_common < 0 || c.scci.s_common > c.scci.n) error("s_common", "s_common must lie in [0, n]");
  if (c.scci.s_innov < 0 || c.scci.s_innov > c.scci.n) error("s_innov", "s_innov must lie in [0, n]");
  if (!(c.scci.value_scale > 0.0)) error("value_scale", "value_scale must be > 0");
  if (!(c.tau >= 0.0) || std::isinf(c.tau)) error("tau", "tau must be finite and >= 0");
  if (!(c.threshold > 0.0)) error("threshold", "threshold must be > 0");
  if (c.workers < 0) error("workers", "workers must be >= 0 (0 = automatic)");
  if (!c.modes.cs && !c.modes.dcs && !c.modes.bound && !c.modes.oracle)
    error("modes", "no mode selected");
  if (c.ratios.empty()) error("ratios", "ratio sweep is empty");
  for (double r : c.ratios)
    if (!(r >= 0.0)) error("ratios", "ratios lambda/lambda_c must be >= 0 (inf allowed)");

  const bool energy_axis = c.preset == Preset::fig3 || c.preset == Preset::fig4 ||
                           c.preset == Preset::table1 || c.preset == Preset::custom ||
                           c.preset == Preset::fig5;
  if (energy_axis) {
    if (c.energies.empty()) error("energies", "energy sweep is empty");
    for (double e : c.energies)
      if (!(e > 0.0) || std::isinf(e)) error("energies", "mean energies must be finite and > 0");
  }
  const bool k_axis = c.preset == Preset::fig3 || c.preset == Preset::fig6 ||
                      c.preset == Preset::table2 || c.preset == Preset::fig8;
  if (k_axis) {
    if (c.k_values.empty()) error("k_values", "K sweep is empty");
    for (int k : c.k_values)
      if (k < 1 || k > kMaxEnumeratedSensors)
        error("k_values", "K values must lie in [1, " + std::to_string(kMaxEnumeratedSensors) + "]");
    if (!(c.k_energy > 0.0)) error("k_energy", "k_energy must be > 0");
  }
  if (c.preset == Preset::fig5) {
    if (c.sparsity_totals.empty()) error("sparsity_totals", "sparsity sweep is empty");
    for (int s : c.sparsity_totals)
      if (s < 1 || s > c.scci.n) error("sparsity_totals", "totals must lie in [1, n]");
  }
  if (c.preset == Preset::fig5 || c.preset == Preset::fig6)
    for (double r : c.innov_over_common)
      if (!(r > 0.0) || std::isinf(r)) error("innov_over_common", "ratios s'/s_c' must be finite and > 0");
  if (c.preset == Preset::table2 && !(c.target_pidr > 0.0 && c.target_pidr < 1.0))
    error("target_pidr", "target_pidr must lie in (0, 1)");
  if (c.preset == Preset::table2 && c.modes.oracle)
    warning("modes", "oracle is ignored by the table2 preset");

  if (traces) {
    if (c.panel_areas.empty() && c.preset == Preset::fig7) error("panel_areas", "panel sweep is empty");
    for (double a : c.panel_areas)
      if (!(a >= 0.0) || std::isinf(a)) error("panel_areas", "panel areas must be finite and >= 0");
    if (!(c.slot_window > 0.0)) error("slot_window", "slot_window must be > 0");
    if (!(c.power_density_mean > 0.0)) error("power_density_mean", "power_density_mean must be > 0");
    if (c.bits < 0 || c.bits > 31) error("bits", "bits must lie in [0, 31]");
    if (!(c.radio_kbps > 0.0) || !(c.radio_mw > 0.0)) error("radio_kbps", "radio parameters must be > 0");
    if (c.signal_length < 1) error("signal_length", "signal_length must be >= 1");
    if (c.motes.empty()) error("motes", "no motes selected");
    if (c.preset == Preset::fig8)
      for (int k : c.k_values)
        if (k > static_cast<int>(c.motes.size()))
          error("k_values", "K = " + std::to_string(k) + " exceeds the number of listed motes");
    if (c.modes.bound || c.modes.oracle) warning("modes", "bound and oracle are not computed for trace presets");
    if (!locate_traces(c))
      error("data_path", "no trace file found in '" + resolve_data_dir(c.data_path).string() +
                             "'; pass --data-path, set " + kDataDirEnv + ", or run `ehdcs fetch-data`");
  }

  // The closed-form bounds assume sum(lambda_k) != lambda_c.
  if (c.modes.bound && !traces) {
    auto check = [&](double energy, double ratio, int K, const std::string& key) {
      if (!(energy > 0.0) || !(ratio >= 0.0) || K < 1) return;
      if (std::isinf(ratio) || ratio == 0.0) return;
      // from_total already separates coincident rates, so test the raw means.
      EhParams eh;
      eh.lambda_c = (ratio + 1.0) / (energy * ratio);
      eh.lambdas.assign(static_cast<std::size_t>(K), (ratio + 1.0) / energy);
      eh.tau = c.tau;
      for (const auto& msg : eh.diagnostics()) {
        std::ostringstream os;
        os << "E=" << fmt(energy) << ", ratio=" << fmt(ratio) << ", K=" << K << ": " << msg
           << "; bounds use the repeated-rate evaluation";
        warning(key, os.str());
      }
    };
    for (double r : c.ratios) {
      if (energy_axis)
        for (double e : c.energies) check(e, r, c.scci.K, "ratios");
      if (k_axis)
        for (int k : c.k_values) check(c.k_energy, r, k, "ratios");
    }
  }
  return d;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
}

namespace {

struct Table {
  std::vector<std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::filesystem::path write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& m : t.meta) out << "# " << m << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
  return path;
}

std::filesystem::path write_gnuplot(const std::filesystem::path& csv, const std::string& x,
                                    const std::vector<std::string>& ys, bool logy) {
  auto gp = csv;
  gp.replace_extension(".gp");
  std::ofstream out(gp);
  if (!out) throw std::runtime_error("cannot write " + gp.string());
  out << "set datafile separator ','\nset key autotitle columnhead\n";
  out << "set xlabel '" << x << "'\nset ylabel 'PIDR'\n";
  if (logy) out << "set logscale y\n";
  out << "plot ";
  for (std::size_t i = 0; i < ys.size(); ++i)
    out << (i ? ", \\\n     " : "") << "'" << csv.filename().string() << "' using \"" << x << "\":\"" << ys[i]
        << "\" with linespoints title '" << ys[i] << "'";
  out << "\npause mouse close\n";
  return gp;
}

std::vector<std::string> common_meta(const ExperimentConfig& c, const std::string& what) {
  std::vector<std::string> m;
  m.push_back("ehdcs " + what);
  m.push_back(std::string("preset=") + to_string(c.preset) + " seed=" + std::to_string(c.seed) +
              " trials=" + std::to_string(c.trials) + " threshold=" + fmt(c.threshold));
  return m;
}

struct Runner {
  const ExperimentConfig& c;
  std::ostream* log;
  int workers;
  std::unique_ptr<CampaignLedger> ledger;
  RunOutput out;

  Runner(const ExperimentConfig& config, std::ostream* l)
      : c(config), log(l), workers(config.workers > 0 ? config.workers : default_workers()) {
    std::filesystem::create_directories(c.out);
    if (c.use_ledger) ledger = std::make_unique<CampaignLedger>(c.out / "campaigns.csv");
  }

  void note(const std::string& s) {
    if (log) *log << s << std::endl;
  }

  void emit(const std::string& name, const Table& t, const std::string& x, const std::vector<std::string>& ys) {
    const auto path = write_table(c.out / (name + ".csv"), t);
    out.files.push_back(path);
    if (c.gnuplot && !ys.empty()) out.files.push_back(write_gnuplot(path, x, ys, true));
  }

  CampaignConfig campaign(const ScciParams& scci, const EhParams& eh, RecoveryMode mode) const {
    CampaignConfig cc;
    cc.scci = scci;
    cc.eh = eh;
    cc.mode = mode;
    cc.trials = c.trials;
    cc.seed = c.seed;
    cc.workers = workers;
    cc.threshold = c.threshold;
    return cc;
  }

  // Columns and values for one synthetic operating point.
  struct Point {
    std::vector<std::string> columns;
    std::vector<std::string> values;
  };

  Point evaluate(const ScciParams& scci, const EhParams& eh) {
    Point p;
    auto add = [&](const std::string& col, const std::string& v) {
      p.columns.push_back(col);
      p.values.push_back(v);
    };
    for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
      if ((mode == RecoveryMode::cs && !c.modes.cs) || (mode == RecoveryMode::dcs && !c.modes.dcs)) continue;
      const PidrEstimate e = run_campaign_cached(campaign(scci, eh, mode), ledger.get());
      const std::string m = to_string(mode);
      add(m + "_pidr", fmt(e.pidr));
      add(m + "_ci_low", fmt(e.ci95.low));
      add(m + "_ci_high", fmt(e.ci95.high));
      add(m + "_solver_failures", std::to_string(e.solver_failures));
    }
    if (c.modes.bound) {
      const int s = scci.s_common + scci.s_innov;
      const BoundReport b = bound_report(eh, s, scci.s_common, scci.s_innov, scci.K);
      add("cs_bound", fmt(b.cs_bound));
      add("dcs_bound", fmt(b.dcs_bound));
    }
    if (c.modes.oracle) {
      for (OracleMode m : {OracleMode::cs, OracleMode::dcs}) {
        OracleOptions o;
        o.mode = m;
        o.workers = workers;
        const PidrEstimate e = oracle_pidr(scci, eh, c.oracle_trials, c.seed, o);
        const std::string name = m == OracleMode::cs ? "cs_oracle" : "dcs_oracle";
        add(name, fmt(e.pidr));
        add(name + "_ci_high", fmt(e.ci95.high));
      }
    }
    return p;
  }

  static std::vector<std::string> plotted(const std::vector<std::string>& cols) {
    std::vector<std::string> ys;
    for (const auto& col : cols)
      if (col.ends_with("_pidr") || col.ends_with("_bound") || col.ends_with("_oracle")) ys.push_back(col);
    return ys;
  }

  // Generic sweep: `points` yields (x value, scci, eh) triples.
  void sweep(const std::string& name, const std::string& x_name, const std::vector<std::string>& extra_meta,
             const std::vector<std::tuple<std::string, ScciParams, EhParams>>& points) {
    Table t;
    t.meta = common_meta(c, name);
    t.meta.insert(t.meta.end(), extra_meta.begin(), extra_meta.end());
    t.meta.push_back("columns: *_pidr empirical PIDR with Wilson 95% interval *_ci_low/*_ci_high; "
                     "*_bound analytic lower bound; *_oracle recovery-condition Monte Carlo");
    for (const auto& [x, scci, eh] : points) {
      note(name + ": " + x_name + "=" + x);
      const Point p = evaluate(scci, eh);
      if (t.columns.empty()) {
        t.columns = {"schema_version", x_name};
        t.columns.insert(t.columns.end(), p.columns.begin(), p.columns.end());
      }
      std::vector<std::string> row{std::to_string(kCsvSchemaVersion), x};
      row.insert(row.end(), p.values.begin(), p.values.end());
      t.rows.push_back(row);
    }
    emit(name, t, x_name, plotted(t.columns));
    out.summary += "wrote " + name + ".csv (" + std::to_string(t.rows.size()) + " points)\n";
  }

  std::vector<std::tuple<std::string, ScciParams, EhParams>> energy_points(const ScciParams& scci, double ratio) {
    std::vector<std::tuple<std::string, ScciParams, EhParams>> pts;
    for (double e : c.energies) pts.emplace_back(fmt(e), scci, EhParams::from_total(e, ratio, scci.K, c.tau));
    return pts;
  }

  std::vector<std::tuple<std::string, ScciParams, EhParams>> k_points(ScciParams scci, double ratio) {
    std::vector<std::tuple<std::string, ScciParams, EhParams>> pts;
    for (int k : c.k_values) {
      scci.K = k;
      pts.emplace_back(std::to_string(k), scci, EhParams::from_total(c.k_energy, ratio, k, c.tau));
    }
    return pts;
  }

  static std::pair<int, int> split(int total, double innov_over_common) {
    const int sc = static_cast<int>(std::lround(total / (1.0 + innov_over_common)));
    return {sc, total - sc};
  }

  std::string ratio_tag(double r) const {
    std::string s = fmt(r);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
  }

  void run_energy_curves(const std::string& prefix) {
    for (double r : c.ratios)
      sweep(prefix + "_ratio_" + ratio_tag(r), "mean_energy",
            {"K=" + std::to_string(c.scci.K) + " n=" + std::to_string(c.scci.n) +
             " s_common=" + std::to_string(c.scci.s_common) + " s_innov=" + std::to_string(c.scci.s_innov) +
             " tau=" + fmt(c.tau) + " ratio=" + fmt(r)},
            energy_points(c.scci, r));
  }

  void run_k_curve(const std::string& name, int s_common, int s_innov, double ratio) {
    ScciParams scci = c.scci;
    scci.s_common = s_common;
    scci.s_innov = s_innov;
    sweep(name, "K",
          {"n=" + std::to_string(scci.n) + " s_common=" + std::to_string(s_common) +
           " s_innov=" + std::to_string(s_innov) + " mean_energy=" + fmt(c.k_energy) + " ratio=" + fmt(ratio) +
           " tau=" + fmt(c.tau)},
          k_points(scci, ratio));
  }

  void fig3() {
    run_energy_curves("fig3_energy");
    for (double r : c.ratios) run_k_curve("fig3_k_ratio_" + ratio_tag(r), c.k_s_common, c.k_s_innov, r);
  }

  void fig5() {
    for (double r : c.ratios)
      for (double q : c.innov_over_common) {
        std::vector<std::tuple<std::string, ScciParams, EhParams>> pts;
        for (int total : c.sparsity_totals) {
          ScciParams scci = c.scci;
          std::tie(scci.s_common, scci.s_innov) = split(total, q);
          for (double e : c.energies)
            pts.emplace_back(std::to_string(total), scci, EhParams::from_total(e, r, scci.K, c.tau));
        }
        sweep("fig5_innov_over_common_" + ratio_tag(q) + "_ratio_" + ratio_tag(r), "total_sparsity",
              {"K=" + std::to_string(c.scci.K) + " mean_energy=" + fmt(c.energies.front()) + " ratio=" + fmt(r) +
               " s_innov/s_common=" + fmt(q)},
              pts);
      }
  }

  void fig6() {
    for (double r : c.ratios) {
      run_k_curve("fig6_k_ratio_" + ratio_tag(r), c.k_s_common, c.k_s_innov, r);
      for (double q : c.innov_over_common) {
        const auto [sc, si] = split(c.sparsity_total, q);
        run_k_curve("fig6_k_split_" + std::to_string(si) + "_" + std::to_string(sc) + "_ratio_" + ratio_tag(r),
                    sc, si, r);
      }
    }
  }

  void table1() {
    Table t;
    t.meta = common_meta(c, "table1");
    t.meta.push_back("K=" + std::to_string(c.scci.K) + " n=" + std::to_string(c.scci.n) +
                     " s_common=" + std::to_string(c.scci.s_common) + " s_innov=" + std::to_string(c.scci.s_innov) +
                     " tau=" + fmt(c.tau));
    t.columns = {"schema_version", "mode", "mean_energy", "ratio", "pidr", "ci_low", "ci_high", "solver_failures"};
    if (c.modes.bound) t.columns.push_back("bound");
    for (double e : c.energies)
      for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
        if ((mode == RecoveryMode::cs && !c.modes.cs) || (mode == RecoveryMode::dcs && !c.modes.dcs)) continue;
        for (double r : c.ratios) {
          note("table1: " + std::string(to_string(mode)) + " E=" + fmt(e) + " ratio=" + fmt(r));
          const EhParams eh = EhParams::from_total(e, r, c.scci.K, c.tau);
          const PidrEstimate est = run_campaign_cached(campaign(c.scci, eh, mode), ledger.get());
          std::vector<std::string> row{std::to_string(kCsvSchemaVersion), to_string(mode), fmt(e), fmt(r),
                                       fmt(est.pidr), fmt(est.ci95.low), fmt(est.ci95.high),
                                       std::to_string(est.solver_failures)};
          if (c.modes.bound) {
            const int s = c.scci.s_common + c.scci.s_innov;
            const BoundReport b = bound_report(eh, s, c.scci.s_common, c.scci.s_innov, c.scci.K);
            row.push_back(fmt(mode == RecoveryMode::cs ? b.cs_bound : b.dcs_bound));
          }
          t.rows.push_back(row);
          out.summary += std::string(to_string(mode)) + " E=" + fmt(e) + " ratio=" + fmt(r) +
                         " pidr=" + fmt(est.pidr) + "\n";
        }
      }
    emit("table1", t, "", {});
  }

  void table2() {
    Table grid, detail;
    grid.meta = common_meta(c, "table2 grid: mean energy per sensor for the target PIDR");
    grid.meta.push_back("target_pidr=" + fmt(c.target_pidr) + " n=" + std::to_string(c.scci.n) +
                        " s_common=" + std::to_string(c.scci.s_common) + " s_innov=" + std::to_string(c.scci.s_innov) +
                        " tau=" + fmt(c.tau) + "; nan marks an unreachable target");
    detail.meta = common_meta(c, "table2 probes");
    grid.columns = {"schema_version", "K"};
    std::vector<RecoveryMode> modes;
    if (c.modes.cs) modes.push_back(RecoveryMode::cs);
    if (c.modes.dcs) modes.push_back(RecoveryMode::dcs);
    for (double r : c.ratios)
      for (RecoveryMode m : modes) grid.columns.push_back(std::string(to_string(m)) + "_ratio_" + ratio_tag(r));
    detail.columns = {"schema_version", "K", "mode", "ratio", "mean_energy", "pidr", "ci_low", "ci_high", "selected"};
    for (int k : c.k_values) {
      std::vector<std::string> row{std::to_string(kCsvSchemaVersion), std::to_string(k)};
      for (double r : c.ratios)
        for (RecoveryMode m : modes) {
          note("table2: K=" + std::to_string(k) + " " + to_string(m) + " ratio=" + fmt(r));
          ScciParams scci = c.scci;
          scci.K = k;
          CampaignConfig base = campaign(scci, EhParams::from_total(100.0, r, k, c.tau), m);
          try {
            const TargetSearchResult res = energy_for_target(base, r, c.target_pidr);
            row.push_back(fmt(res.energy));
            for (const auto& p : res.probes)
              detail.rows.push_back({std::to_string(kCsvSchemaVersion), std::to_string(k), to_string(m), fmt(r),
                                     fmt(p.energy), fmt(p.estimate.pidr), fmt(p.estimate.ci95.low),
                                     fmt(p.estimate.ci95.high), p.energy == res.energy ? "1" : "0"});
            out.summary += "K=" + std::to_string(k) + " " + to_string(m) + " ratio=" + fmt(r) +
                           " energy=" + fmt(res.energy) + "\n";
          } catch (const std::runtime_error& e) {
            row.push_back("nan");
            out.summary += std::string("unreachable: ") + e.what() + "\n";
          }
        }
      grid.rows.push_back(row);
    }
    emit("table2", grid, "", {});
    emit("table2_probes", detail, "", {});
  }

  // Sensor-trace experiments.
  struct Signals {
    std::vector<std::vector<Vector>> windows;
    BasisPtr basis;
    bool synthetic = false;
    std::filesystem::path file;
  };

  Signals load_signals(const std::vector<int>& motes) {
    const auto src = locate_traces(c);
    if (!src)
      throw std::runtime_error("no trace file found; pass --data-path or set " + std::string(kDataDirEnv));
    const TraceSet set = load_traces(src->file, motes);
    note("loaded " + src->file.string() + ": " + std::to_string(set.report.lines) + " lines, " +
         std::to_string(set.report.malformed) + " malformed, " + std::to_string(set.report.out_of_range) +
         " out of range, " + std::to_string(set.report.duplicates) + " duplicate epochs");
    Signals s;
    s.synthetic = src->synthetic;
    s.file = src->file;
    s.basis = std::make_shared<const Matrix>(dct_basis(c.signal_length));
    for (long long start : aligned_window_starts(set.traces, c.signal_length)) {
      SegmentOptions so;
      so.start_epoch = start;
      std::vector<Vector> w;
      for (const auto& seg : segment_aligned(set.traces, c.signal_length, so)) w.push_back(seg.samples);
      s.windows.push_back(std::move(w));
    }
    if (s.windows.empty()) segment_aligned(set.traces, c.signal_length);  // throws with coverage details
    return s;
  }

  PidrEstimate signal_point(const Signals& s, double area, double ratio, RecoveryMode mode) {
    const int K = static_cast<int>(s.windows.front().size());
    const double tau = tau_per_measurement(c.radio_kbps, c.radio_mw, c.bits > 0 ? c.bits : 8);
    const double mean_energy = solar_slot_energy(area, c.power_density_mean, c.slot_window);
    SignalCampaignConfig sc;
    sc.windows = s.windows;
    sc.basis = s.basis;
    sc.eh = EhParams::from_total(mean_energy, ratio, K, tau);
    sc.mode = mode;
    sc.trials = c.trials;
    sc.seed = c.seed;
    sc.workers = workers;
    sc.bits = c.bits;
    sc.threshold = c.threshold;
    return run_signal_campaign(sc);
  }

  std::vector<std::string> signal_meta(const Signals& s, const std::string& name) {
    auto m = common_meta(c, name);
    m.push_back("trace file " + s.file.filename().string() + (s.synthetic ? " (synthetic stand-in, not measured data)" : "") +
                ", " + std::to_string(s.windows.size()) + " aligned windows of " + std::to_string(c.signal_length) +
                " samples");
    m.push_back("power_density_mean=" + fmt(c.power_density_mean) + " uW/cm^2 slot_window=" + fmt(c.slot_window) +
                " s bits=" + std::to_string(c.bits) + " tau=" +
                fmt(tau_per_measurement(c.radio_kbps, c.radio_mw, c.bits > 0 ? c.bits : 8)) + " uJ");
    return m;
  }

  std::vector<RecoveryMode> recovery_modes() const {
    std::vector<RecoveryMode> m;
    if (c.modes.cs) m.push_back(RecoveryMode::cs);
    if (c.modes.dcs) m.push_back(RecoveryMode::dcs);
    return m;
  }

  void signal_columns(Table& t, const std::string& x) const {
    t.columns = {"schema_version", x};
    for (RecoveryMode mode : recovery_modes())
      for (const char* suffix : {"_pidr", "_ci_low", "_ci_high"}) t.columns.push_back(to_string(mode) + std::string(suffix));
  }

  void signal_row(Table& t, const std::string& x, const Signals& s, double area, double ratio) {
    std::vector<std::string> row{std::to_string(kCsvSchemaVersion), x};
    for (RecoveryMode mode : recovery_modes()) {
      const PidrEstimate e = signal_point(s, area, ratio, mode);
      row.insert(row.end(), {fmt(e.pidr), fmt(e.ci95.low), fmt(e.ci95.high)});
    }
    t.rows.push_back(row);
  }

  void fig7() {
    const Signals s = load_signals(c.motes);
    for (double r : c.ratios) {
      const std::string name = "fig7_ratio_" + ratio_tag(r);
      Table t;
      t.meta = signal_meta(s, name);
      signal_columns(t, "panel_area_cm2");
      for (double a : c.panel_areas) {
        note(name + ": area=" + fmt(a));
        signal_row(t, fmt(a), s, a, r);
      }
      emit(name, t, "panel_area_cm2", plotted(t.columns));
      out.summary += "wrote " + name + ".csv\n";
    }
  }

  void fig8() {
    for (double r : c.ratios) {
      const std::string name = "fig8_ratio_" + ratio_tag(r);
      Table t;
      signal_columns(t, "K");
      for (int k : c.k_values) {
        note(name + ": K=" + std::to_string(k));
        const Signals s = load_signals(std::vector<int>(c.motes.begin(), c.motes.begin() + k));
        if (t.meta.empty()) t.meta = signal_meta(s, name + " panel_area=" + fmt(c.panel_area) + " cm^2");
        signal_row(t, std::to_string(k), s, c.panel_area, r);
      }
      emit(name, t, "K", plotted(t.columns));
      out.summary += "wrote " + name + ".csv\n";
    }
  }

  void custom_debug() {
    nlohmann::json dump = nlohmann::json::array();
    for (double r : c.ratios)
      for (double e : c.energies)
        for (RecoveryMode mode : {RecoveryMode::cs, RecoveryMode::dcs}) {
          if ((mode == RecoveryMode::cs && !c.modes.cs) || (mode == RecoveryMode::dcs && !c.modes.dcs)) continue;
          CampaignConfig cc = campaign(c.scci, EhParams::from_total(e, r, c.scci.K, c.tau), mode);
          const TrialOutcome o = run_trial(cc, 0);
          const ScciEnsemble ens =
              generate_ensemble(c.scci, identity_basis(c.scci.n), derive_seed(c.seed, 0, streams::ensemble));
          nlohmann::json j;
          j["mode"] = to_string(mode);
          j["mean_energy"] = e;
          j["ratio"] = std::isinf(r) ? nlohmann::json("inf") : nlohmann::json(r);
          j["budgets"] = o.budgets;
          nlohmann::json errs = nlohmann::json::array();
          for (double x : o.rel_err) errs.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
          j["relative_errors"] = errs;
          j["solver_failures"] = o.solver_failures;
          j["success"] = o.success;
          j["ensemble"] = nlohmann::json::parse(ensemble_to_json(ens));
          dump.push_back(j);
          out.summary += std::string(to_string(mode)) + " E=" + fmt(e) + " ratio=" + fmt(r) + " budgets=" +
                         nlohmann::json(o.budgets).dump() + (o.success ? " success\n" : " failure\n");
        }
    const auto path = c.out / "custom_debug.json";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << dump.dump(2) << '\n';
    out.files.push_back(path);
  }
};

}  // namespace

RunOutput run(const ExperimentConfig& config, std::ostream* log) {
  const auto diags = validate(config);
  if (has_errors(diags)) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& d : diags)
      if (d.severity == Diagnostic::Severity::error) os << "\n  " << format_diagnostic(d);
    throw std::invalid_argument(os.str());
  }
  Runner r(config, log);
  switch (config.preset) {
    case Preset::fig3: r.fig3(); break;
    case Preset::fig4: r.run_energy_curves("fig4"); break;
    case Preset::fig5: r.fig5(); break;
    case Preset::fig6: r.fig6(); break;
    case Preset::table1: r.table1(); break;
    case Preset::table2: r.table2(); break;
    case Preset::fig7: r.fig7(); break;
    case Preset::fig8: r.fig8(); break;
    case Preset::custom:
      if (config.trials == 1) r.custom_debug();
      else r.run_energy_curves("custom");
      break;
  }
  return std::move(r.out);
}

}  // namespace ehdcs
