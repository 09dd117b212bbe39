#include <zlib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehdcs/dataio.hpp"
#include "ehdcs/experiment.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using ehdcs::Diagnostic;
using ehdcs::ExperimentConfig;
using nlohmann::json;

namespace {

enum Exit { ok = 0, failure = 1, invalid_config = 2, data_error = 3 };

constexpr const char* kDefaultUrl = "http://db.csail.mit.edu/labdata/data.txt.gz";

struct ConfigFlags {
  std::string preset;
  std::string config_file;
  std::optional<long long> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::string data_path;
  std::vector<std::string> settings;  // key=value
  bool no_ledger = false;
  bool no_gnuplot = false;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--preset", f.preset, "fig3, fig4, fig5, fig6, table1, table2, fig7, fig8 or custom");
  app->add_option("--config", f.config_file, "key = value experiment file")->check(CLI::ExistingFile);
  app->add_option("--trials", f.trials, "Monte Carlo trials per point");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--workers", f.workers, "worker threads (default: EHDCS_WORKERS or all cores)");
  app->add_option("--data-path", f.data_path, "trace file or directory (overrides EHDCS_DATA_DIR)");
  app->add_option("--set", f.settings, "extra key=value override, repeatable");
  app->add_flag("--no-ledger", f.no_ledger, "do not read or write out/campaigns.csv");
  app->add_flag("--no-gnuplot", f.no_gnuplot, "skip the .gp scripts");
}

json to_json(const Diagnostic& d, const std::string& source) {
  json j;
  j["severity"] = d.severity == Diagnostic::Severity::error ? "error" : "warning";
  if (d.line > 0) j["line"] = d.line;
  if (!source.empty() && d.line > 0) j["file"] = source;
  if (!d.key.empty()) j["key"] = d.key;
  j["message"] = d.message;
  return j;
}

void emit_error(const std::string& kind, const std::string& message, const std::vector<Diagnostic>& diags = {},
                const std::string& source = {}) {
  json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["message"] = message;
  if (!diags.empty()) {
    j["diagnostics"] = json::array();
    for (const auto& d : diags) j["diagnostics"].push_back(to_json(d, source));
  }
  std::cerr << j.dump() << '\n';
}

// File settings first, then the preset flag, then individual flags.
struct Assembled {
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
};

Assembled assemble(const ConfigFlags& f) {
  Assembled a;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    std::stringstream text;
    text << in.rdbuf();
    std::string body = text.str();
    ehdcs::ParsedConfig first;
    {
      std::istringstream s(body);
      first = ehdcs::parse_config(s);
    }
    if (!f.preset.empty() && first.config.key_lines.count("preset") && ehdcs::parse_preset(f.preset) &&
        *ehdcs::parse_preset(f.preset) != first.config.preset) {
      a.diagnostics.push_back({Diagnostic::Severity::error, first.config.key_lines.at("preset"), "preset",
                               "config selects '" + std::string(ehdcs::to_string(first.config.preset)) +
                                   "' but --preset asks for '" + f.preset + "'"});
    }
    if (!f.preset.empty() && !first.config.key_lines.count("preset")) {
      // parse_config applies the last preset line as the base.
      if (!body.empty() && body.back() != '\n') body += '\n';
      body += "preset = " + f.preset + "\n";
      std::istringstream s(body);
      first = ehdcs::parse_config(s);
    }
    a.config = first.config;
    a.diagnostics.insert(a.diagnostics.end(), first.diagnostics.begin(), first.diagnostics.end());
  } else if (!f.preset.empty()) {
    const auto p = ehdcs::parse_preset(f.preset);
    if (!p) {
      a.diagnostics.push_back(
          {Diagnostic::Severity::error, 0, "preset", "unknown preset '" + f.preset + "'"});
    } else {
      a.config = ehdcs::preset_config(*p);
    }
  }

  auto set = [&](const std::string& key, const std::string& value) {
    ehdcs::apply_setting(a.config, key, value, 0, a.diagnostics);
    a.config.key_lines.erase(key);
  };
  for (const auto& kv : f.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      a.diagnostics.push_back({Diagnostic::Severity::error, 0, "set", "expected key=value (got '" + kv + "')"});
      continue;
    }
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.trials) set("trials", std::to_string(*f.trials));
  if (f.seed) set("seed", std::to_string(*f.seed));
  if (!f.out.empty()) set("out", f.out);
  if (f.workers) set("workers", std::to_string(*f.workers));
  if (!f.data_path.empty()) set("data_path", f.data_path);
  if (f.no_ledger) a.config.use_ledger = false;
  if (f.no_gnuplot) a.config.gnuplot = false;
  return a;
}

int cmd_validate(const ConfigFlags& f, bool as_json) {
  Assembled a = assemble(f);
  auto diags = a.diagnostics;
  const auto more = ehdcs::validate(a.config);
  diags.insert(diags.end(), more.begin(), more.end());
  if (as_json) {
    json j;
    j["status"] = ehdcs::has_errors(diags) ? "invalid" : "ok";
    j["preset"] = ehdcs::to_string(a.config.preset);
    j["diagnostics"] = json::array();
    for (const auto& d : diags) j["diagnostics"].push_back(to_json(d, f.config_file));
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& d : diags) std::cout << ehdcs::format_diagnostic(d, f.config_file) << '\n';
    if (!ehdcs::has_errors(diags)) std::cout << "ok: " << ehdcs::to_string(a.config.preset) << " is runnable\n";
  }
  return ehdcs::has_errors(diags) ? invalid_config : ok;
}

int cmd_run(const ConfigFlags& f, bool quiet) {
  Assembled a = assemble(f);
  auto diags = a.diagnostics;
  const auto more = ehdcs::validate(a.config);
  diags.insert(diags.end(), more.begin(), more.end());
  if (ehdcs::has_errors(diags)) {
    const bool data = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
      return d.severity == Diagnostic::Severity::error && d.key == "data_path";
    });
    emit_error(data ? "data" : "config", "invalid configuration", diags, f.config_file);
    return data ? data_error : invalid_config;
  }
  for (const auto& d : diags)
    if (!quiet) std::cerr << ehdcs::format_diagnostic(d, f.config_file) << '\n';
  try {
    const auto result = ehdcs::run(a.config, quiet ? nullptr : &std::cerr);
    std::cout << result.summary;
    return ok;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return failure;
  }
}

bool gunzip(const std::string& in, std::string& out, std::string& error) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    error = "zlib initialisation failed";
    return false;
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  char buf[1 << 16];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) break;
    out.append(buf, sizeof(buf) - zs.avail_out);
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    error = std::string("corrupt gzip stream") + (zs.msg ? std::string(": ") + zs.msg : "");
    return false;
  }
  return true;
}

bool is_gzip(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

int cmd_fetch(const std::string& url, const std::string& from, const std::string& dest_flag, int timeout_s) {
  const fs::path dest = ehdcs::resolve_data_dir(dest_flag.empty() ? std::nullopt : std::optional<fs::path>(dest_flag));
  std::string bytes;
  if (!from.empty()) {
    std::ifstream in(from, std::ios::binary);
    if (!in) {
      emit_error("data", "cannot read " + from);
      return data_error;
    }
    std::stringstream s;
    s << in.rdbuf();
    bytes = s.str();
  } else {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
      emit_error("usage", "only plain http:// URLs are supported; download manually and use --from");
      return failure;
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string host = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client cli(host);
    cli.set_connection_timeout(timeout_s, 0);
    cli.set_read_timeout(timeout_s * 10, 0);
    cli.set_follow_location(true);
    std::cerr << "downloading " << url << '\n';
    const auto res = cli.Get(path);
    if (!res) {
      emit_error("network", "download failed: " + httplib::to_string(res.error()) +
                                "; fetch the file elsewhere and pass --from <file>");
      return data_error;
    }
    if (res->status != 200) {
      emit_error("network", "download failed with HTTP status " + std::to_string(res->status));
      return data_error;
    }
    bytes = std::move(res->body);
  }
  std::string text;
  if (is_gzip(bytes)) {
    std::string error;
    if (!gunzip(bytes, text, error)) {
      emit_error("data", error);
      return data_error;
    }
  } else {
    text = std::move(bytes);
  }
  std::istringstream probe(text);
  const auto report = ehdcs::parse_traces(probe, {2, 3}).report;
  if (report.lines == 0 || report.malformed > report.lines / 2) {
    emit_error("data", "downloaded content does not look like the Intel Lab record format");
    return data_error;
  }
  std::error_code ec;
  fs::create_directories(dest, ec);
  const fs::path target = dest / "data.txt";
  std::ofstream out(target, std::ios::binary);
  if (!out || !(out << text)) {
    emit_error("data", "cannot write " + target.string());
    return data_error;
  }
  std::cout << "wrote " << target.string() << " (" << report.lines << " lines)\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-harvesting sensor network compressive sensing experiments"};
  app.require_subcommand(1);

  ConfigFlags run_flags, validate_flags;
  bool quiet = false, as_json = false;
  auto* run = app.add_subcommand("run", "run an experiment and write CSV results");
  add_config_flags(run, run_flags);
  run->add_flag("-q,--quiet", quiet, "no progress output");

  auto* validate = app.add_subcommand("validate", "check a configuration and list every problem");
  add_config_flags(validate, validate_flags);
  validate->add_flag("--json", as_json, "machine-readable output");

  std::string url = kDefaultUrl, from, dest;
  int timeout_s = 20;
  auto* fetch = app.add_subcommand("fetch-data", "download the Intel Lab temperature traces");
  fetch->add_option("--url", url, "source URL (gzip or plain text)");
  fetch->add_option("--from", from, "install from a local copy instead of downloading")->check(CLI::ExistingFile);
  fetch->add_option("--dest", dest, "target directory (default: EHDCS_DATA_DIR or the bundled data dir)");
  fetch->add_option("--timeout", timeout_s, "connection timeout in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("usage", e.what());
    return invalid_config;
  }

  if (*run) {
    if (run_flags.preset.empty() && run_flags.config_file.empty()) {
      emit_error("usage", "run needs --preset or --config");
      return invalid_config;
    }
    return cmd_run(run_flags, quiet);
  }
  if (*validate) return cmd_validate(validate_flags, as_json);
  return cmd_fetch(url, from, dest, timeout_s);
}
