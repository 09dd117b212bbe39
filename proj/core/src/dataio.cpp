#include "ehdcs/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#ifndef EHDCS_BUNDLED_DATA_DIR
#define EHDCS_BUNDLED_DATA_DIR "data"
#endif

namespace ehdcs {

TraceSet parse_traces(std::istream& in, const std::vector<int>& mote_ids, const CleaningRules& rules) {
  if (mote_ids.empty()) throw std::invalid_argument("load_traces: no motes requested");
  std::map<int, std::map<long long, double>> by_mote;
  for (int id : mote_ids) by_mote[id];
  TraceSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++set.report.lines;
    std::istringstream ls(line);
    std::string date, time;
    long long epoch;
    int mote;
    std::string temp_text;
    if (!(ls >> date >> time >> epoch >> mote >> temp_text)) {
      ++set.report.malformed;
      continue;
    }
    char* end = nullptr;
    const double temp = std::strtod(temp_text.c_str(), &end);
    if (end == temp_text.c_str() || *end != '\0') {
      ++set.report.malformed;
      continue;
    }
    auto it = by_mote.find(mote);
    if (it == by_mote.end()) {
      ++set.report.other_motes;
      continue;
    }
    if (!std::isfinite(temp) || temp < rules.min_celsius || temp > rules.max_celsius) {
      ++set.report.out_of_range;
      continue;
    }
    if (!it->second.emplace(epoch, temp).second) ++set.report.duplicates;
  }
  for (int id : mote_ids) {
    const auto& records = by_mote[id];
    if (records.empty())
      throw std::runtime_error("load_traces: no valid records for mote " + std::to_string(id));
    SensorTrace t;
    t.mote_id = id;
    for (const auto& [e, v] : records) {
      t.epochs.push_back(e);
      t.values.push_back(v);
    }
    set.traces.push_back(std::move(t));
  }
  return set;
}

TraceSet load_traces(const std::filesystem::path& path, const std::vector<int>& mote_ids,
                     const CleaningRules& rules) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_traces: cannot read " + path.string());
  return parse_traces(in, mote_ids, rules);
}

namespace {

long long missing_in(const SensorTrace& t, long long start, int n) {
  auto lo = std::lower_bound(t.epochs.begin(), t.epochs.end(), start);
  auto hi = std::lower_bound(t.epochs.begin(), t.epochs.end(), start + n);
  return n - (hi - lo);
}

bool window_ok(const std::vector<SensorTrace>& traces, long long start, int n, double max_fill) {
  for (const auto& t : traces)
    if (static_cast<double>(missing_in(t, start, n)) > max_fill * n) return false;
  return true;
}

SignalSegment fill_segment(const SensorTrace& t, long long start, int n) {
  SignalSegment s;
  s.mote_id = t.mote_id;
  s.start_epoch = start;
  s.samples.resize(n);
  long long filled = 0;
  for (int i = 0; i < n; ++i) {
    const long long e = start + i;
    auto it = std::lower_bound(t.epochs.begin(), t.epochs.end(), e);
    const auto idx = it - t.epochs.begin();
    if (it != t.epochs.end() && *it == e) {
      s.samples[i] = t.values[idx];
      continue;
    }
    ++filled;
    if (it == t.epochs.begin()) {
      s.samples[i] = t.values.front();
    } else if (it == t.epochs.end()) {
      s.samples[i] = t.values.back();
    } else {
      const double e0 = static_cast<double>(t.epochs[idx - 1]), e1 = static_cast<double>(*it);
      const double w = (static_cast<double>(e) - e0) / (e1 - e0);
      s.samples[i] = (1.0 - w) * t.values[idx - 1] + w * t.values[idx];
    }
  }
  s.fill_fraction = static_cast<double>(filled) / n;
  return s;
}

std::pair<long long, long long> common_range(const std::vector<SensorTrace>& traces) {
  long long first = traces.front().epochs.front(), last = traces.front().epochs.back();
  for (const auto& t : traces) {
    first = std::max(first, t.epochs.front());
    last = std::min(last, t.epochs.back());
  }
  return {first, last};
}

void check_traces(const std::vector<SensorTrace>& traces, int n) {
  if (traces.empty()) throw std::invalid_argument("segment_aligned: no traces");
  if (n < 1) throw std::invalid_argument("segment_aligned: n must be >= 1");
  for (const auto& t : traces)
    if (t.epochs.empty() || t.epochs.size() != t.values.size())
      throw std::invalid_argument("segment_aligned: empty or inconsistent trace for mote " +
                                  std::to_string(t.mote_id));
}

}  // namespace

std::vector<SignalSegment> segment_aligned(const std::vector<SensorTrace>& traces, int n,
                                           const SegmentOptions& opts) {
  check_traces(traces, n);
  const auto [first, last] = common_range(traces);
  std::optional<long long> start;
  if (opts.start_epoch) {
    if (*opts.start_epoch >= first && *opts.start_epoch + n - 1 <= last &&
        window_ok(traces, *opts.start_epoch, n, opts.max_fill))
      start = opts.start_epoch;
  } else {
    for (long long s = first; s + n - 1 <= last; ++s)
      if (window_ok(traces, s, n, opts.max_fill)) {
        start = s;
        break;
      }
  }
  if (!start) {
    std::ostringstream os;
    os << "segment_aligned: no common window of " << n << " epochs with at most "
       << opts.max_fill * 100 << "% missing; coverage:";
    for (const auto& t : traces)
      os << " mote " << t.mote_id << " epochs [" << t.epochs.front() << ", " << t.epochs.back()
         << "] with " << t.epochs.size() << " readings;";
    throw std::runtime_error(os.str());
  }
  std::vector<SignalSegment> out;
  for (const auto& t : traces) out.push_back(fill_segment(t, *start, n));
  return out;
}

std::vector<long long> aligned_window_starts(const std::vector<SensorTrace>& traces, int n,
                                             double max_fill) {
  check_traces(traces, n);
  const auto [first, last] = common_range(traces);
  std::vector<long long> starts;
  for (long long s = first; s + n - 1 <= last;) {
    if (window_ok(traces, s, n, max_fill)) {
      starts.push_back(s);
      s += n;
    } else {
      ++s;
    }
  }
  return starts;
}

Matrix dct_basis(int n) {
  if (n < 1) throw std::invalid_argument("dct_basis: n must be >= 1");
  Matrix psi(n, n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      psi(i, k) = scale * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
  return psi;
}

double tau_per_measurement(double bitrate_kbps, double power_mw, int bits_per_measurement) {
  if (!(bitrate_kbps > 0.0) || !(power_mw > 0.0) || bits_per_measurement <= 0)
    throw std::invalid_argument("tau_per_measurement: all arguments must be positive");
  // mW * bit / (kbit/s) = 1e-3 J/s * 1e-3 s = µJ
  return power_mw * bits_per_measurement / bitrate_kbps;
}

std::filesystem::path resolve_data_dir(const std::optional<std::filesystem::path>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return EHDCS_BUNDLED_DATA_DIR;
}

std::optional<std::filesystem::path> find_full_dataset(const std::filesystem::path& dir) {
  for (const char* name : {"intel_lab.txt", "data.txt"}) {
    const auto p = dir / name;
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) return p;
  }
  return std::nullopt;
}

std::filesystem::path bundled_sample_path() {
  return std::filesystem::path(EHDCS_BUNDLED_DATA_DIR) / "intel_format_synthetic_sample.txt";
}

void write_segments_csv(const std::filesystem::path& path, const std::vector<SignalSegment>& segs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# aligned temperature segments, one column per mote\n";
  out << "epoch";
  for (const auto& s : segs) out << ",mote_" << s.mote_id;
  out << '\n';
  if (segs.empty()) return;
  out << std::setprecision(8);
  for (Eigen::Index i = 0; i < segs.front().samples.size(); ++i) {
    out << segs.front().start_epoch + i;
    for (const auto& s : segs) out << ',' << s.samples[i];
    out << '\n';
  }
}

}  // namespace ehdcs
