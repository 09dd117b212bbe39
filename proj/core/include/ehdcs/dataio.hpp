#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ehdcs/types.hpp"

namespace ehdcs {

struct SensorTrace {
  int mote_id = 0;
  std::vector<long long> epochs;  // strictly increasing
  std::vector<double> values;     // temperature, degrees C
};

struct LoadReport {
  long long lines = 0;
  long long malformed = 0;
  long long out_of_range = 0;  // temperature outside [min, max]
  long long duplicates = 0;    // repeated (mote, epoch); the first is kept
  long long other_motes = 0;
};

struct TraceSet {
  std::vector<SensorTrace> traces;  // in the order the motes were requested
  LoadReport report;
};

struct CleaningRules {
  double min_celsius = 0.0;
  double max_celsius = 50.0;
};

// Whitespace-delimited records: date time epoch mote temperature humidity
// light voltage. Trailing fields may be missing; the first five must parse.
TraceSet parse_traces(std::istream& in, const std::vector<int>& mote_ids,
                      const CleaningRules& rules = {});
TraceSet load_traces(const std::filesystem::path& path, const std::vector<int>& mote_ids,
                     const CleaningRules& rules = {});

struct SignalSegment {
  int mote_id = 0;
  long long start_epoch = 0;
  Vector samples;
  double fill_fraction = 0.0;  // share of epochs filled by interpolation
};

struct SegmentOptions {
  double max_fill = 0.05;
  std::optional<long long> start_epoch;  // default: earliest admissible window
};

// K segments over the same n consecutive epochs; gaps are filled by linear
// interpolation. Throws std::runtime_error listing per-mote coverage when no
// window qualifies.
std::vector<SignalSegment> segment_aligned(const std::vector<SensorTrace>& traces, int n,
                                           const SegmentOptions& opts = {});

// Start epochs of disjoint admissible windows, scanning from the earliest.
std::vector<long long> aligned_window_starts(const std::vector<SensorTrace>& traces, int n,
                                             double max_fill = 0.05);

// Orthonormal DCT-II synthesis matrix: f = Psi x with x the DCT coefficients.
Matrix dct_basis(int n);

// Radio energy per measurement in µJ: mW * bits / kbps.
double tau_per_measurement(double bitrate_kbps, double power_mw, int bits_per_measurement);

inline constexpr const char* kDataDirEnv = "EHDCS_DATA_DIR";

// Directory holding the trace files: explicit path, then EHDCS_DATA_DIR,
// then the data directory shipped with the sources.
std::filesystem::path resolve_data_dir(const std::optional<std::filesystem::path>& flag);

// The full public dataset, if present in `dir` (intel_lab.txt or data.txt).
std::optional<std::filesystem::path> find_full_dataset(const std::filesystem::path& dir);

// Bundled synthetic file in the same record format, used offline.
std::filesystem::path bundled_sample_path();

void write_segments_csv(const std::filesystem::path& path, const std::vector<SignalSegment>& segs);

}  // namespace ehdcs
