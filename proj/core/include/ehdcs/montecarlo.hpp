#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ehdcs/energy.hpp"
#include "ehdcs/recovery.hpp"
#include "ehdcs/scci.hpp"
#include "ehdcs/stats.hpp"

namespace ehdcs {

enum class RecoveryMode { cs, dcs };

const char* to_string(RecoveryMode mode);
RecoveryMode parse_recovery_mode(const std::string& text);

struct CampaignConfig {
  ScciParams scci;
  EhParams eh;
  RecoveryMode mode = RecoveryMode::dcs;
  long long trials = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  int cap = -1;             // per-sensor measurement cap; negative means n
  double threshold = 1e-4;  // relative squared error for a successful sensor
  RecoveryOptions recovery;

  void validate() const;
  // Canonical text of every field that affects the result (workers excluded).
  std::string canonical() const;
  std::uint64_t digest() const;
};

struct TrialOutcome {
  std::vector<int> budgets;
  std::vector<double> rel_err;  // NaN for sensors that were not reconstructed
  int solver_failures = 0;
  bool success = false;
};

// One trial of the synthetic pipeline: ensemble, harvest, budgets, Gaussian
// sensing, acquisition, recovery and the all-sensor success decision.
TrialOutcome run_trial(const CampaignConfig& config, long long trial);

PidrEstimate run_campaign(const CampaignConfig& config);
PidrEstimate run_campaign(const ScciParams& scci, const EhParams& eh, RecoveryMode mode,
                          long long trials, std::uint64_t seed);

// Append-only CSV of finished campaigns keyed by configuration digest.
class CampaignLedger {
 public:
  explicit CampaignLedger(std::filesystem::path path);

  std::optional<PidrEstimate> find(std::uint64_t digest) const;
  void record(const CampaignConfig& config, const PidrEstimate& estimate);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::map<std::uint64_t, PidrEstimate> entries_;
  mutable std::mutex mutex_;
};

// Reuses a ledger entry when the digest matches, otherwise runs and records.
PidrEstimate run_campaign_cached(const CampaignConfig& config, CampaignLedger* ledger);

// Campaign over fixed signals (e.g. aligned sensor traces): each trial picks
// one window, draws energy, subsamples m_k samples per sensor, quantizes
// them and decodes with basis pursuit denoising.
struct SignalCampaignConfig {
  std::vector<std::vector<Vector>> windows;  // windows[w][k]: signal of sensor k
  BasisPtr basis;
  EhParams eh;
  RecoveryMode mode = RecoveryMode::dcs;
  long long trials = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  int bits = 8;             // 0 disables quantization
  double threshold = 1e-3;
  RecoveryOptions recovery;

  void validate() const;
  std::string canonical() const;
};

TrialOutcome run_signal_trial(const SignalCampaignConfig& config, long long trial);
PidrEstimate run_signal_campaign(const SignalCampaignConfig& config);

struct TargetSearchOptions {
  double low = 10.0;
  double high = 2000.0;
  double max_high = 16000.0;  // the bracket doubles up to this before giving up
  double tolerance = 5.0;
  // A trial that succeeded at some energy succeeds at every larger one (the
  // budgets and the nested sensing rows only grow), so probes reuse
  // earlier decisions instead of re-solving.
  bool reuse_monotone = true;
};

struct EnergyProbe {
  double energy = 0.0;
  PidrEstimate estimate;
};

struct TargetSearchResult {
  double energy = 0.0;  // smallest probed energy whose CI upper bound <= target
  PidrEstimate estimate;
  std::vector<EnergyProbe> probes;
};

// Bisection over the total mean energy 1/lambda_c + 1/lambda at a fixed
// ratio lambda/lambda_c. `base` supplies everything except eh.
TargetSearchResult energy_for_target(const CampaignConfig& base, double ratio, double target,
                                     const TargetSearchOptions& opts = {});

}  // namespace ehdcs
