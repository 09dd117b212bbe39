#include "ehdcs/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ehdcs/parallel.hpp"
#include "ehdcs/rng.hpp"
#include "ehdcs/sensing.hpp"

namespace ehdcs {

const char* to_string(RecoveryMode mode) { return mode == RecoveryMode::cs ? "cs" : "dcs"; }

RecoveryMode parse_recovery_mode(const std::string& text) {
  if (text == "cs") return RecoveryMode::cs;
  if (text == "dcs") return RecoveryMode::dcs;
  throw std::invalid_argument("unknown recovery mode '" + text + "' (expected cs or dcs)");
}

void CampaignConfig::validate() const {
  scci.validate();
  eh.validate();
  if (eh.sensors() != scci.K) {
    std::ostringstream os;
    os << "campaign: EhParams has " << eh.sensors() << " sensors, ScciParams K = " << scci.K;
    throw std::invalid_argument(os.str());
  }
  if (trials < 1) throw std::invalid_argument("campaign: trials must be >= 1");
  if (!(threshold > 0.0)) throw std::invalid_argument("campaign: threshold must be > 0");
  recovery.solve.validate();
}

std::string CampaignConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "v1;mode=" << to_string(mode) << ";n=" << scci.n << ";K=" << scci.K
     << ";sc=" << scci.s_common << ";si=" << scci.s_innov << ";scale=" << scci.value_scale
     << ";lc=" << eh.lambda_c << ";l=";
  for (double l : eh.lambdas) os << l << ',';
  os << ";tau=" << eh.tau << ";trials=" << trials << ";seed=" << seed
     << ";cap=" << (cap < 0 ? scci.n : cap) << ";thr=" << threshold
     << ";alg=" << static_cast<int>(recovery.solve.algorithm) << ";tol=" << recovery.solve.eq_tolerance;
  return os.str();
}

std::uint64_t CampaignConfig::digest() const { return fnv1a64(canonical()); }

TrialOutcome run_trial(const CampaignConfig& config, long long trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const int K = config.scci.K;
  const int n = config.scci.n;
  const int cap = config.cap < 0 ? n : config.cap;
  thread_local BasisPtr basis;
  if (!basis || basis->rows() != n) basis = identity_basis(n);

  const ScciEnsemble ens = generate_ensemble(config.scci, basis, derive_seed(config.seed, t, streams::ensemble));
  const EnergyDraw draw =
      scale_harvest(sample_unit_harvest(K, derive_seed(config.seed, t, streams::energy)), config.eh);

  TrialOutcome out;
  out.budgets.resize(K);
  for (int k = 0; k < K; ++k) out.budgets[k] = budget(draw.totals[k], config.eh.tau, cap);
  out.rel_err.assign(K, std::numeric_limits<double>::quiet_NaN());

  if (config.mode == RecoveryMode::cs) {
    // Fewer rows than nonzeros can never give a unique l1 solution.
    for (int k = 0; k < K; ++k) {
      const auto nnz = (ens.x[k].array() != 0.0).count();
      if (out.budgets[k] < nnz) return out;
    }
  } else if (std::all_of(out.budgets.begin(), out.budgets.end(), [](int m) { return m == 0; })) {
    return out;
  }

  SensingEnsemble sensing;
  sensing.kind = SensingKind::dense_gaussian;
  MeasurementSet ms;
  for (int k = 0; k < K; ++k) {
    sensing.matrices.push_back(gaussian_matrix(out.budgets[k], n, derive_seed(config.seed, t, streams::sensing, k)));
    ms.y.push_back(acquire(sensing.matrices.back(), ens.x[k]));
    ms.quant.emplace_back();
  }

  RecoveryResult r = config.mode == RecoveryMode::cs ? cs_recover(sensing, ms, *basis, config.recovery)
                                                     : dcs_recover(sensing, ms, *basis, config.recovery);
  assess(r, ens.f, config.threshold);
  out.rel_err = r.per_sensor_rel_err;
  out.solver_failures = r.solver_failures;
  out.success = r.success;
  return out;
}

PidrEstimate run_campaign(const CampaignConfig& config) {
  config.validate();
  std::vector<char> failed(static_cast<std::size_t>(config.trials), 0);
  std::vector<int> solver_failures(static_cast<std::size_t>(config.trials), 0);
  parallel_for(config.trials, config.workers, [&](long long t) {
    const TrialOutcome o = run_trial(config, t);
    failed[static_cast<std::size_t>(t)] = o.success ? 0 : 1;
    solver_failures[static_cast<std::size_t>(t)] = o.solver_failures > 0 ? 1 : 0;
  });
  long long failures = 0, solver = 0;
  for (std::size_t i = 0; i < failed.size(); ++i) {
    failures += failed[i];
    solver += solver_failures[i];
  }
  PidrEstimate e = make_estimate(failures, config.trials, config.seed, config.digest());
  e.solver_failures = solver;
  return e;
}

PidrEstimate run_campaign(const ScciParams& scci, const EhParams& eh, RecoveryMode mode,
                          long long trials, std::uint64_t seed) {
  CampaignConfig c;
  c.scci = scci;
  c.eh = eh;
  c.mode = mode;
  c.trials = trials;
  c.seed = seed;
  c.workers = default_workers();
  return run_campaign(c);
}

void SignalCampaignConfig::validate() const {
  if (windows.empty()) throw std::invalid_argument("signal campaign: no signal windows");
  if (!basis) throw std::invalid_argument("signal campaign: missing basis");
  const auto K = windows.front().size();
  const auto n = basis->rows();
  if (K == 0) throw std::invalid_argument("signal campaign: windows hold no sensors");
  for (const auto& w : windows) {
    if (w.size() != K) throw std::invalid_argument("signal campaign: windows disagree on K");
    for (const auto& f : w)
      if (f.size() != n) throw std::invalid_argument("signal campaign: signal length differs from basis size");
  }
  eh.validate();
  if (eh.sensors() != static_cast<int>(K))
    throw std::invalid_argument("signal campaign: EhParams sensor count differs from K");
  if (trials < 1) throw std::invalid_argument("signal campaign: trials must be >= 1");
  if (bits < 0 || bits > 31) throw std::invalid_argument("signal campaign: bits must be in [0, 31]");
  if (!(threshold > 0.0)) throw std::invalid_argument("signal campaign: threshold must be > 0");
  recovery.solve.validate();
}

std::string SignalCampaignConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17) << "signal-v1;mode=" << to_string(mode) << ";windows=" << windows.size()
     << ";K=" << (windows.empty() ? 0 : windows.front().size()) << ";lc=" << eh.lambda_c << ";l=";
  for (double l : eh.lambdas) os << l << ',';
  os << ";tau=" << eh.tau << ";trials=" << trials << ";seed=" << seed << ";bits=" << bits
     << ";thr=" << threshold;
  std::uint64_t h = 0;
  for (const auto& w : windows)
    for (const auto& f : w)
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        double v = f[i];
        std::uint64_t bitsv;
        std::memcpy(&bitsv, &v, sizeof v);
        h = splitmix64(h ^ bitsv);
      }
  os << ";data=" << h;
  return os.str();
}

TrialOutcome run_signal_trial(const SignalCampaignConfig& config, long long trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const auto& windows = config.windows;
  const int K = static_cast<int>(windows.front().size());
  const int n = static_cast<int>(config.basis->rows());
  Rng pick(derive_seed(config.seed, t, streams::window));
  const auto& f = windows[std::uniform_int_distribution<std::size_t>(0, windows.size() - 1)(pick)];
  const EnergyDraw draw =
      scale_harvest(sample_unit_harvest(K, derive_seed(config.seed, t, streams::energy)), config.eh);

  TrialOutcome out;
  out.budgets.resize(K);
  for (int k = 0; k < K; ++k) out.budgets[k] = budget(draw.totals[k], config.eh.tau, n);
  out.rel_err.assign(K, std::numeric_limits<double>::quiet_NaN());
  if (config.mode == RecoveryMode::cs &&
      std::any_of(out.budgets.begin(), out.budgets.end(), [](int m) { return m == 0; }))
    return out;
  if (std::all_of(out.budgets.begin(), out.budgets.end(), [](int m) { return m == 0; })) return out;

  SensingEnsemble sensing;
  sensing.kind = SensingKind::row_subsample;
  MeasurementSet ms;
  for (int k = 0; k < K; ++k) {
    const IndexSet rows = subsample_rows(out.budgets[k], n, derive_seed(config.seed, t, streams::sensing, k));
    Matrix A(rows.size(), n);
    Vector y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      A.row(static_cast<Eigen::Index>(i)) = config.basis->row(rows[i]);
      y[static_cast<Eigen::Index>(i)] = f[k][rows[i]];
    }
    sensing.matrices.push_back(std::move(A));
    if (config.bits > 0 && y.size() > 0) {
      const Quantized q = quantize(y, config.bits);
      ms.y.push_back(dequantize(q));
      ms.quant.emplace_back(q.info);
    } else {
      ms.y.push_back(std::move(y));
      ms.quant.emplace_back();
    }
  }
  RecoveryResult r = config.mode == RecoveryMode::cs ? cs_recover(sensing, ms, *config.basis, config.recovery)
                                                     : dcs_recover(sensing, ms, *config.basis, config.recovery);
  assess(r, f, config.threshold);
  out.rel_err = r.per_sensor_rel_err;
  out.solver_failures = r.solver_failures;
  out.success = r.success;
  return out;
}

PidrEstimate run_signal_campaign(const SignalCampaignConfig& config) {
  config.validate();
  std::vector<char> failed(static_cast<std::size_t>(config.trials), 0);
  std::vector<char> solver(static_cast<std::size_t>(config.trials), 0);
  parallel_for(config.trials, config.workers, [&](long long t) {
    const TrialOutcome o = run_signal_trial(config, t);
    failed[static_cast<std::size_t>(t)] = o.success ? 0 : 1;
    solver[static_cast<std::size_t>(t)] = o.solver_failures > 0 ? 1 : 0;
  });
  long long failures = 0, solver_failures = 0;
  for (std::size_t i = 0; i < failed.size(); ++i) {
    failures += failed[i];
    solver_failures += solver[i];
  }
  PidrEstimate e = make_estimate(failures, config.trials, config.seed, fnv1a64(config.canonical()));
  e.solver_failures = solver_failures;
  return e;
}

namespace {

constexpr const char* kLedgerHeader =
    "schema_version,digest,mode,trials,seed,failures,solver_failures,pidr,ci_low,ci_high,config";
constexpr const char* kLedgerSchema = "1";

std::string hex_digest(std::uint64_t d) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << d;
  return os.str();
}

}  // namespace

CampaignLedger::CampaignLedger(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    for (int i = 0; i < 10 && std::getline(ss, cell, ','); ++i) f.push_back(cell);
    if (f.size() != 10 || f[0] != kLedgerSchema) continue;
    f.erase(f.begin());
    try {
      PidrEstimate e;
      const std::uint64_t digest = std::stoull(f[0], nullptr, 16);
      e.trials = std::stoll(f[2]);
      e.seed = std::stoull(f[3]);
      e.failures = std::stoll(f[4]);
      e.solver_failures = std::stoll(f[5]);
      e.pidr = static_cast<double>(e.failures) / static_cast<double>(e.trials);
      e.ci95 = wilson_interval(e.failures, e.trials);
      e.config_digest = digest;
      entries_[digest] = e;
    } catch (const std::exception&) {
      // a torn final line from an interrupted run; the campaign reruns
    }
  }
}

std::optional<PidrEstimate> CampaignLedger::find(std::uint64_t digest) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CampaignLedger::record(const CampaignConfig& config, const PidrEstimate& e) {
  std::lock_guard lock(mutex_);
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to campaign ledger " + path_.string());
  if (fresh) out << kLedgerHeader << '\n';
  out << kLedgerSchema << ',' << hex_digest(e.config_digest) << ',' << to_string(config.mode) << ',' << e.trials << ','
      << e.seed << ',' << e.failures << ',' << e.solver_failures << ',' << std::setprecision(10)
      << e.pidr << ',' << e.ci95.low << ',' << e.ci95.high << ",\"" << config.canonical() << "\"\n";
  entries_[e.config_digest] = e;
}

PidrEstimate run_campaign_cached(const CampaignConfig& config, CampaignLedger* ledger) {
  if (ledger) {
    if (auto hit = ledger->find(config.digest())) return *hit;
  }
  PidrEstimate e = run_campaign(config);
  if (ledger) ledger->record(config, e);
  return e;
}

namespace {

// Per-trial knowledge from earlier probes of the same search.
struct MonotoneCache {
  std::vector<double> succeeded_at;  // smallest energy known to succeed
  std::vector<double> failed_at;     // largest energy known to fail

  explicit MonotoneCache(long long trials)
      : succeeded_at(static_cast<std::size_t>(trials), std::numeric_limits<double>::infinity()),
        failed_at(static_cast<std::size_t>(trials), -1.0) {}
};

PidrEstimate probe(const CampaignConfig& base, double ratio, double energy, MonotoneCache* cache) {
  CampaignConfig c = base;
  c.eh = EhParams::from_total(energy, ratio, base.scci.K, base.eh.tau);
  c.validate();
  std::vector<char> failed(static_cast<std::size_t>(c.trials), 0);
  std::vector<char> solver(static_cast<std::size_t>(c.trials), 0);
  parallel_for(c.trials, c.workers, [&](long long t) {
    const auto i = static_cast<std::size_t>(t);
    if (cache && energy >= cache->succeeded_at[i]) return;
    if (cache && energy <= cache->failed_at[i]) {
      failed[i] = 1;
      return;
    }
    const TrialOutcome o = run_trial(c, t);
    failed[i] = o.success ? 0 : 1;
    solver[i] = o.solver_failures > 0 ? 1 : 0;
    if (cache) {
      if (o.success) cache->succeeded_at[i] = std::min(cache->succeeded_at[i], energy);
      else cache->failed_at[i] = std::max(cache->failed_at[i], energy);
    }
  });
  long long failures = 0, solver_failures = 0;
  for (std::size_t i = 0; i < failed.size(); ++i) {
    failures += failed[i];
    solver_failures += solver[i];
  }
  PidrEstimate e = make_estimate(failures, c.trials, c.seed, c.digest());
  e.solver_failures = solver_failures;
  return e;
}

}  // namespace

TargetSearchResult energy_for_target(const CampaignConfig& base, double ratio, double target,
                                     const TargetSearchOptions& opts) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("energy_for_target: target PIDR must lie in (0, 1)");
  if (!(opts.low > 0.0 && opts.high > opts.low && opts.tolerance > 0.0))
    throw std::invalid_argument("energy_for_target: need 0 < low < high and tolerance > 0");
  if (base.trials < 1) throw std::invalid_argument("energy_for_target: trials must be >= 1");

  TargetSearchResult result;
  MonotoneCache cache(base.trials);
  MonotoneCache* cp = opts.reuse_monotone ? &cache : nullptr;
  auto run = [&](double energy) {
    PidrEstimate e = probe(base, ratio, energy, cp);
    result.probes.push_back({energy, e});
    return e;
  };
  auto meets = [&](const PidrEstimate& e) { return e.ci95.high <= target; };

  double lo = opts.low, hi = opts.high;
  PidrEstimate at_hi = run(hi);
  while (!meets(at_hi)) {
    if (hi >= opts.max_high) {
      std::ostringstream os;
      os << "energy_for_target: target " << target << " unreachable in [" << opts.low << ", "
         << hi << "]; probes:";
      for (const auto& p : result.probes)
        os << " E=" << p.energy << " pidr=" << p.estimate.pidr << " ci_high=" << p.estimate.ci95.high;
      throw std::runtime_error(os.str());
    }
    lo = hi;
    hi = std::min(2.0 * hi, opts.max_high);
    at_hi = run(hi);
  }
  if (lo == opts.low) {
    const PidrEstimate at_lo = run(lo);
    if (meets(at_lo)) {
      result.energy = lo;
      result.estimate = at_lo;
      return result;
    }
  }
  while (hi - lo > opts.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const PidrEstimate e = run(mid);
    if (meets(e)) {
      hi = mid;
      at_hi = e;
    } else {
      lo = mid;
    }
  }
  result.energy = hi;
  result.estimate = at_hi;
  return result;
}

}  // namespace ehdcs
