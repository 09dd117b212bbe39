#include "ehdcs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ehdcs/parallel.hpp"
#include "ehdcs/rng.hpp"

namespace ehdcs {

namespace {

void check_sensors(const EhParams& eh, int K) {
  eh.validate();
  if (K != eh.sensors()) {
    std::ostringstream os;
    os << "bound: K = " << K << " but EhParams has " << eh.sensors() << " sensors";
    throw std::invalid_argument(os.str());
  }
}

constexpr double kMaxCoefficient = 1e4;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double prob_all_at_least(const EhParams& eh, double threshold) {
  eh.validate();
  if (threshold <= 0.0) return 1.0;
  // xi_k >= a for all k  <=>  common + min_k innovation_k >= a, and the
  // minimum of the innovations is exponential with rate sum(lambda_k).
  const double lc = eh.lambda_c;
  const double ls = eh.innovation_rate_sum();
  if (!std::isinf(lc) && !std::isinf(ls)) {
    const double gap = ls - lc;
    if (gap != 0.0 && std::max(ls, lc) / std::abs(gap) <= kMaxCoefficient)
      return clamp01(ls / gap * std::exp(-lc * threshold) -
                     lc / gap * std::exp(-ls * threshold));
  }
  const double rates[] = {lc, ls};
  return hypoexp_sf(rates, threshold);
}

double prob_sum_at_least(const EhParams& eh, double threshold) {
  eh.validate();
  if (threshold <= 0.0) return 1.0;
  const int K = eh.sensors();
  const double lc = eh.lambda_c;
  std::vector<double> rates;
  rates.reserve(static_cast<std::size_t>(K) + 1);
  rates.push_back(lc / K);  // K * common ~ Exp(lambda_c / K)
  rates.insert(rates.end(), eh.lambdas.begin(), eh.lambdas.end());

  bool closed = std::none_of(rates.begin(), rates.end(), [](double r) { return std::isinf(r); });
  if (closed) {
    const double head = std::exp(-lc * threshold / K);
    double total = head;
    for (int k = 0; k < K && closed; ++k) {
      const double lk = eh.lambdas[k];
      double denom = K * lk - lc;
      for (int j = 0; j < K; ++j)
        if (j != k) denom *= 1.0 - lk / eh.lambdas[j];
      const double coef = lc / denom;
      if (denom == 0.0 || !(std::abs(coef) <= kMaxCoefficient)) {
        closed = false;
        break;
      }
      total += coef * (head - std::exp(-lk * threshold));
    }
    if (closed) return clamp01(total);
  }
  return hypoexp_sf(rates, threshold);
}

double pidr_cs_bound(const EhParams& eh, int s, int K) {
  check_sensors(eh, K);
  if (s < 0) throw std::invalid_argument("pidr_cs_bound: s must be >= 0");
  return clamp01(1.0 - prob_all_at_least(eh, s * eh.tau));
}

double pidr_dcs_bound(const EhParams& eh, int s_common, int s_innov, int K) {
  check_sensors(eh, K);
  if (s_common < 0 || s_innov < 0) throw std::invalid_argument("pidr_dcs_bound: sparsities must be >= 0");
  const double p_each = prob_all_at_least(eh, s_innov * eh.tau);
  const double p_sum = prob_sum_at_least(eh, (s_common + static_cast<double>(K) * s_innov) * eh.tau);
  return clamp01(1.0 - std::min(p_each, p_sum));
}

std::pair<double, double> asymptotic_bounds(const EhParams& eh, int s, int s_common, int s_innov,
                                            int K, EhRegime regime) {
  check_sensors(eh, K);
  const double tau = eh.tau;
  const double b = (s_common + static_cast<double>(K) * s_innov) * tau;
  if (regime == EhRegime::correlated) {
    const double lc = eh.lambda_c;
    return {1.0 - std::exp(-lc * s * tau), 1.0 - std::exp(-(lc / K) * b)};
  }
  const double ls = eh.innovation_rate_sum();
  const double first = 1.0 - std::exp(-ls * s_innov * tau);
  const double second = 1.0 - hypoexp_sf(eh.lambdas, b);
  return {1.0 - std::exp(-ls * s * tau), std::max(first, second)};
}

BoundReport bound_report(const EhParams& eh, int s, int s_common, int s_innov, int K,
                         bool with_expansions) {
  BoundReport r;
  r.cs_bound = pidr_cs_bound(eh, s, K);
  r.dcs_term_pointwise = clamp01(1.0 - prob_all_at_least(eh, s_innov * eh.tau));
  r.dcs_term_sum =
      clamp01(1.0 - prob_sum_at_least(eh, (s_common + static_cast<double>(K) * s_innov) * eh.tau));
  r.dcs_bound = std::max(r.dcs_term_pointwise, r.dcs_term_sum);
  if (with_expansions) {
    r.correlated = asymptotic_bounds(eh, s, s_common, s_innov, K, EhRegime::correlated);
    r.uncorrelated = asymptotic_bounds(eh, s, s_common, s_innov, K, EhRegime::uncorrelated);
  }
  return r;
}

bool subset_condition_holds(std::span<const int> m, int s_innov, const LocationMatrix& location,
                            int slack_per_sensor) {
  const int K = location.sensors();
  if (static_cast<int>(m.size()) != K)
    throw std::invalid_argument("subset condition: need one budget per sensor");
  if (K > kMaxEnumeratedSensors) {
    std::ostringstream os;
    os << "subset condition: K = " << K << " exceeds the enumeration limit of "
       << kMaxEnumeratedSensors;
    throw std::invalid_argument(os.str());
  }
  // in_mask[c]: sensors whose innovation support contains common index c.
  std::vector<std::uint32_t> in_mask;
  in_mask.reserve(location.common_support.size());
  for (int j : location.common_support) {
    std::uint32_t mask = 0;
    for (int k = 0; k < K; ++k) {
      const auto& s = location.innov_supports[k];
      if (std::binary_search(s.begin(), s.end(), j)) mask |= 1u << k;
    }
    in_mask.push_back(mask);
  }
  const std::uint32_t full = K == 32 ? ~0u : ((1u << K) - 1u);
  for (std::uint32_t J = 1; J <= full; ++J) {
    long long measurements = 0;
    int size = 0;
    for (int k = 0; k < K; ++k)
      if (J & (1u << k)) {
        measurements += m[k];
        ++size;
      }
    const std::uint32_t outside = full & ~J;
    int q = 0;
    for (std::uint32_t mask : in_mask)
      if ((outside & ~mask) == 0) ++q;
    const long long need = static_cast<long long>(size) * (s_innov + slack_per_sensor) + q;
    if (measurements < need) return false;
    if (J == full) break;
  }
  return true;
}

bool dcs_sufficient(std::span<const int> m, int s_innov, const LocationMatrix& location) {
  if (location.sensors() > kMaxEnumeratedSensors)
    throw std::invalid_argument("dcs_sufficient: K exceeds the enumeration limit of 20");
  if (!location_full_rank(location))
    throw std::invalid_argument("dcs_sufficient: location matrix is not full rank");
  return subset_condition_holds(m, s_innov, location, 1);
}

bool dcs_necessary_violated(std::span<const int> m, int s_innov, const LocationMatrix& location) {
  if (location.sensors() > kMaxEnumeratedSensors)
    throw std::invalid_argument("dcs_necessary_violated: K exceeds the enumeration limit of 20");
  return !subset_condition_holds(m, s_innov, location, 0);
}

PidrEstimate oracle_pidr(const ScciParams& scci, const EhParams& eh, long long trials,
                         std::uint64_t seed, const OracleOptions& opts) {
  scci.validate();
  check_sensors(eh, scci.K);
  if (trials < 1) throw std::invalid_argument("oracle_pidr: trials must be >= 1");
  const int cap = opts.cap < 0 ? scci.n : opts.cap;
  const int K = scci.K;
  const int slack = opts.condition == OracleCondition::sufficient ? 1 : 0;

  std::vector<char> failed(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, opts.workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t), streams::ensemble));
    const LocationMatrix loc = draw_location(scci, rng);
    const EnergyDraw draw =
        scale_harvest(sample_unit_harvest(K, derive_seed(seed, static_cast<std::uint64_t>(t), streams::energy)), eh);
    std::vector<int> m(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) m[k] = budget(draw.totals[k], eh.tau, cap);

    bool ok = true;
    if (opts.mode == OracleMode::cs) {
      for (int k = 0; k < K && ok; ++k) {
        IndexSet support;
        std::set_union(loc.common_support.begin(), loc.common_support.end(),
                       loc.innov_supports[k].begin(), loc.innov_supports[k].end(),
                       std::back_inserter(support));
        ok = m[k] >= static_cast<int>(support.size()) + slack;
      }
    } else {
      ok = subset_condition_holds(m, scci.s_innov, loc, slack);
    }
    failed[static_cast<std::size_t>(t)] = ok ? 0 : 1;
  });

  long long failures = 0;
  for (char f : failed) failures += f;
  std::ostringstream digest;
  digest << "oracle|" << scci.n << '|' << K << '|' << scci.s_common << '|' << scci.s_innov << '|'
         << eh.lambda_c << '|' << eh.innovation_rate_sum() << '|' << eh.tau << '|'
         << static_cast<int>(opts.mode) << '|' << slack << '|' << cap << '|' << trials;
  return make_estimate(failures, trials, seed, fnv1a64(digest.str()));
}

}  // namespace ehdcs
