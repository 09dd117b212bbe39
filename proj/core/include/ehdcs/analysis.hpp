#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "ehdcs/energy.hpp"
#include "ehdcs/scci.hpp"
#include "ehdcs/stats.hpp"

namespace ehdcs {

// Pr(xi_k >= threshold for every k) under the correlated exponential model.
double prob_all_at_least(const EhParams& eh, double threshold);
// Pr(sum_k xi_k >= threshold) = Pr(K common + sum innovations >= threshold).
double prob_sum_at_least(const EhParams& eh, double threshold);

// Lower bound on the CS probability of incorrect reconstruction: at least s
// measurements are needed at every sensor.
double pidr_cs_bound(const EhParams& eh, int s, int K);

// Lower bound for joint recovery: 1 - min(Pr(all xi_k >= s' tau),
// Pr(sum xi_k >= (s_c' + K s') tau)).
double pidr_dcs_bound(const EhParams& eh, int s_common, int s_innov, int K);

enum class EhRegime { correlated, uncorrelated };

struct BoundReport {
  double cs_bound = 0.0;
  double dcs_bound = 0.0;
  double dcs_term_pointwise = 0.0;  // 1 - Pr(xi_1 >= s' tau, .., xi_K >= s' tau)
  double dcs_term_sum = 0.0;        // 1 - Pr(sum xi_k >= (s_c' + K s') tau)
  std::optional<std::pair<double, double>> correlated;    // (cs, dcs) expansions
  std::optional<std::pair<double, double>> uncorrelated;  // (cs, dcs) expansions
};

BoundReport bound_report(const EhParams& eh, int s, int s_common, int s_innov, int K,
                         bool with_expansions = false);

// Leading terms of the bounds when lambda_k -> inf (correlated) or
// lambda_c -> inf (uncorrelated). Returns (cs, dcs).
std::pair<double, double> asymptotic_bounds(const EhParams& eh, int s, int s_common, int s_innov,
                                            int K, EhRegime regime);

inline constexpr int kMaxEnumeratedSensors = 20;

// Every nonempty J: sum_{k in J} m_k >= |J| s' + q(J, P) + |J|.
// Requires a full-rank location; throws std::invalid_argument otherwise.
bool dcs_sufficient(std::span<const int> m, int s_innov, const LocationMatrix& location);

// Some J: sum_{k in J} m_k < |J| s' + q(J, P).
bool dcs_necessary_violated(std::span<const int> m, int s_innov, const LocationMatrix& location);

// Same conditions without the rank precondition check (used per trial).
bool subset_condition_holds(std::span<const int> m, int s_innov, const LocationMatrix& location,
                            int slack_per_sensor);

enum class OracleMode { cs, dcs };
enum class OracleCondition { sufficient, necessary };

struct OracleOptions {
  OracleMode mode = OracleMode::dcs;
  OracleCondition condition = OracleCondition::sufficient;
  int cap = -1;  // measurement cap per sensor; negative means n
  int workers = 1;
};

// Monte Carlo over supports and harvested energy; a trial succeeds iff the
// budgets satisfy the recovery condition for the drawn supports.
PidrEstimate oracle_pidr(const ScciParams& scci, const EhParams& eh, long long trials,
                         std::uint64_t seed, const OracleOptions& opts = {});

}  // namespace ehdcs
