#include "ehdcs/energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ehdcs/rng.hpp"

namespace ehdcs {

namespace {

double rate_from_mean(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("mean energy must be non-negative");
  return mean == 0.0 ? kInfiniteRate : 1.0 / mean;
}

double mean_from_rate(double rate) { return std::isinf(rate) ? 0.0 : 1.0 / rate; }

bool valid_rate(double r) { return r > 0.0 && !std::isnan(r); }

std::vector<double> finite_rates(std::span<const double> rates) {
  std::vector<double> out;
  out.reserve(rates.size());
  for (double r : rates) {
    if (!valid_rate(r)) throw std::invalid_argument("hypoexp: rates must be positive");
    if (!std::isinf(r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// C_k = prod_{j != k} r_j / (r_j - r_k); sf(t) = sum_k C_k exp(-r_k t).
std::vector<double> closed_form_weights(const std::vector<double>& r) {
  std::vector<double> w(r.size(), 1.0);
  for (std::size_t k = 0; k < r.size(); ++k)
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j == k) continue;
      const double gap = r[j] - r[k];
      if (gap == 0.0) throw std::domain_error("hypoexp closed form: repeated rate");
      w[k] *= r[j] / gap;
    }
  return w;
}

// Beyond this weight magnitude the alternating sum loses more than ~4 digits.
constexpr double kMaxClosedFormWeight = 1e4;

bool closed_form_is_stable(const std::vector<double>& r, std::vector<double>& weights) {
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] - r[i - 1] <= 1e-9 * r[i]) return false;
  weights = closed_form_weights(r);
  for (double w : weights)
    if (!(std::abs(w) <= kMaxClosedFormWeight)) return false;
  return true;
}

// Phase-type form: start in phase 0, leave phase i at rate r_i to phase i+1;
// absorption after the last phase. Returns alpha * exp(T t).
Eigen::RowVectorXd phase_occupancy(const std::vector<double>& r, double t) {
  const Eigen::Index K = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    T(i, i) = -r[static_cast<std::size_t>(i)] * t;
    if (i + 1 < K) T(i, i + 1) = r[static_cast<std::size_t>(i)] * t;
  }
  const Eigen::MatrixXd E = T.exp();
  return E.row(0);
}

}  // namespace

double EhParams::innovation_rate_sum() const {
  double s = 0.0;
  for (double l : lambdas) s += l;
  return s;
}

void EhParams::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("EhParams: need at least one sensor");
  if (!valid_rate(lambda_c)) throw std::invalid_argument("EhParams: lambda_c must be > 0");
  for (double l : lambdas)
    if (!valid_rate(l)) throw std::invalid_argument("EhParams: every lambda_k must be > 0");
  if (!(tau >= 0.0) || std::isinf(tau))
    throw std::invalid_argument("EhParams: tau must be finite and >= 0");
}

std::vector<std::string> EhParams::diagnostics() const {
  std::vector<std::string> out;
  if (lambdas.empty()) out.emplace_back("eh: at least one innovation rate is required");
  if (!valid_rate(lambda_c)) out.emplace_back("eh: lambda_c must be > 0");
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    if (!valid_rate(lambdas[k])) {
      std::ostringstream os;
      os << "eh: lambda_" << k + 1 << " must be > 0";
      out.push_back(os.str());
    }
  if (!(tau >= 0.0) || std::isinf(tau)) out.emplace_back("eh: tau must be finite and >= 0");
  const double sum = innovation_rate_sum();
  if (valid_rate(lambda_c) && !std::isinf(lambda_c) && !std::isinf(sum) &&
      std::abs(sum - lambda_c) <= 1e-9 * lambda_c) {
    std::ostringstream os;
    os << "eh: sum(lambda_k) equals lambda_c (" << lambda_c
       << "); the closed-form bounds require sum(lambda_k) != lambda_c";
    out.push_back(os.str());
  }
  return out;
}

EhParams EhParams::from_means(double mean_common, double mean_innov, int K, double tau) {
  if (K < 1) throw std::invalid_argument("EhParams: K must be >= 1");
  EhParams p;
  p.lambda_c = rate_from_mean(mean_common);
  p.lambdas.assign(static_cast<std::size_t>(K), rate_from_mean(mean_innov));
  p.tau = tau;
  p.validate();
  return separate_rates(std::move(p));
}

EhParams EhParams::from_total(double total_mean, double ratio, int K, double tau) {
  if (!(total_mean >= 0.0)) throw std::invalid_argument("EhParams: total mean must be >= 0");
  if (!(ratio >= 0.0)) throw std::invalid_argument("EhParams: ratio must be >= 0");
  // 1/lambda_c = r/(r+1) E, 1/lambda = E/(r+1).
  double mean_common, mean_innov;
  if (std::isinf(ratio)) {
    mean_common = total_mean;
    mean_innov = 0.0;
  } else {
    mean_common = total_mean * ratio / (ratio + 1.0);
    mean_innov = total_mean / (ratio + 1.0);
  }
  return from_means(mean_common, mean_innov, K, tau);
}

EhParams separate_rates(EhParams params) {
  const double sum = params.innovation_rate_sum();
  if (!std::isinf(params.lambda_c) && !std::isinf(sum) &&
      std::abs(sum - params.lambda_c) <= 1e-9 * params.lambda_c)
    params.lambda_c *= 1.0 + 1e-7;
  return params;
}

EnergyDraw sample_unit_harvest(int K, std::uint64_t seed) {
  Rng rng(seed);
  std::exponential_distribution<double> unit(1.0);
  EnergyDraw d;
  d.common = unit(rng);
  d.innovations.resize(static_cast<std::size_t>(K));
  for (auto& v : d.innovations) v = unit(rng);
  d.totals.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) d.totals[k] = d.common + d.innovations[k];
  return d;
}

EnergyDraw scale_harvest(const EnergyDraw& unit, const EhParams& params) {
  if (unit.innovations.size() != params.lambdas.size())
    throw std::invalid_argument("scale_harvest: sensor count mismatch");
  EnergyDraw d;
  d.common = unit.common * mean_from_rate(params.lambda_c);
  d.innovations.resize(unit.innovations.size());
  d.totals.resize(unit.innovations.size());
  for (std::size_t k = 0; k < unit.innovations.size(); ++k) {
    d.innovations[k] = unit.innovations[k] * mean_from_rate(params.lambdas[k]);
    d.totals[k] = d.common + d.innovations[k];
  }
  return d;
}

EnergyDraw sample_harvest(const EhParams& params, std::uint64_t seed) {
  params.validate();
  return scale_harvest(sample_unit_harvest(params.sensors(), seed), params);
}

int budget(double energy, double tau, int cap) {
  if (!(energy >= 0.0)) throw std::invalid_argument("budget: energy must be >= 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("budget: tau must be >= 0");
  if (cap < 0) throw std::invalid_argument("budget: cap must be >= 0");
  if (tau == 0.0) return cap;
  const double ratio = energy / tau;
  if (ratio >= static_cast<double>(cap)) return cap;
  auto m = static_cast<long long>(std::floor(ratio));
  // Never spend more than harvested, whatever the rounding of energy / tau.
  while (m > 0 && static_cast<double>(m) * tau > energy) --m;
  while (static_cast<double>(m + 1) * tau <= energy && m + 1 <= cap) ++m;
  return static_cast<int>(m);
}

double hypoexp_pdf_closed_form(std::span<const double> rates, double t) {
  const auto r = finite_rates(rates);
  if (r.empty()) throw std::domain_error("hypoexp: degenerate (all rates infinite)");
  if (t < 0.0) return 0.0;
  const auto w = closed_form_weights(r);
  double pdf = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) pdf += w[k] * r[k] * std::exp(-r[k] * t);
  return std::max(pdf, 0.0);
}

double hypoexp_sf_closed_form(std::span<const double> rates, double t) {
  const auto r = finite_rates(rates);
  if (t <= 0.0) return 1.0;
  if (r.empty()) return 0.0;
  const auto w = closed_form_weights(r);
  double sf = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) sf += w[k] * std::exp(-r[k] * t);
  return std::clamp(sf, 0.0, 1.0);
}

double hypoexp_pdf(std::span<const double> rates, double t) {
  const auto r = finite_rates(rates);
  if (r.empty()) throw std::domain_error("hypoexp: degenerate (all rates infinite)");
  if (t < 0.0) return 0.0;
  if (r.size() == 1) return r[0] * std::exp(-r[0] * t);
  std::vector<double> w;
  if (closed_form_is_stable(r, w)) {
    double pdf = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) pdf += w[k] * r[k] * std::exp(-r[k] * t);
    return std::max(pdf, 0.0);
  }
  // Density = occupancy of the last phase times its exit rate.
  const auto occ = phase_occupancy(r, t);
  return std::max(occ(occ.size() - 1) * r.back(), 0.0);
}

double hypoexp_sf(std::span<const double> rates, double t) {
  const auto r = finite_rates(rates);
  if (t <= 0.0) return 1.0;
  if (r.empty()) return 0.0;
  if (r.size() == 1) return std::exp(-r[0] * t);
  std::vector<double> w;
  if (closed_form_is_stable(r, w)) {
    double sf = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) sf += w[k] * std::exp(-r[k] * t);
    return std::clamp(sf, 0.0, 1.0);
  }
  return std::clamp(phase_occupancy(r, t).sum(), 0.0, 1.0);
}

double solar_slot_energy(double panel_area_cm2, double power_density_uw_per_cm2,
                         double window_s) {
  if (!(panel_area_cm2 >= 0.0) || !(power_density_uw_per_cm2 >= 0.0) || !(window_s >= 0.0))
    throw std::invalid_argument("solar_slot_energy: inputs must be non-negative");
  return panel_area_cm2 * power_density_uw_per_cm2 * window_s;
}

}  // namespace ehdcs
