#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ehdcs {

inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

// Correlated exponential harvesting model. A rate of +inf denotes a component
// that is identically zero (e.g. no common energy at all).
struct EhParams {
  double lambda_c = 1.0 / 150.0;
  std::vector<double> lambdas;  // one innovation rate per sensor
  double tau = 1.0;             // energy per measurement; 0 means free

  int sensors() const { return static_cast<int>(lambdas.size()); }
  double innovation_rate_sum() const;

  // Hard errors only (non-positive or NaN rates, negative tau, no sensors).
  void validate() const;
  // Every violated invariant as a readable message, including the
  // sum(lambda_k) != lambda_c requirement of the closed-form bounds.
  std::vector<std::string> diagnostics() const;

  // K identical innovation means; a mean of 0 maps to an infinite rate.
  static EhParams from_means(double mean_common, double mean_innov, int K, double tau);
  // Total mean energy per sensor (1/lambda_c + 1/lambda) split by the ratio
  // lambda/lambda_c; ratio 0 removes the common part, +inf the innovations.
  static EhParams from_total(double total_mean, double ratio, int K, double tau);
};

// Moves lambda_c by a relative 1e-7 when |sum(lambda_k) - lambda_c| <= 1e-9 lambda_c.
EhParams separate_rates(EhParams params);

struct EnergyDraw {
  double common = 0.0;
  std::vector<double> innovations;
  std::vector<double> totals;
};

// Unit-mean exponential draws; scaling them by the component means gives a
// draw from any EhParams, which keeps draws coupled across energy sweeps.
EnergyDraw sample_unit_harvest(int K, std::uint64_t seed);
EnergyDraw scale_harvest(const EnergyDraw& unit, const EhParams& params);
EnergyDraw sample_harvest(const EhParams& params, std::uint64_t seed);

// min(floor(energy / tau), cap); tau == 0 yields cap.
int budget(double energy, double tau, int cap);

// Hypoexponential law of a sum of independent exponentials. Infinite rates
// contribute nothing. Close rates are evaluated through the phase-type
// representation instead of the alternating closed form.
double hypoexp_pdf(std::span<const double> rates, double t);
// Pr(sum >= t); equals 1 for t <= 0.
double hypoexp_sf(std::span<const double> rates, double t);

// Closed-form evaluation only; throws std::domain_error on repeated rates.
double hypoexp_pdf_closed_form(std::span<const double> rates, double t);
double hypoexp_sf_closed_form(std::span<const double> rates, double t);

// µW/cm^2 * cm^2 * s = µJ.
double solar_slot_energy(double panel_area_cm2, double power_density_uw_per_cm2,
                         double window_s);

}  // namespace ehdcs
