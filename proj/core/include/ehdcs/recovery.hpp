#pragma once

#include <span>
#include <vector>

#include "ehdcs/sensing.hpp"
#include "ehdcs/solver.hpp"
#include "ehdcs/types.hpp"

namespace ehdcs {

struct RecoveryOptions {
  SolveOptions solve;
  // Quantized sensors are decoded with basis pursuit denoising using the
  // worst-case quantization radius sqrt(m) * step / 2.
  bool denoise_quantized = true;
};

struct RecoveryResult {
  std::vector<Vector> x_hat;
  std::vector<Vector> f_hat;
  std::vector<double> per_sensor_rel_err;  // filled by assess()
  std::vector<char> sensor_failed;         // solver failure or no measurements
  Vector z_tilde;                          // joint solution [z_c; z_1; ..; z_K] (DCS)
  int solver_failures = 0;
  bool success = false;
};

// Independent per-sensor l1 recovery.
RecoveryResult cs_recover(const SensingEnsemble& sensing, const MeasurementSet& measurements,
                          const Matrix& basis, const RecoveryOptions& opts = {});

// Joint recovery over the extended block system.
RecoveryResult dcs_recover(const SensingEnsemble& sensing, const MeasurementSet& measurements,
                           const Matrix& basis, const RecoveryOptions& opts = {});

// ||f_hat - f||^2 / ||f||^2; throws std::domain_error for a zero reference.
double relative_squared_error(const Vector& f, const Vector& f_hat);

// True iff every sensor's relative squared error is below threshold.
bool is_success(std::span<const Vector> f, std::span<const Vector> f_hat, double threshold);

// Fills per-sensor errors and the all-sensor success flag.
void assess(RecoveryResult& result, std::span<const Vector> reference, double threshold);

}  // namespace ehdcs
