#include "ehdcs/recovery.hpp"

#include <cmath>
#include <stdexcept>

namespace ehdcs {

namespace {

void check_inputs(const SensingEnsemble& sensing, const MeasurementSet& measurements,
                  const Matrix& basis) {
  const int K = sensing.sensors();
  if (K < 1) throw std::invalid_argument("recovery: need at least one sensor");
  if (measurements.sensors() != K)
    throw std::invalid_argument("recovery: measurement count differs from sensor count");
  const int n = sensing.columns();
  if (basis.rows() != n || basis.cols() != n)
    throw std::invalid_argument("recovery: basis must be n x n");
  for (int k = 0; k < K; ++k) {
    if (sensing.matrices[k].cols() != n)
      throw std::invalid_argument("recovery: sensing matrices disagree on n");
    if (measurements.y[k].size() != sensing.matrices[k].rows())
      throw std::invalid_argument("recovery: measurement length differs from m_k");
  }
}

double quant_radius2(const MeasurementSet& ms, int k) {
  if (k >= static_cast<int>(ms.quant.size()) || !ms.quant[k]) return 0.0;
  const auto& q = *ms.quant[k];
  if (q.degenerate) return 0.0;
  return static_cast<double>(ms.y[k].size()) * 0.25 * q.step * q.step;
}

RecoveryResult empty_result(int K, int n) {
  RecoveryResult r;
  r.x_hat.assign(K, Vector::Zero(n));
  r.f_hat.assign(K, Vector::Zero(n));
  r.sensor_failed.assign(K, 0);
  return r;
}

}  // namespace

RecoveryResult cs_recover(const SensingEnsemble& sensing, const MeasurementSet& measurements,
                          const Matrix& basis, const RecoveryOptions& opts) {
  check_inputs(sensing, measurements, basis);
  const int K = sensing.sensors();
  const int n = sensing.columns();
  RecoveryResult r = empty_result(K, n);

  for (int k = 0; k < K; ++k) {
    const Matrix& A = sensing.matrices[k];
    if (A.rows() == 0) {
      r.sensor_failed[k] = 1;
      continue;
    }
    const double eps2 = opts.denoise_quantized ? quant_radius2(measurements, k) : 0.0;
    try {
      const SolveResult s = eps2 > 0.0
                                ? basis_pursuit_denoise(A, measurements.y[k], std::sqrt(eps2), opts.solve)
                                : basis_pursuit(A, measurements.y[k], opts.solve);
      r.x_hat[k] = s.x;
      r.f_hat[k] = basis * s.x;
    } catch (const SolverError&) {
      r.sensor_failed[k] = 1;
      ++r.solver_failures;
    }
  }
  return r;
}

RecoveryResult dcs_recover(const SensingEnsemble& sensing, const MeasurementSet& measurements,
                           const Matrix& basis, const RecoveryOptions& opts) {
  check_inputs(sensing, measurements, basis);
  const int K = sensing.sensors();
  const int n = sensing.columns();
  RecoveryResult r = empty_result(K, n);

  if (sensing.total_rows() == 0) {
    r.sensor_failed.assign(K, 1);
    return r;
  }
  const Matrix ext = build_extended(sensing);
  const Vector y = stack_measurements(measurements);
  double eps2 = 0.0;
  if (opts.denoise_quantized)
    for (int k = 0; k < K; ++k) eps2 += quant_radius2(measurements, k);

  try {
    const SolveResult s =
        eps2 > 0.0 ? basis_pursuit_denoise(ext, y, std::sqrt(eps2), opts.solve)
                   : basis_pursuit(ext, y, opts.solve);
    r.z_tilde = s.x;
    const Vector zc = s.x.head(n);
    for (int k = 0; k < K; ++k) {
      r.x_hat[k] = zc + s.x.segment(static_cast<Eigen::Index>(k + 1) * n, n);
      r.f_hat[k] = basis * r.x_hat[k];
    }
  } catch (const SolverError&) {
    r.sensor_failed.assign(K, 1);
    r.solver_failures = 1;
  }
  return r;
}

double relative_squared_error(const Vector& f, const Vector& f_hat) {
  if (f.size() != f_hat.size()) throw std::invalid_argument("relative error: length mismatch");
  const double ref = f.squaredNorm();
  if (!(ref > 0.0)) throw std::domain_error("relative error: reference signal has zero norm");
  return (f_hat - f).squaredNorm() / ref;
}

bool is_success(std::span<const Vector> f, std::span<const Vector> f_hat, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("is_success: threshold must be > 0");
  if (f.size() != f_hat.size()) throw std::invalid_argument("is_success: sensor count mismatch");
  bool ok = true;
  for (std::size_t k = 0; k < f.size(); ++k)
    ok = (relative_squared_error(f[k], f_hat[k]) < threshold) && ok;
  return ok;
}

void assess(RecoveryResult& result, std::span<const Vector> reference, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("assess: threshold must be > 0");
  if (reference.size() != result.f_hat.size())
    throw std::invalid_argument("assess: sensor count mismatch");
  result.per_sensor_rel_err.resize(reference.size());
  result.success = true;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double err = relative_squared_error(reference[k], result.f_hat[k]);
    result.per_sensor_rel_err[k] = err;
    if (result.sensor_failed[k] || !(err < threshold)) result.success = false;
  }
}

}  // namespace ehdcs
