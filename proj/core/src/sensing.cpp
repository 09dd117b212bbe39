#include "ehdcs/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ehdcs/rng.hpp"

namespace ehdcs {

int SensingEnsemble::columns() const {
  return matrices.empty() ? 0 : static_cast<int>(matrices.front().cols());
}

int SensingEnsemble::total_rows() const {
  int rows = 0;
  for (const auto& A : matrices) rows += static_cast<int>(A.rows());
  return rows;
}

Matrix gaussian_matrix(int m, int n, std::uint64_t seed) {
  if (m < 0 || n < 1) throw std::invalid_argument("gaussian_matrix: need m >= 0, n >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
  return A;
}

IndexSet subsample_rows(int m, int n, std::uint64_t seed) {
  if (m < 0 || n < 1 || m > n)
    throw std::invalid_argument("subsample: need 0 <= m <= n, got m=" + std::to_string(m) +
                                ", n=" + std::to_string(n));
  Rng rng(seed);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(m);
  return pool;
}

Matrix subsample_matrix(int m, int n, std::uint64_t seed) {
  const IndexSet rows = subsample_rows(m, n, seed);
  Matrix S = Matrix::Zero(m, n);
  for (int i = 0; i < m; ++i) S(i, rows[i]) = 1.0;
  return S;
}

Vector acquire(const Matrix& A, const Vector& x) {
  if (A.cols() != x.size())
    throw std::invalid_argument("acquire: matrix has " + std::to_string(A.cols()) +
                                " columns but signal has length " + std::to_string(x.size()));
  return A * x;
}

Matrix build_extended(const SensingEnsemble& ensemble) {
  const int K = ensemble.sensors();
  if (K < 1) throw std::invalid_argument("build_extended: need at least one sensor");
  const int n = ensemble.columns();
  for (const auto& A : ensemble.matrices)
    if (A.cols() != n) throw std::invalid_argument("build_extended: column counts differ");

  Matrix ext = Matrix::Zero(ensemble.total_rows(), static_cast<Eigen::Index>(K + 1) * n);
  Eigen::Index row = 0;
  for (int k = 0; k < K; ++k) {
    const Matrix& A = ensemble.matrices[k];
    if (A.rows() == 0) continue;
    ext.block(row, 0, A.rows(), n) = A;
    ext.block(row, static_cast<Eigen::Index>(k + 1) * n, A.rows(), n) = A;
    row += A.rows();
  }
  return ext;
}

Vector stack_measurements(const MeasurementSet& measurements) {
  Eigen::Index total = 0;
  for (const auto& y : measurements.y) total += y.size();
  Vector out(total);
  Eigen::Index pos = 0;
  for (const auto& y : measurements.y) {
    out.segment(pos, y.size()) = y;
    pos += y.size();
  }
  return out;
}

Quantized quantize(const Vector& y, int bits) {
  if (bits < 1 || bits > 31) throw std::invalid_argument("quantize: bits must lie in [1, 31]");
  if (y.size() == 0) throw std::invalid_argument("quantize: empty input");

  Quantized q;
  q.info.bits = bits;
  q.info.min = y.minCoeff();
  q.info.max = y.maxCoeff();
  q.codes.assign(static_cast<std::size_t>(y.size()), 0);

  const double levels = std::ldexp(1.0, bits) - 1.0;
  const double range = q.info.max - q.info.min;
  if (!(range > 0.0)) {
    q.info.degenerate = true;
    q.info.step = 0.0;
    q.passthrough = y;
    return q;
  }
  q.info.step = range / levels;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double level = std::round((y(i) - q.info.min) / q.info.step);
    q.codes[static_cast<std::size_t>(i)] =
        static_cast<std::uint32_t>(std::clamp(level, 0.0, levels));
  }
  return q;
}

Vector dequantize(const Quantized& q) {
  if (q.info.degenerate) return q.passthrough;
  Vector out(static_cast<Eigen::Index>(q.codes.size()));
  for (std::size_t i = 0; i < q.codes.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = q.info.min + q.info.step * q.codes[i];
  return out;
}

}  // namespace ehdcs
