#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ehdcs/types.hpp"

namespace ehdcs {

enum class SensingKind { dense_gaussian, row_subsample };

// Equivalent sensing matrices A_k = Phi_k Psi, one per sensor.
struct SensingEnsemble {
  std::vector<Matrix> matrices;
  SensingKind kind = SensingKind::dense_gaussian;

  int sensors() const { return static_cast<int>(matrices.size()); }
  int columns() const;
  int total_rows() const;
};

struct QuantizerInfo {
  int bits = 8;
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;        // distance between adjacent reconstruction levels
  bool degenerate = false;  // constant input; values passed through unchanged
};

struct Quantized {
  std::vector<std::uint32_t> codes;
  Vector passthrough;  // only populated when info.degenerate
  QuantizerInfo info;
};

struct MeasurementSet {
  std::vector<Vector> y;
  std::vector<std::optional<QuantizerInfo>> quant;

  int sensors() const { return static_cast<int>(y.size()); }
};

// Entries i.i.d. N(0,1), generated row by row: the first r rows do not depend
// on m, so budgets drawn for the same seed give nested matrices.
Matrix gaussian_matrix(int m, int n, std::uint64_t seed);

// m distinct rows of the n x n identity chosen uniformly; indices in draw order.
IndexSet subsample_rows(int m, int n, std::uint64_t seed);
Matrix subsample_matrix(int m, int n, std::uint64_t seed);

Vector acquire(const Matrix& A, const Vector& x);

// (sum m_k) x (K+1)n block matrix; block row k is [A_k, 0, .., A_k, .., 0].
Matrix build_extended(const SensingEnsemble& ensemble);
Vector stack_measurements(const MeasurementSet& measurements);

// Uniform quantizer over [min(y), max(y)] with 2^bits reconstruction levels
// min + i * step, step = (max - min) / (2^bits - 1).
Quantized quantize(const Vector& y, int bits);
Vector dequantize(const Quantized& q);

}  // namespace ehdcs
