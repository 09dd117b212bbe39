#pragma once

#include <stdexcept>
#include <string>

#include "ehdcs/types.hpp"

namespace ehdcs {

enum class SolverAlgorithm {
  homotopy,  // exact l1 regularization path followed to the constraint
  admm,      // operator splitting with SVD-based projection
};

struct SolveOptions {
  double eq_tolerance = 1e-6;  // ||Ax - y|| / max(1, ||y||) at return
  int max_iterations = 10000;
  double penalty = 1.0;               // ADMM rho
  double objective_tolerance = 1e-9;  // ADMM relative stopping tolerance
  SolverAlgorithm algorithm = SolverAlgorithm::homotopy;
  bool fallback = true;  // retry with the other algorithm on failure

  void validate() const;
};

struct SolveResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  SolverAlgorithm algorithm = SolverAlgorithm::homotopy;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The constraint set is empty (y is not reachable within the radius).
class InfeasibleError : public SolverError {
 public:
  InfeasibleError(const std::string& what, double residual)
      : SolverError(what), residual(residual) {}
  double residual;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, int iterations, double primal, double dual)
      : SolverError(what), iterations(iterations), primal_residual(primal), dual_residual(dual) {}
  int iterations;
  double primal_residual;
  double dual_residual;
};

// min ||x||_1 s.t. Ax = y.
SolveResult basis_pursuit(const Matrix& A, const Vector& y, const SolveOptions& opts = {});

// min ||x||_1 s.t. ||Ax - y||_2 <= epsilon.
SolveResult basis_pursuit_denoise(const Matrix& A, const Vector& y, double epsilon,
                                  const SolveOptions& opts = {});

struct OmpResult {
  Vector x;
  IndexSet support;  // selection order
  bool stopped_early = false;
  std::string warning;
};

OmpResult omp(const Matrix& A, const Vector& y, int sparsity);

}  // namespace ehdcs
