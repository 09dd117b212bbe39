#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace ehdcs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Sorted, duplicate-free list of 0-based positions.
using IndexSet = std::vector<int>;

// Orthonormal sparsifying basis shared (read-only) between trials.
using BasisPtr = std::shared_ptr<const Matrix>;

BasisPtr identity_basis(int n);

}  // namespace ehdcs
