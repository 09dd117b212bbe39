#include "ehdcs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace ehdcs {

void SolveOptions::validate() const {
  if (!(eq_tolerance > 0.0)) throw std::invalid_argument("SolveOptions: eq_tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("SolveOptions: max_iterations must be >= 1");
  if (!(penalty > 0.0)) throw std::invalid_argument("SolveOptions: penalty must be > 0");
  if (!(objective_tolerance > 0.0))
    throw std::invalid_argument("SolveOptions: objective_tolerance must be > 0");
}

namespace {

double relative_residual(const Matrix& A, const Vector& x, const Vector& y) {
  return (A * x - y).norm() / std::max(1.0, y.norm());
}

void check_dimensions(const Matrix& A, const Vector& y) {
  if (A.rows() != y.size()) {
    std::ostringstream os;
    os << "solver: A has " << A.rows() << " rows but y has length " << y.size();
    throw std::invalid_argument(os.str());
  }
  if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("solver: empty system");
}

// Least-squares residual of y against range(A), used to classify failures.
double range_residual(const Matrix& A, const Vector& y) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Vector x = cod.solve(y);
  return (A * x - y).norm();
}

// ---------------------------------------------------------------------------
// Homotopy: follows the lasso path x(lambda) of 1/2||Ax-y||^2 + lambda||x||_1
// from lambda = ||A'y||_inf down to the point where ||Ax - y|| = epsilon (or
// lambda = 0 for the equality-constrained problem). The active set changes one
// index at a time; the inverse Gram matrix of the active columns is updated by
// bordering and refreshed periodically.
// ---------------------------------------------------------------------------
class LassoPath {
 public:
  LassoPath(const Matrix& A, const Vector& y, double epsilon, int max_iterations)
      : A_(A), y_(y), epsilon_(epsilon), max_iterations_(max_iterations) {}

  // Returns nullopt when the path could not be completed.
  std::optional<SolveResult> run();

 private:
  bool add(int j);
  void remove(int pos);
  void refresh_gram();

  const Matrix& A_;
  const Vector& y_;
  double epsilon_;
  int max_iterations_;

  Vector x_, r_, c_;
  double lambda_ = 0.0;
  std::vector<int> active_;
  std::vector<double> sign_;
  std::vector<char> is_active_, blocked_;
  Matrix gram_inv_;
  int updates_since_refresh_ = 0;
};

bool LassoPath::add(int j) {
  const Eigen::Index k = static_cast<Eigen::Index>(active_.size());
  const auto col = A_.col(j);
  const double self = col.squaredNorm();
  Vector b(k);
  for (Eigen::Index i = 0; i < k; ++i) b(i) = A_.col(active_[i]).dot(col);
  const Vector u = gram_inv_ * b;
  const double schur = self - b.dot(u);
  if (!(schur > 1e-10 * self)) {
    // Column lies in the span of the active set (e.g. duplicated blocks).
    blocked_[j] = 1;
    return false;
  }
  Matrix next(k + 1, k + 1);
  next.topLeftCorner(k, k) = gram_inv_ + (u * u.transpose()) / schur;
  next.topRightCorner(k, 1) = -u / schur;
  next.bottomLeftCorner(1, k) = -u.transpose() / schur;
  next(k, k) = 1.0 / schur;
  gram_inv_.swap(next);
  active_.push_back(j);
  sign_.push_back(c_(j) >= 0.0 ? 1.0 : -1.0);
  is_active_[j] = 1;
  ++updates_since_refresh_;
  return true;
}

void LassoPath::remove(int pos) {
  const Eigen::Index k = static_cast<Eigen::Index>(active_.size());
  const Eigen::Index p = pos;
  // Move row/column p to the end, then take the Schur complement.
  Matrix perm = gram_inv_;
  if (p != k - 1) {
    perm.row(p).swap(perm.row(k - 1));
    perm.col(p).swap(perm.col(k - 1));
  }
  const double pivot = perm(k - 1, k - 1);
  Matrix next = perm.topLeftCorner(k - 1, k - 1) -
                perm.topRightCorner(k - 1, 1) * perm.bottomLeftCorner(1, k - 1) / pivot;
  gram_inv_.swap(next);

  const int j = active_[pos];
  x_(j) = 0.0;
  is_active_[j] = 0;
  active_[pos] = active_.back();
  sign_[pos] = sign_.back();
  active_.pop_back();
  sign_.pop_back();
  std::fill(blocked_.begin(), blocked_.end(), 0);
  ++updates_since_refresh_;
}

void LassoPath::refresh_gram() {
  const Eigen::Index k = static_cast<Eigen::Index>(active_.size());
  Matrix As(A_.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) As.col(i) = A_.col(active_[i]);
  const Matrix G = As.transpose() * As;
  Eigen::LDLT<Matrix> ldlt(G);
  gram_inv_ = ldlt.solve(Matrix::Identity(k, k));
  c_ = A_.transpose() * r_;
  updates_since_refresh_ = 0;
}

std::optional<SolveResult> LassoPath::run() {
  const Eigen::Index m = A_.rows();
  const Eigen::Index N = A_.cols();
  x_ = Vector::Zero(N);
  r_ = y_;
  c_ = A_.transpose() * y_;
  is_active_.assign(static_cast<std::size_t>(N), 0);
  blocked_.assign(static_cast<std::size_t>(N), 0);
  gram_inv_.resize(0, 0);

  SolveResult result;
  result.algorithm = SolverAlgorithm::homotopy;
  if (y_.norm() <= epsilon_) {
    result.x = x_;
    result.relative_residual = y_.norm() / std::max(1.0, y_.norm());
    return result;
  }

  Eigen::Index first = 0;
  lambda_ = c_.cwiseAbs().maxCoeff(&first);
  if (!(lambda_ > 0.0)) return std::nullopt;  // y orthogonal to range(A)
  const double lambda0 = lambda_;
  add(static_cast<int>(first));

  const double eps2 = epsilon_ * epsilon_;
  int last_removed = -1, last_added = static_cast<int>(first);
  int it = 0;
  for (; it < max_iterations_; ++it) {
    if (active_.empty()) return std::nullopt;
    if (updates_since_refresh_ >= 32) refresh_gram();

    const Eigen::Index k = static_cast<Eigen::Index>(active_.size());
    Vector s(k);
    for (Eigen::Index i = 0; i < k; ++i) s(i) = sign_[i];
    const Vector d = gram_inv_ * s;
    Vector v = Vector::Zero(m);
    for (Eigen::Index i = 0; i < k; ++i) v.noalias() += d(i) * A_.col(active_[i]);
    const Vector a = A_.transpose() * v;

    enum class Event { end, add, remove, radius } event = Event::end;
    double gamma = lambda_;
    int which = -1;

    for (Eigen::Index j = 0; j < N; ++j) {
      if (is_active_[j] || blocked_[j]) continue;
      const double up = 1.0 - a(j);
      const double down = 1.0 + a(j);
      if (up > 1e-12) {
        const double g = std::max(0.0, (lambda_ - c_(j)) / up);
        if (g < gamma && !(j == last_removed && g <= 1e-12 * lambda0)) {
          gamma = g;
          event = Event::add;
          which = static_cast<int>(j);
        }
      }
      if (down > 1e-12) {
        const double g = std::max(0.0, (lambda_ + c_(j)) / down);
        if (g < gamma && !(j == last_removed && g <= 1e-12 * lambda0)) {
          gamma = g;
          event = Event::add;
          which = static_cast<int>(j);
        }
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      const int j = active_[i];
      if (d(i) == 0.0) continue;
      if (j == last_added && x_(j) == 0.0) continue;
      const double g = -x_(j) / d(i);
      if (g > 0.0 && g < gamma) {
        gamma = g;
        event = Event::remove;
        which = static_cast<int>(i);
      }
    }
    if (eps2 > 0.0) {
      // ||r - g v||^2 = eps^2, smallest positive root.
      const double vv = v.squaredNorm();
      const double rv = r_.dot(v);
      const double rr = r_.squaredNorm();
      if (vv > 0.0) {
        const double disc = rv * rv - vv * (rr - eps2);
        if (disc >= 0.0) {
          const double g = (rv - std::sqrt(disc)) / vv;
          if (g >= 0.0 && g < gamma) {
            gamma = g;
            event = Event::radius;
          }
        }
      }
    }

    for (Eigen::Index i = 0; i < k; ++i) x_(active_[i]) += gamma * d(i);
    r_.noalias() -= gamma * v;
    c_.noalias() -= gamma * a;
    lambda_ -= gamma;

    last_removed = -1;
    last_added = -1;
    if (event == Event::end || event == Event::radius) {
      lambda_ = std::max(lambda_, 0.0);
      break;
    }
    if (event == Event::add) {
      if (add(which)) last_added = which;
    } else {
      last_removed = active_[which];
      remove(which);
    }
    if (lambda_ <= 1e-14 * lambda0) break;
  }
  if (it >= max_iterations_) return std::nullopt;

  result.iterations = it + 1;
  result.x = x_;
  if (eps2 == 0.0 && !active_.empty()) {
    // Re-solve on the final support to remove accumulated drift.
    const Eigen::Index k = static_cast<Eigen::Index>(active_.size());
    Matrix As(m, k);
    for (Eigen::Index i = 0; i < k; ++i) As.col(i) = A_.col(active_[i]);
    const Vector xs = As.colPivHouseholderQr().solve(y_);
    Vector polished = Vector::Zero(N);
    for (Eigen::Index i = 0; i < k; ++i) polished(active_[i]) = xs(i);
    if (xs.allFinite() && relative_residual(A_, polished, y_) <= relative_residual(A_, x_, y_))
      result.x = polished;
  }
  result.relative_residual = relative_residual(A_, result.x, y_);
  return result;
}

// ---------------------------------------------------------------------------
// ADMM on min ||z||_1 + I_C(x) s.t. x = z, C = {x : ||Ax - y|| <= eps}. The
// projection onto C is exact through a thin SVD of A.
// ---------------------------------------------------------------------------
class ConstraintProjector {
 public:
  ConstraintProjector(const Matrix& A, const Vector& y, double epsilon) : epsilon_(epsilon) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double tol = std::max(A.rows(), A.cols()) * sv(0) *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    sigma_ = sv.head(rank);
    U_ = svd.matrixU().leftCols(rank);
    V_ = svd.matrixV().leftCols(rank);
    q_ = U_.transpose() * y;
    perp2_ = (y - U_ * q_).squaredNorm();
  }

  // Squared distance from y to range(A).
  double infeasibility() const { return perp2_; }
  bool feasible(double slack) const { return std::sqrt(perp2_) <= epsilon_ + slack; }

  Vector project(const Vector& v) const {
    const Vector p = V_.transpose() * v;
    if (epsilon_ == 0.0) return v + V_ * (q_.cwiseQuotient(sigma_) - p);
    const Vector gap = sigma_.cwiseProduct(p) - q_;
    const double eps2 = epsilon_ * epsilon_;
    if (gap.squaredNorm() + perp2_ <= eps2) return v;
    // g(mu) = sum (gap_i / (1 + mu s_i^2))^2 + perp2 - eps2, decreasing in mu.
    auto g = [&](double mu) {
      return (gap.array() / (1.0 + mu * sigma_.array().square())).matrix().squaredNorm() +
             perp2_ - eps2;
    };
    double lo = 0.0, hi = 1.0;
    while (g(hi) > 0.0 && hi < 1e300) hi *= 4.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double mu = hi;
    const Vector coord = (p.array() + mu * sigma_.array() * q_.array()) /
                         (1.0 + mu * sigma_.array().square());
    return v + V_ * (coord - p);
  }

 private:
  double epsilon_;
  Vector sigma_, q_;
  Matrix U_, V_;
  double perp2_ = 0.0;
};

Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double x) {
    return x > t ? x - t : (x < -t ? x + t : 0.0);
  });
}

constexpr int kBalanceIterations = 500;

SolveResult admm_solve(const Matrix& A, const Vector& y, double epsilon, const SolveOptions& opts) {
  const Eigen::Index N = A.cols();
  ConstraintProjector proj(A, y, epsilon);
  if (!proj.feasible(opts.eq_tolerance * std::max(1.0, y.norm()))) {
    std::ostringstream os;
    os << "admm: measurements are not reachable (distance to range(A) "
       << std::sqrt(proj.infeasibility()) << " > epsilon " << epsilon << ")";
    throw InfeasibleError(os.str(), std::sqrt(proj.infeasibility()));
  }

  double rho = opts.penalty;
  Vector x = proj.project(Vector::Zero(N));
  Vector z = x, u = Vector::Zero(N);
  const double tol = opts.objective_tolerance;
  double primal = 0.0, dual = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations; ++it) {
    x = proj.project(z - u);
    const Vector z_old = z;
    z = soft_threshold(x + u, 1.0 / rho);
    u += x - z;
    primal = (x - z).norm();
    dual = rho * (z - z_old).norm();
    const double scale = std::max({x.norm(), z.norm(), 1e-300});
    if (primal <= tol * scale + 1e-12 && dual <= tol * std::max(rho * u.norm(), 1.0) + 1e-12) {
      converged = true;
      break;
    }
    // Residual balancing, frozen after a warm-up so the fixed-rho convergence
    // guarantee applies; u is the scaled dual and is rescaled with rho.
    if (it < kBalanceIterations && it % 10 == 9) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }
  if (!converged)
    throw ConvergenceError("admm: iteration limit reached", it, primal, dual);

  SolveResult result;
  result.algorithm = SolverAlgorithm::admm;
  result.iterations = it + 1;
  result.x = x;

  // Polish on the support of z when it identifies a determined subsystem.
  const double zmax = z.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < N; ++j)
    if (std::abs(z(j)) > 1e-7 * zmax) support.push_back(j);
  if (epsilon == 0.0 && !support.empty() && static_cast<Eigen::Index>(support.size()) <= A.rows()) {
    Matrix As(A.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) As.col(static_cast<Eigen::Index>(i)) = A.col(support[i]);
    const Vector xs = As.colPivHouseholderQr().solve(y);
    Vector polished = Vector::Zero(N);
    for (std::size_t i = 0; i < support.size(); ++i) polished(support[i]) = xs(static_cast<Eigen::Index>(i));
    if (xs.allFinite() && relative_residual(A, polished, y) <= opts.eq_tolerance &&
        polished.lpNorm<1>() <= x.lpNorm<1>() * (1.0 + 1e-9))
      result.x = polished;
  }
  result.relative_residual = relative_residual(A, result.x, y);
  return result;
}

SolveResult homotopy_solve(const Matrix& A, const Vector& y, double epsilon, const SolveOptions& opts) {
  LassoPath path(A, y, epsilon, opts.max_iterations);
  auto result = path.run();
  if (!result) {
    const double dist = range_residual(A, y);
    if (dist > epsilon + opts.eq_tolerance * std::max(1.0, y.norm()))
      throw InfeasibleError("homotopy: measurements are not reachable", dist);
    throw ConvergenceError("homotopy: path did not terminate", opts.max_iterations, dist, 0.0);
  }
  return *result;
}

SolveResult solve_l1(const Matrix& A, const Vector& y, double epsilon, const SolveOptions& opts) {
  opts.validate();
  check_dimensions(A, y);
  if (!(epsilon >= 0.0)) throw std::invalid_argument("basis_pursuit_denoise: epsilon must be >= 0");

  const double limit = epsilon / std::max(1.0, y.norm()) + opts.eq_tolerance;
  auto run = [&](SolverAlgorithm alg) {
    SolveResult r = alg == SolverAlgorithm::homotopy ? homotopy_solve(A, y, epsilon, opts)
                                                     : admm_solve(A, y, epsilon, opts);
    if (!(r.relative_residual <= limit)) {
      const double dist = range_residual(A, y);
      if (dist > epsilon + opts.eq_tolerance * std::max(1.0, y.norm()))
        throw InfeasibleError("solver: measurements are not reachable", dist);
      throw ConvergenceError("solver: constraint residual above tolerance", r.iterations,
                             r.relative_residual, 0.0);
    }
    return r;
  };

  const SolverAlgorithm other = opts.algorithm == SolverAlgorithm::homotopy
                                    ? SolverAlgorithm::admm
                                    : SolverAlgorithm::homotopy;
  try {
    return run(opts.algorithm);
  } catch (const InfeasibleError&) {
    throw;
  } catch (const ConvergenceError&) {
    if (!opts.fallback) throw;
  }
  return run(other);
}

}  // namespace

SolveResult basis_pursuit(const Matrix& A, const Vector& y, const SolveOptions& opts) {
  return solve_l1(A, y, 0.0, opts);
}

SolveResult basis_pursuit_denoise(const Matrix& A, const Vector& y, double epsilon,
                                  const SolveOptions& opts) {
  return solve_l1(A, y, epsilon, opts);
}

OmpResult omp(const Matrix& A, const Vector& y, int sparsity) {
  check_dimensions(A, y);
  if (sparsity < 1 || sparsity > A.rows())
    throw std::invalid_argument("omp: sparsity must lie in [1, m]");

  const Eigen::Index N = A.cols();
  const Vector norms = A.colwise().norm().transpose();
  OmpResult out;
  out.x = Vector::Zero(N);
  Vector residual = y;
  Vector coef;
  std::vector<char> used(static_cast<std::size_t>(N), 0);
  const double stop = 1e-12 * std::max(1.0, y.norm());

  for (int step = 0; step < sparsity; ++step) {
    if (residual.norm() <= stop) break;
    const Vector corr = A.transpose() * residual;
    Eigen::Index best = -1;
    double best_score = -1.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (used[j] || norms(j) == 0.0) continue;
      const double score = std::abs(corr(j)) / norms(j);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best < 0) break;
    out.support.push_back(static_cast<int>(best));
    used[best] = 1;

    Matrix As(A.rows(), static_cast<Eigen::Index>(out.support.size()));
    for (std::size_t i = 0; i < out.support.size(); ++i)
      As.col(static_cast<Eigen::Index>(i)) = A.col(out.support[i]);
    Eigen::ColPivHouseholderQR<Matrix> qr(As);
    if (qr.rank() < As.cols()) {
      out.support.pop_back();
      out.stopped_early = true;
      out.warning = "omp: selected atoms are linearly dependent; stopped early";
      break;
    }
    coef = qr.solve(y);
    residual = y - As * coef;
  }
  for (std::size_t i = 0; i < out.support.size(); ++i)
    out.x(out.support[i]) = coef(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace ehdcs
