#pragma once

// Reference implementations used only to check the library. Each one is
// deliberately naive and shares no code with core/.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LpResult {
  double value = 0.0;
  Vector x;
};

// min c^T x  s.t.  A x = b, x >= 0. Dense two-phase tableau simplex:
// Dantzig pricing with Bland's rule after a run of degenerate pivots, and a
// final re-solve of the optimal basis against the original data.
inline LpResult simplex(Matrix A, Vector b, const Vector& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  constexpr double eps = 1e-9;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0) {
      A.row(i) *= -1.0;
      b(i) = -b(i);
    }
  const Matrix A0 = A;
  const Vector b0 = b;
  const int rhs = n + m;
  Matrix T = Matrix::Zero(m + 1, n + m + 1);
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.col(rhs).head(m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](int r, int col) {
    T.row(r) /= T(r, col);
    for (int i = 0; i <= m; ++i)
      if (i != r && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(r);
    for (int i = 0; i < m; ++i)
      if (T(i, rhs) < 0.0 && T(i, rhs) > -1e-9) T(i, rhs) = 0.0;
    basis[r] = col;
  };
  auto optimize = [&](const Vector& cost, int allowed) {
    T.row(m).setZero();
    T.row(m).head(cost.size()) = cost.transpose();
    for (int i = 0; i < m; ++i) T.row(m) -= cost(basis[i]) * T.row(i);
    int degenerate = 0;
    for (int guard = 0; guard < 200000; ++guard) {
      const bool bland = degenerate > 50;
      int enter = -1;
      double most = -eps;
      for (int j = 0; j < allowed; ++j)
        if (T(m, j) < most) {
          enter = j;
          if (bland) break;
          most = T(m, j);
        }
      if (enter < 0) return;
      const double colmax = T.col(enter).head(m).cwiseAbs().maxCoeff();
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        if (T(i, enter) > eps * std::max(1.0, colmax)) {
          const double ratio = std::max(0.0, T(i, rhs)) / T(i, enter);
          if (leave < 0 || ratio < best - 1e-12 ||
              (ratio <= best + 1e-12 && (bland ? basis[i] < basis[leave] : T(i, enter) > T(leave, enter)))) {
            best = ratio;
            leave = i;
          }
        }
      if (leave < 0) throw std::runtime_error("simplex: unbounded");
      degenerate = best < 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration guard");
  };

  Vector phase1 = Vector::Zero(n + m);
  phase1.tail(m).setOnes();
  optimize(phase1, n + m);
  if (-T(m, rhs) > 1e-7 * std::max(1.0, b.norm())) throw std::runtime_error("simplex: infeasible");
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n) {
      int j = 0;
      for (int k = 1; k < n; ++k)
        if (std::abs(T(i, k)) > std::abs(T(i, j))) j = k;
      if (std::abs(T(i, j)) > 1e-8) pivot(i, j);
    }
  Vector phase2 = Vector::Zero(n + m);
  phase2.head(n) = c;
  optimize(phase2, n);

  std::vector<int> cols;
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) cols.push_back(basis[i]);
  Matrix B(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) B.col(static_cast<Eigen::Index>(k)) = A0.col(cols[k]);
  const Vector xb = B.colPivHouseholderQr().solve(b0);
  LpResult r;
  r.x = Vector::Zero(n);
  for (std::size_t k = 0; k < cols.size(); ++k) r.x(cols[k]) = xb(static_cast<Eigen::Index>(k));
  r.value = c.dot(r.x);
  return r;
}

// min ||x||_1 s.t. A x = y via the split x = u - v.
inline LpResult l1_min(const Matrix& A, const Vector& y) {
  const auto n = A.cols();
  Matrix AA(A.rows(), 2 * n);
  AA << A, -A;
  LpResult r = simplex(AA, y, Vector::Ones(2 * n));
  Vector x = r.x.head(n) - r.x.tail(n);
  r.x = x;
  return r;
}

// Row echelon reduction with partial pivoting.
inline int rank(Matrix M, double tol = 1e-9) {
  int r = 0;
  const int rows = static_cast<int>(M.rows()), cols = static_cast<int>(M.cols());
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = r;
    for (int i = r + 1; i < rows; ++i)
      if (std::abs(M(i, c)) > std::abs(M(p, c))) p = i;
    if (std::abs(M(p, c)) <= tol) continue;
    M.row(p).swap(M.row(r));
    for (int i = r + 1; i < rows; ++i) M.row(i) -= (M(i, c) / M(r, c)) * M.row(r);
    ++r;
  }
  return r;
}

// Adaptive Simpson on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

// Pr(c + e_k >= a for all k) by conditioning on the common component.
inline double all_at_least(double lambda_c, const std::vector<double>& lambdas, double a) {
  if (a <= 0) return 1.0;
  double sum = 0.0;
  for (double l : lambdas) sum += l;
  const double inner = integrate([&](double c) { return lambda_c * std::exp(-lambda_c * c - sum * (a - c)); }, 0.0, a);
  return std::exp(-lambda_c * a) + inner;
}

// Survival function of a sum of independent exponentials, built one term at
// a time by numerical convolution on a uniform grid over [0, t].
inline double sum_sf(const std::vector<double>& rates, double t, int intervals = 4000) {
  if (t <= 0) return 1.0;
  const double h = t / intervals;
  std::vector<double> sf(intervals + 1);
  for (int i = 0; i <= intervals; ++i) sf[i] = std::exp(-rates[0] * i * h);
  for (std::size_t r = 1; r < rates.size(); ++r) {
    const double l = rates[r];
    std::vector<double> next(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
      // sf_new(t_i) = e^{-l t_i} + int_0^{t_i} l e^{-l u} sf(t_i - u) du
      auto g = [&](int j) { return l * std::exp(-l * j * h) * sf[i - j]; };
      double integral = 0.0;
      if (i == 1) {
        integral = 0.5 * h * (g(0) + g(1));
      } else if (i >= 2) {
        int simpson_end = i;
        if (i % 2 == 1) simpson_end = i - 3;  // 3/8 rule on the last three panels
        for (int j = 0; j + 2 <= simpson_end; j += 2) integral += h / 3.0 * (g(j) + 4.0 * g(j + 1) + g(j + 2));
        if (i % 2 == 1)
          integral += 3.0 * h / 8.0 * (g(i - 3) + 3.0 * g(i - 2) + 3.0 * g(i - 1) + g(i));
      }
      next[i] = std::exp(-l * i * h) + integral;
    }
    sf.swap(next);
  }
  return sf[intervals];
}

// q(J, P) straight from the definition; J holds 0-based sensor indices.
inline int overlap(const std::vector<int>& J, const std::vector<int>& common,
                   const std::vector<std::vector<int>>& innov) {
  int q = 0;
  for (int j : common) {
    bool everywhere = true;
    for (int k = 0; k < static_cast<int>(innov.size()); ++k) {
      if (std::find(J.begin(), J.end(), k) != J.end()) continue;
      if (std::find(innov[k].begin(), innov[k].end(), j) == innov[k].end()) everywhere = false;
    }
    if (everywhere) ++q;
  }
  return q;
}

// Every nonempty subset of {0..K-1} as an index list.
inline std::vector<std::vector<int>> subsets(int K) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int k) {
    if (k == K) {
      if (!cur.empty()) out.push_back(cur);
      return;
    }
    rec(k + 1);
    cur.push_back(k);
    rec(k + 1);
    cur.pop_back();
  };
  rec(0);
  return out;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

// Asymptotic critical value of the KS statistic at level alpha = 0.01.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
