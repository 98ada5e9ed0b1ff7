#pragma once

// Dense two-phase simplex for small standard-form LPs:
//   minimize cᵀx  subject to  A x = b,  x ≥ 0.
// Bland's rule throughout, so it terminates on degenerate problems.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qsheaf/error.hpp"

namespace qsheaf::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

inline constexpr double kPivotTolerance = 1e-9;

namespace detail {

class Tableau {
public:
  // rows 0..m-1 are constraints, row m is the objective (reduced costs),
  // last column is the right-hand side.
  Tableau(Eigen::MatrixXd t, std::vector<std::size_t> basis)
      : t_(std::move(t)), basis_(std::move(basis)) {}

  Eigen::MatrixXd &data() { return t_; }
  std::vector<std::size_t> &basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index rhs_col() const { return t_.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = static_cast<std::size_t>(c);
  }

  /// Runs Bland-rule iterations over columns [0, n_cols). Returns false if
  /// the objective is unbounded below.
  bool optimize(Eigen::Index n_cols, std::size_t &pivots, std::size_t max_pivots) {
    const Eigen::Index obj = rows();
    while (pivots < max_pivots) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < n_cols; ++j) {
        if (t_(obj, j) < -kPivotTolerance) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < obj; ++i) {
        const double a = t_(i, enter);
        if (a > kPivotTolerance) {
          const double ratio = t_(i, rhs_col()) / a;
          if (ratio < best_ratio - kPivotTolerance ||
              (std::abs(ratio - best_ratio) <= kPivotTolerance && leave >= 0 &&
               basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
    fail(ErrorCode::Internal, "simplex exceeded its pivot budget");
  }

private:
  Eigen::MatrixXd t_;
  std::vector<std::size_t> basis_;
};

} // namespace detail

inline Result solve(const Eigen::MatrixXd &a_in, const Eigen::VectorXd &b_in, const Eigen::VectorXd &c) {
  const Eigen::Index m = a_in.rows();
  const Eigen::Index n = a_in.cols();
  if (b_in.size() != m || c.size() != n) fail(ErrorCode::Dimension, "lp::solve: inconsistent shapes");

  Eigen::MatrixXd a = a_in;
  Eigen::VectorXd b = b_in;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      a.row(i) *= -1.0;
      b(i) = -b(i);
    }
  }

  // Phase 1: artificial variables n..n+m-1, minimize their sum.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  t.col(n + m).head(m) = b;
  for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  t.block(m, n, 1, m).setZero();
  std::vector<std::size_t> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = static_cast<std::size_t>(n + i);

  detail::Tableau tab(std::move(t), std::move(basis));
  Result res;
  const std::size_t max_pivots = 50000;
  tab.optimize(n + m, res.pivots, max_pivots);

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (-tab.data()(m, n + m) > kPivotTolerance * scale) {
    res.status = Status::Infeasible;
    return res;
  }

  // Drive remaining artificials out of the basis; drop redundant rows.
  std::vector<Eigen::Index> keep_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < static_cast<std::size_t>(n)) {
      keep_rows.push_back(i);
      continue;
    }
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.data()(i, j)) > kPivotTolerance) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
      ++res.pivots;
      keep_rows.push_back(i);
    }
  }

  // Phase 2 tableau over the original columns.
  const auto m2 = static_cast<Eigen::Index>(keep_rows.size());
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(m2 + 1, n + 1);
  std::vector<std::size_t> basis2;
  for (Eigen::Index k = 0; k < m2; ++k) {
    const Eigen::Index i = keep_rows[static_cast<std::size_t>(k)];
    t2.row(k).head(n) = tab.data().row(i).head(n);
    t2(k, n) = tab.data()(i, n + m);
    basis2.push_back(tab.basis()[static_cast<std::size_t>(i)]);
  }
  t2.row(m2).head(n) = c.transpose();
  for (Eigen::Index k = 0; k < m2; ++k) {
    const double cb = c(static_cast<Eigen::Index>(basis2[static_cast<std::size_t>(k)]));
    if (cb != 0.0) t2.row(m2) -= cb * t2.row(k);
  }
  detail::Tableau tab2(std::move(t2), std::move(basis2));
  if (!tab2.optimize(n, res.pivots, max_pivots)) {
    res.status = Status::Unbounded;
    return res;
  }

  res.status = Status::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < m2; ++k)
    res.x(static_cast<Eigen::Index>(tab2.basis()[static_cast<std::size_t>(k)])) = tab2.data()(k, n);
  res.objective = c.dot(res.x);
  return res;
}

} // namespace qsheaf::lp
