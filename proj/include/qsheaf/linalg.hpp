#pragma once

// Dense complex linear algebra shared by every module. Ranks, kernels and
// least-squares solves all go through the SVD with a relative cutoff.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "qsheaf/error.hpp"

namespace qsheaf {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Singular values at or below `kRankTolerance * sigma_max` count as zero.
inline constexpr double kRankTolerance = 1e-9;

/// Matrices whose largest singular value is below this are treated as zero.
inline constexpr double kZeroMatrixFloor = 1e-13;

inline double max_norm(const ComplexMatrix &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix &m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline void require_finite(const ComplexMatrix &m, const std::string &what) {
  if (!all_finite(m)) fail(ErrorCode::Validation, what + " has non-finite entries");
}

inline void require_same_shape(const ComplexMatrix &a, const ComplexMatrix &b,
                               const std::string &what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::Dimension,
         what + ": shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " differ");
  }
}

inline double hermiticity_residual(const ComplexMatrix &m) {
  return max_norm(m - m.adjoint());
}

/// Kronecker product a ⊗ b with row-major subsystem ordering.
inline ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Thin wrapper over a full SVD that remembers the cutoff it was asked for.
class Svd {
public:
  explicit Svd(const ComplexMatrix &m, double rel_tol = kRankTolerance)
      : rows_(m.rows()), cols_(m.cols()) {
    if (m.size() == 0) {
      u_ = ComplexMatrix::Identity(rows_, rows_);
      v_ = ComplexMatrix::Identity(cols_, cols_);
      sigma_ = RealVector(0);
      rank_ = 0;
      return;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u_ = svd.matrixU();
    v_ = svd.matrixV();
    sigma_ = svd.singularValues();
    const double smax = sigma_.size() ? sigma_(0) : 0.0;
    rank_ = 0;
    if (smax > kZeroMatrixFloor) {
      for (Eigen::Index i = 0; i < sigma_.size(); ++i)
        if (sigma_(i) > rel_tol * smax) ++rank_;
    }
  }

  std::size_t rank() const { return rank_; }
  const RealVector &singular_values() const { return sigma_; }
  const ComplexMatrix &u() const { return u_; }
  const ComplexMatrix &v() const { return v_; }

  /// Orthonormal columns spanning ker(M).
  ComplexMatrix kernel() const {
    return v_.rightCols(cols_ - static_cast<Eigen::Index>(rank_));
  }

  /// Orthonormal columns spanning im(M).
  ComplexMatrix range() const { return u_.leftCols(static_cast<Eigen::Index>(rank_)); }

  /// Minimum-norm least-squares solution of M x = b.
  ComplexVector solve(const ComplexVector &b) const {
    if (b.size() != rows_) fail(ErrorCode::Dimension, "least-squares right-hand side length");
    ComplexVector x = ComplexVector::Zero(cols_);
    for (std::size_t i = 0; i < rank_; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const Complex coeff = u_.col(k).dot(b) / sigma_(k);
      x += coeff * v_.col(k);
    }
    return x;
  }

private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  ComplexMatrix u_;
  ComplexMatrix v_;
  RealVector sigma_;
  std::size_t rank_ = 0;
};

inline std::size_t numerical_rank(const ComplexMatrix &m, double rel_tol = kRankTolerance) {
  return Svd(m, rel_tol).rank();
}

inline ComplexMatrix null_space(const ComplexMatrix &m, double rel_tol = kRankTolerance) {
  return Svd(m, rel_tol).kernel();
}

inline ComplexMatrix range_space(const ComplexMatrix &m, double rel_tol = kRankTolerance) {
  return Svd(m, rel_tol).range();
}

/// Orthogonal projector onto the column span of `basis` (assumed orthonormal).
inline ComplexMatrix projector(const ComplexMatrix &basis, Eigen::Index dim) {
  if (basis.cols() == 0) return ComplexMatrix::Zero(dim, dim);
  return basis * basis.adjoint();
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
inline RealVector hermitian_eigenvalues(const ComplexMatrix &m) {
  if (m.size() == 0) return RealVector(0);
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

} // namespace qsheaf
