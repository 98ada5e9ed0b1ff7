#pragma once

// Quantum-information primitives: density operators, Kraus channels, pure
// bipartite states, and the operations the sheaf machinery is built from.
//
// Operator spaces are vectorized row-major: vec(A)[i*d + j] = A(i, j). Under
// this convention vec(K A K^†) = (K ⊗ conj(K)) vec(A).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/error.hpp"
#include "qsheaf/linalg.hpp"

namespace qsheaf {

inline constexpr double kStateTolerance = 1e-10;
inline constexpr double kChannelTolerance = 1e-9;
inline constexpr double kEntropyFloor = 1e-12;

/// Hermitian, PSD, unit-trace operator. Only constructible through `make`,
/// which enforces the invariants.
class DensityOperator {
public:
  static DensityOperator make(ComplexMatrix m, double tol = kStateTolerance) {
    if (m.rows() != m.cols() || m.rows() == 0)
      fail(ErrorCode::Dimension, "density operator must be a non-empty square matrix");
    require_finite(m, "density operator");
    const double herm = hermiticity_residual(m);
    if (herm > tol)
      fail(ErrorCode::Validation, "density operator not Hermitian (residual " +
                                      std::to_string(herm) + ")");
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol)
      fail(ErrorCode::Validation, "density operator trace " + std::to_string(tr) + " != 1");
    RealVector ev = hermitian_eigenvalues(m);
    if (ev(0) < -tol)
      fail(ErrorCode::Validation,
           "density operator has negative eigenvalue " + std::to_string(ev(0)));
    return DensityOperator(std::move(m), std::move(ev));
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return make(ComplexMatrix::Identity(d, d) / static_cast<double>(dim));
  }

  static DensityOperator pure(const ComplexVector &psi) {
    const double n = psi.norm();
    if (n == 0.0) fail(ErrorCode::Validation, "zero state vector");
    const ComplexVector u = psi / n;
    return make(u * u.adjoint());
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix &matrix() const { return matrix_; }
  /// Ascending eigenvalues, computed once at construction.
  const RealVector &eigenvalues() const { return eigenvalues_; }

private:
  DensityOperator(ComplexMatrix m, RealVector ev)
      : matrix_(std::move(m)), eigenvalues_(std::move(ev)) {}

  ComplexMatrix matrix_;
  RealVector eigenvalues_;
};

/// CPTP map in Kraus form. Construction checks shapes only; whether the
/// Kraus set is actually trace preserving and CP is `validate_channel`'s job.
class QuantumChannel {
public:
  explicit QuantumChannel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) fail(ErrorCode::Validation, "channel needs at least one Kraus operator");
    dim_out_ = static_cast<std::size_t>(kraus_.front().rows());
    dim_in_ = static_cast<std::size_t>(kraus_.front().cols());
    if (dim_in_ == 0 || dim_out_ == 0) fail(ErrorCode::Dimension, "empty Kraus operator");
    for (const auto &k : kraus_) {
      if (static_cast<std::size_t>(k.rows()) != dim_out_ ||
          static_cast<std::size_t>(k.cols()) != dim_in_)
        fail(ErrorCode::Dimension, "Kraus operators have inconsistent shapes");
      require_finite(k, "Kraus operator");
    }
  }

  std::size_t dim_in() const { return dim_in_; }
  std::size_t dim_out() const { return dim_out_; }
  const std::vector<ComplexMatrix> &kraus() const { return kraus_; }

  /// Matrix of the channel acting on row-major vectorized operators,
  /// shape dim_out² × dim_in².
  ComplexMatrix superoperator() const {
    const auto n_out = static_cast<Eigen::Index>(dim_out_ * dim_out_);
    const auto n_in = static_cast<Eigen::Index>(dim_in_ * dim_in_);
    ComplexMatrix s = ComplexMatrix::Zero(n_out, n_in);
    for (const auto &k : kraus_) s += kron(k, k.conjugate());
    return s;
  }

  /// Choi matrix Σ_ij |i⟩⟨j| ⊗ F(|i⟩⟨j|), shape (dim_in·dim_out)².
  ComplexMatrix choi() const {
    const auto din = static_cast<Eigen::Index>(dim_in_);
    const auto dout = static_cast<Eigen::Index>(dim_out_);
    ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
    for (Eigen::Index a = 0; a < din; ++a) {
      for (Eigen::Index b = 0; b < din; ++b) {
        ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
        for (const auto &k : kraus_) out += k.col(a) * k.col(b).adjoint();
        j.block(a * dout, b * dout, dout, dout) = out;
      }
    }
    return j;
  }

  /// The unitary U when the channel is ρ ↦ UρU† (one Kraus operator,
  /// square, unitary within `tol`); empty matrix otherwise.
  ComplexMatrix as_unitary(double tol = kChannelTolerance) const {
    if (kraus_.size() != 1 || dim_in_ != dim_out_) return {};
    const ComplexMatrix &u = kraus_.front();
    const auto d = static_cast<Eigen::Index>(dim_in_);
    if (max_norm(u.adjoint() * u - ComplexMatrix::Identity(d, d)) > tol) return {};
    return u;
  }

private:
  std::vector<ComplexMatrix> kraus_;
  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
};

/// Normalized amplitude vector on C^{dim_a} ⊗ C^{dim_b}.
class PureState {
public:
  PureState(std::size_t dim_a, std::size_t dim_b, ComplexVector amplitudes)
      : dim_a_(dim_a), dim_b_(dim_b), amplitudes_(std::move(amplitudes)) {
    if (dim_a == 0 || dim_b == 0) fail(ErrorCode::Dimension, "pure state subsystem of dimension 0");
    if (static_cast<std::size_t>(amplitudes_.size()) != dim_a * dim_b)
      fail(ErrorCode::Dimension, "amplitude count does not match dim_a * dim_b");
    require_finite(amplitudes_, "pure state");
    const double n = amplitudes_.norm();
    if (n == 0.0) fail(ErrorCode::Validation, "zero amplitude vector");
    if (std::abs(n - 1.0) > kStateTolerance)
      fail(ErrorCode::Validation, "pure state norm " + std::to_string(n) + " != 1");
  }

  std::size_t dim_a() const { return dim_a_; }
  std::size_t dim_b() const { return dim_b_; }
  const ComplexVector &amplitudes() const { return amplitudes_; }

  /// dim_a × dim_b coefficient matrix: psi = Σ M(a,b) |a⟩|b⟩.
  ComplexMatrix coefficient_matrix() const {
    const auto da = static_cast<Eigen::Index>(dim_a_);
    const auto db = static_cast<Eigen::Index>(dim_b_);
    ComplexMatrix m(da, db);
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index b = 0; b < db; ++b) m(a, b) = amplitudes_(a * db + b);
    return m;
  }

private:
  std::size_t dim_a_;
  std::size_t dim_b_;
  ComplexVector amplitudes_;
};

// ---------------------------------------------------------------------------
// Operations

/// Hilbert–Schmidt inner product Tr(a† b).
inline Complex hs_inner(const ComplexMatrix &a, const ComplexMatrix &b) {
  require_same_shape(a, b, "hs_inner");
  Complex s{0.0, 0.0};
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a.data()[i]) * b.data()[i];
  return s;
}

inline double hs_norm(const ComplexMatrix &a) { return std::sqrt(hs_inner(a, a).real()); }

enum class Subsystem { A, B };

/// Reduced operator on the kept factor of C^{dim_a} ⊗ C^{dim_b}. Works on any
/// square matrix; validity of the result is the caller's concern.
inline ComplexMatrix partial_trace(const ComplexMatrix &m, std::size_t dim_a, std::size_t dim_b,
                                   Subsystem keep) {
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  if (m.rows() != m.cols() || m.rows() != da * db)
    fail(ErrorCode::Dimension, "partial_trace: " + std::to_string(m.rows()) +
                                   " does not factor as " + std::to_string(dim_a) + "x" +
                                   std::to_string(dim_b));
  if (keep == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index ap = 0; ap < da; ++ap)
        for (Eigen::Index b = 0; b < db; ++b) out(a, ap) += m(a * db + b, ap * db + b);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index b = 0; b < db; ++b)
    for (Eigen::Index bp = 0; bp < db; ++bp)
      for (Eigen::Index a = 0; a < da; ++a) out(b, bp) += m(a * db + b, a * db + bp);
  return out;
}

inline DensityOperator partial_trace(const DensityOperator &rho, std::size_t dim_a,
                                     std::size_t dim_b, Subsystem keep) {
  return DensityOperator::make(partial_trace(rho.matrix(), dim_a, dim_b, keep));
}

/// Reduced operator on the factors listed in `keep` (ascending, distinct) of
/// a multipartite space with factor dimensions `dims`.
inline ComplexMatrix reduce_to(const ComplexMatrix &m, const std::vector<std::size_t> &dims,
                               const std::vector<std::size_t> &keep) {
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (static_cast<std::size_t>(m.rows()) != total || m.rows() != m.cols())
    fail(ErrorCode::Dimension, "reduce_to: matrix does not match factor dimensions");
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size() || kept[k]) fail(ErrorCode::Dimension, "reduce_to: bad factor index");
    kept[k] = true;
  }
  std::vector<std::size_t> kept_dims, traced_dims;
  for (std::size_t i = 0; i < dims.size(); ++i) (kept[i] ? kept_dims : traced_dims).push_back(dims[i]);
  const std::size_t dk =
      std::accumulate(kept_dims.begin(), kept_dims.end(), std::size_t{1}, std::multiplies<>());
  const std::size_t dt =
      std::accumulate(traced_dims.begin(), traced_dims.end(), std::size_t{1}, std::multiplies<>());

  // Global index from (kept multi-index, traced multi-index).
  auto compose = [&](std::size_t ki, std::size_t ti) {
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
      if (kept[i]) {
        digits[i] = ki % dims[i];
        ki /= dims[i];
      } else {
        digits[i] = ti % dims[i];
        ti /= dims[i];
      }
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + digits[i];
    return static_cast<Eigen::Index>(idx);
  };

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t r = 0; r < dk; ++r)
    for (std::size_t c = 0; c < dk; ++c)
      for (std::size_t t = 0; t < dt; ++t)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += m(compose(r, t), compose(c, t));
  return out;
}

/// Shannon entropy (bits) of a spectrum; entries below the floor count as 0.
inline double spectrum_entropy(const RealVector &eigenvalues) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (l > kEntropyFloor) s -= l * std::log2(l);
  }
  return std::max(s, 0.0);
}

/// S(ρ) = −Tr ρ log₂ ρ.
inline double von_neumann_entropy(const DensityOperator &rho) {
  return spectrum_entropy(rho.eigenvalues());
}

struct SchmidtDecomposition {
  std::vector<double> coefficients; // descending
  std::size_t rank = 0;
};

inline SchmidtDecomposition schmidt_decompose(const PureState &psi, double tol = kRankTolerance) {
  const ComplexMatrix m = psi.coefficient_matrix();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector &s = svd.singularValues();
  SchmidtDecomposition out;
  out.coefficients.assign(s.data(), s.data() + s.size());
  const double smax = out.coefficients.empty() ? 0.0 : out.coefficients.front();
  if (smax == 0.0) fail(ErrorCode::Validation, "zero state has no Schmidt decomposition");
  for (double c : out.coefficients)
    if (c > tol * smax) ++out.rank;
  return out;
}

/// Σ_i K_i ρ K_i†, on an arbitrary operator (used for cochains as well as states).
inline ComplexMatrix apply_channel(const QuantumChannel &ch, const ComplexMatrix &op) {
  if (static_cast<std::size_t>(op.rows()) != ch.dim_in() ||
      static_cast<std::size_t>(op.cols()) != ch.dim_in())
    fail(ErrorCode::Dimension, "apply_channel: operator is " + std::to_string(op.rows()) + "x" +
                                   std::to_string(op.cols()) + ", channel expects " +
                                   std::to_string(ch.dim_in()));
  const auto d = static_cast<Eigen::Index>(ch.dim_out());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto &k : ch.kraus()) out += k * op * k.adjoint();
  return out;
}

inline DensityOperator apply_channel(const QuantumChannel &ch, const DensityOperator &rho) {
  ComplexMatrix out = apply_channel(ch, rho.matrix());
  return DensityOperator::make(std::move(out), kChannelTolerance);
}

struct ChannelReport {
  double trace_residual = 0.0;     ///< max-norm of Σ K†K − I
  double min_choi_eigenvalue = 0.0;
  bool accepted = false;
};

inline ChannelReport validate_channel(const QuantumChannel &ch) {
  const auto din = static_cast<Eigen::Index>(ch.dim_in());
  ComplexMatrix completeness = ComplexMatrix::Zero(din, din);
  for (const auto &k : ch.kraus()) completeness += k.adjoint() * k;
  ChannelReport r;
  r.trace_residual = max_norm(completeness - ComplexMatrix::Identity(din, din));
  r.min_choi_eigenvalue = hermitian_eigenvalues(ch.choi())(0);
  r.accepted = r.trace_residual <= kChannelTolerance && r.min_choi_eigenvalue >= -kChannelTolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Standard operators and channels

namespace gates {

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline ComplexMatrix hadamard() {
  ComplexMatrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

} // namespace gates

inline QuantumChannel identity_channel(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return QuantumChannel({ComplexMatrix::Identity(d, d)});
}

inline QuantumChannel unitary_channel(const ComplexMatrix &u) { return QuantumChannel({u}); }

/// ρ ↦ (1 − p) ρ + p Tr(ρ) I/d, in Kraus form over the d² Weyl operators.
inline QuantumChannel depolarizing_channel(std::size_t dim, double p) {
  if (dim == 0) fail(ErrorCode::Dimension, "depolarizing channel on a 0-dimensional space");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::Validation, "depolarizing parameter outside [0, 1]");
  const auto d = static_cast<Eigen::Index>(dim);
  const double dd = static_cast<double>(dim * dim);
  ComplexMatrix shift = ComplexMatrix::Zero(d, d);
  ComplexMatrix clock = ComplexMatrix::Zero(d, d);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    shift((i + 1) % d, i) = 1.0;
    clock(i, i) = std::polar(1.0, two_pi * static_cast<double>(i) / static_cast<double>(d));
  }
  std::vector<ComplexMatrix> kraus;
  ComplexMatrix xa = ComplexMatrix::Identity(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    ComplexMatrix zb = ComplexMatrix::Identity(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
      const double w = (a == 0 && b == 0) ? 1.0 - p + p / dd : p / dd;
      if (w > 0.0) kraus.emplace_back(std::sqrt(w) * xa * zb);
      zb = clock * zb;
    }
    xa = shift * xa;
  }
  return QuantumChannel(std::move(kraus));
}

inline QuantumChannel amplitude_damping_channel(double gamma) {
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return QuantumChannel({k0, k1});
}

} // namespace qsheaf
