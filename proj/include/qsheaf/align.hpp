#pragma once

// Minimum-rate alignment: encode a locally consistent disagreement pattern
// by its H¹ coordinates, decode by solving δ⁰σ = ω − ω̃, and exhibit
// indistinguishable classes for any encoder with too few symbols.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qsheaf/error.hpp"
#include "qsheaf/linalg.hpp"
#include "qsheaf/sheaf.hpp"

namespace qsheaf {

inline constexpr double kAlignmentTolerance = 1e-7;
inline constexpr double kAlignmentFailure = 1e-6;
inline constexpr double kOrthonormalTolerance = 1e-9;

struct AlignmentTranscript {
  ComplexVector coefficients;
  Cochain1 reconstructed_cocycle;
  Cochain0 section;
  double residual = 0.0;
  std::size_t symbols_sent = 0;
  double rate_bits = 0.0;
};

struct ConverseWitness {
  Cochain1 cocycle_a;
  Cochain1 cocycle_b;
  std::size_t encoder_rank = 0;
  double codeword_gap = 0.0;
  double quotient_distance = 0.0; ///< distance of cocycle_a − cocycle_b from im δ⁰
};

namespace detail {

inline ComplexVector flatten(const Cochain1 &c) {
  Eigen::Index n = 0;
  for (const auto &b : c.blocks) n += b.size();
  ComplexVector out(n);
  Eigen::Index off = 0;
  for (const auto &b : c.blocks) {
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j) out(off++) = b(i, j);
  }
  return out;
}

inline Cochain1 linear_combination(const std::vector<Cochain1> &basis, const ComplexVector &c,
                                   const Cochain1 &shape) {
  Cochain1 out = shape;
  for (auto &b : out.blocks) b.setZero();
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t e = 0; e < out.blocks.size(); ++e)
      out.blocks[e] += c(static_cast<Eigen::Index>(i)) * basis[i].blocks[e];
  return out;
}

/// Columns are the flattened basis cochains.
inline ComplexMatrix basis_matrix(const std::vector<Cochain1> &basis, Eigen::Index dim_c1) {
  ComplexMatrix w(dim_c1, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const ComplexVector v = flatten(basis[i]);
    if (v.size() != dim_c1) fail(ErrorCode::Dimension, "cocycle basis element does not match dim C1");
    w.col(static_cast<Eigen::Index>(i)) = v;
  }
  return w;
}

} // namespace detail

/// Representatives of an orthonormal basis of H¹ (HS-orthonormal, ⟂ im δ⁰).
inline std::vector<Cochain1> cocycle_basis(const CohomologyReport &report) {
  return report.cocycle_basis;
}

/// Coordinates c_i = ⟨ω_i, ω⟩_HS of ω's class in the given basis.
inline ComplexVector encode(const Cochain1 &omega, const std::vector<Cochain1> &basis,
                            const ComplexMatrix &d0) {
  const ComplexMatrix w = detail::basis_matrix(basis, d0.rows());
  const auto k = static_cast<Eigen::Index>(basis.size());
  const double gram_err = max_norm(w.adjoint() * w - ComplexMatrix::Identity(k, k));
  if (gram_err > kOrthonormalTolerance)
    fail(ErrorCode::Validation, "cocycle basis is not orthonormal (Gram residual " +
                                    std::to_string(gram_err) + ")");
  if (k > 0 && d0.cols() > 0) {
    const double overlap = max_norm(d0.adjoint() * w);
    if (overlap > kOrthonormalTolerance * std::max(1.0, max_norm(d0)))
      fail(ErrorCode::Validation, "cocycle basis is not orthogonal to im delta0");
  }
  const ComplexVector v = detail::flatten(omega);
  if (v.size() != d0.rows()) fail(ErrorCode::Dimension, "1-cochain does not match delta0 rows");
  return w.adjoint() * v;
}

struct DecodeResult {
  Cochain0 section;
  Cochain1 reconstructed;
  double residual = 0.0;
};

/// Rebuild ω̃ = Σ c_i ω_i and solve δ⁰σ = ω − ω̃ in the least-squares sense.
inline DecodeResult decode(const QuantumSemanticSheaf &sheaf, const ComplexMatrix &d0,
                           const ComplexVector &coefficients, const std::vector<Cochain1> &basis,
                           const Cochain1 &omega, double rank_tol = kRankTolerance) {
  if (static_cast<std::size_t>(coefficients.size()) != basis.size())
    fail(ErrorCode::Dimension, "decode: " + std::to_string(coefficients.size()) +
                                   " coefficients for a basis of " + std::to_string(basis.size()));
  omega.check_shape(sheaf);
  DecodeResult out;
  out.reconstructed = detail::linear_combination(basis, coefficients, omega);
  const ComplexVector rhs = omega.vectorize(sheaf) - out.reconstructed.vectorize(sheaf);
  const Svd svd(d0, rank_tol);
  const ComplexVector x = svd.solve(rhs);
  out.residual = (d0 * x - rhs).norm();
  if (out.residual > kAlignmentFailure)
    throw AlignmentFailure(out.residual, "residual " + std::to_string(out.residual) +
                                             " exceeds " + std::to_string(kAlignmentFailure) +
                                             "; coefficients do not identify the class of omega");
  out.section = Cochain0::from_vector(sheaf, x);
  return out;
}

inline double rate_bits_for(std::size_t dim_h1) {
  return std::log2(static_cast<double>(std::max<std::size_t>(dim_h1, 1)));
}

inline AlignmentTranscript align_protocol(const QuantumSemanticSheaf &sheaf, const Cochain1 &omega,
                                          const std::optional<TwoCellComplex> &cells = std::nullopt,
                                          double rank_tol = kRankTolerance) {
  omega.check_shape(sheaf);
  const CohomologyReport report = cohomology(sheaf, cells, rank_tol);
  if (cells && report.with_cells) {
    const ComplexVector d1w = build_delta1(sheaf, *cells, rank_tol) * omega.vectorize(sheaf);
    if (d1w.size() > 0 && d1w.cwiseAbs().maxCoeff() > kAlignmentFailure)
      fail(ErrorCode::Validation, "omega is not a cocycle: delta1 omega != 0");
  }
  const ComplexMatrix d0 = build_coboundary(sheaf);
  const std::vector<Cochain1> basis = cocycle_basis(report);

  AlignmentTranscript t;
  t.coefficients = encode(omega, basis, d0);
  DecodeResult dec = decode(sheaf, d0, t.coefficients, basis, omega, rank_tol);
  t.reconstructed_cocycle = std::move(dec.reconstructed);
  t.section = std::move(dec.section);
  t.residual = dec.residual;
  t.symbols_sent = static_cast<std::size_t>(t.coefficients.size());
  t.rate_bits = rate_bits_for(t.symbols_sent);
  if (t.residual > kAlignmentTolerance)
    throw AlignmentFailure(t.residual, "alignment residual " + std::to_string(t.residual) +
                                           " exceeds " + std::to_string(kAlignmentTolerance));
  return t;
}

/// Given a linear encoder on vectorized C¹, find two cocycles in different
/// H¹ classes that it maps to the same codeword.
inline ConverseWitness converse_witness(const QuantumSemanticSheaf &sheaf, const ComplexMatrix &encoder,
                                        const std::optional<TwoCellComplex> &cells = std::nullopt,
                                        double rank_tol = kRankTolerance) {
  if (static_cast<std::size_t>(encoder.cols()) != sheaf.dim_c1())
    fail(ErrorCode::Dimension, "encoder has " + std::to_string(encoder.cols()) +
                                   " columns, dim C1 is " + std::to_string(sheaf.dim_c1()));
  const CohomologyReport report = cohomology(sheaf, cells, rank_tol);
  const auto n1 = static_cast<Eigen::Index>(sheaf.dim_c1());
  const ComplexMatrix w = detail::basis_matrix(report.cocycle_basis, n1);
  const ComplexMatrix induced = encoder * w; // r × k map on H¹ coordinates
  const Svd svd(induced, rank_tol);
  const ComplexMatrix kernel = svd.kernel();
  if (kernel.cols() == 0)
    fail(ErrorCode::NoWitness, "induced map on H1 is injective (rank " + std::to_string(svd.rank()) +
                                   " = dim H1); the encoder does not violate the converse");

  ConverseWitness out;
  out.encoder_rank = numerical_rank(encoder, rank_tol);
  const ComplexVector c = kernel.col(0);
  const ComplexVector a = w * c;
  out.cocycle_a = Cochain1::from_vector(sheaf, a);
  out.cocycle_b = Cochain1::zero(sheaf);
  out.codeword_gap = (encoder * a).norm();
  const ComplexMatrix im = range_space(build_coboundary(sheaf), rank_tol);
  out.quotient_distance = (a - im * (im.adjoint() * a)).norm();
  return out;
}

struct SemanticRate {
  std::size_t symbols = 0;
  double bits = 0.0;
};

inline SemanticRate semantic_rate(const CohomologyReport &report) {
  return {report.dim_h1, rate_bits_for(report.dim_h1)};
}

/// Semantic messages per channel use, C / log₂ dim H¹.
inline double semantic_capacity(double channel_capacity_bits, const CohomologyReport &report) {
  if (!(channel_capacity_bits >= 0.0)) fail(ErrorCode::Validation, "channel capacity must be >= 0");
  if (report.dim_h1 <= 1)
    fail(ErrorCode::UndefinedCapacity, "semantic capacity needs dim H1 >= 2 (got " +
                                           std::to_string(report.dim_h1) + ")");
  return channel_capacity_bits / std::log2(static_cast<double>(report.dim_h1));
}

// ---------------------------------------------------------------------------
// Laplacian diffusion

struct DiffusionSample {
  std::size_t step = 0;
  double disagreement = 0.0; ///< ‖δ⁰σ(t)‖
};

struct DiffusionTrajectory {
  std::vector<DiffusionSample> samples;
  Cochain0 final_state;
  double lambda_max = 0.0;
  double spectral_gap = 0.0;
};

inline constexpr double kDivergenceFactor = 1e3;

/// Explicit Euler on dσ/dt = −Lσ.
inline DiffusionTrajectory diffuse(const QuantumSemanticSheaf &sheaf, const Cochain0 &initial,
                                   double step_size, std::size_t steps) {
  if (!(step_size > 0.0)) fail(ErrorCode::Validation, "step size must be positive");
  const ComplexMatrix d0 = build_coboundary(sheaf);
  const ComplexMatrix lap = sheaf_laplacian(d0);
  DiffusionTrajectory out;
  const RealVector ev = hermitian_eigenvalues(lap);
  out.lambda_max = ev.size() ? ev(ev.size() - 1) : 0.0;
  out.spectral_gap = spectral_gap(lap);
  if (out.lambda_max > kZeroMatrixFloor && step_size >= 2.0 / out.lambda_max)
    fail(ErrorCode::Divergence, "step size " + std::to_string(step_size) +
                                    " is outside the stable range (0, " +
                                    std::to_string(2.0 / out.lambda_max) + ")");

  ComplexVector x = initial.vectorize(sheaf);
  const double initial_norm = (d0 * x).norm();
  out.samples.push_back({0, initial_norm});
  for (std::size_t t = 1; t <= steps; ++t) {
    x -= step_size * (lap * x);
    const double n = (d0 * x).norm();
    if (!std::isfinite(n) || n > kDivergenceFactor * std::max(initial_norm, 1e-12))
      fail(ErrorCode::Divergence, "disagreement grew beyond 1e3x its initial value at step " +
                                      std::to_string(t));
    out.samples.push_back({t, n});
  }
  out.final_state = Cochain0::from_vector(sheaf, x);
  return out;
}

/// Ratio of consecutive disagreement norms; 0 where the previous norm vanished.
inline std::vector<double> contraction_factors(const DiffusionTrajectory &traj) {
  std::vector<double> out;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const double prev = traj.samples[i - 1].disagreement;
    out.push_back(prev > 1e-300 ? traj.samples[i].disagreement / prev : 0.0);
  }
  return out;
}

} // namespace qsheaf
