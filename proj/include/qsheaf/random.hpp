#pragma once

#include <cstdint>
#include <random>

#include "qsheaf/qcore.hpp"

namespace qsheaf {

using Rng = std::mt19937_64;

inline ComplexMatrix random_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double re = n(rng);
    const double im = n(rng);
    m.data()[i] = Complex(re, im);
  }
  return m;
}

inline ComplexVector random_gaussian_vector(Eigen::Index n, Rng &rng) {
  return random_gaussian_matrix(n, 1, rng).col(0);
}

/// Haar-distributed unitary via QR with the phase fix on R's diagonal.
inline ComplexMatrix haar_unitary(std::size_t dim, Rng &rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  const ComplexMatrix z = random_gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex rii = r(i, i);
    const double a = std::abs(rii);
    if (a > 0.0) q.col(i) *= rii / a;
  }
  return q;
}

/// Hilbert–Schmidt random mixed state.
inline DensityOperator random_density(std::size_t dim, Rng &rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  const ComplexMatrix g = random_gaussian_matrix(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityOperator::make(std::move(rho));
}

inline PureState random_pure_state(std::size_t dim_a, std::size_t dim_b, Rng &rng) {
  ComplexVector v = random_gaussian_vector(static_cast<Eigen::Index>(dim_a * dim_b), rng);
  v.normalize();
  return PureState(dim_a, dim_b, std::move(v));
}

} // namespace qsheaf
