#pragma once

// Brute-force classical correlation for two-qubit states: a fine Bloch grid
// of projective measurements on B with closed-form 2×2 entropies.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;

inline double binary_entropy_of_qubit(const Eigen::Matrix2cd &rho) {
  // Eigenvalues of a 2×2 Hermitian matrix with unit trace.
  const double a = rho(0, 0).real(), d = rho(1, 1).real();
  const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) / 4.0 + std::norm(rho(0, 1))));
  double h = 0.0;
  for (double l : {(a + d) / 2.0 + disc, (a + d) / 2.0 - disc})
    if (l > 1e-15) h -= l * std::log2(l);
  return h;
}

/// ρ_A conditioned on projecting B onto |n⟩, unnormalized.
inline Eigen::Matrix2cd conditioned(const Eigen::Matrix4cd &rho, const Eigen::Vector2cd &n) {
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap)
      for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp) out(a, ap) += std::conj(n(b)) * rho(a * 2 + b, ap * 2 + bp) * n(bp);
  return out;
}

/// J(A:B) = S(ρ_A) − min over the grid of Σ p_k S(ρ_A|k).
inline double classical_correlation(const Eigen::Matrix4cd &rho, int theta_steps = 512, int phi_steps = 1024) {
  Eigen::Matrix2cd rho_a = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap)
      for (int b = 0; b < 2; ++b) rho_a(a, ap) += rho(a * 2 + b, ap * 2 + b);
  const double pi = std::acos(-1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < theta_steps; ++i) {
    const double th = pi * i / (theta_steps - 1);
    for (int j = 0; j < phi_steps; ++j) {
      const double ph = 2.0 * pi * j / phi_steps;
      Eigen::Vector2cd up(std::cos(th / 2), std::polar(1.0, ph) * std::sin(th / 2));
      Eigen::Vector2cd dn(-std::polar(1.0, -ph) * std::sin(th / 2), std::cos(th / 2));
      double s = 0.0;
      for (const auto &v : {up, dn}) {
        const Eigen::Matrix2cd m = conditioned(rho, v);
        const double p = m.trace().real();
        if (p > 1e-15) s += p * binary_entropy_of_qubit(m / p);
      }
      best = std::min(best, s);
    }
  }
  return binary_entropy_of_qubit(rho_a) - best;
}

} // namespace oracle
