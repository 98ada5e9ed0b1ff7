#pragma once

// Bipartite correlation measures: quantum mutual information, the classical
// correlation J(A:B) optimized over rank-1 projective measurements on B,
// discord, and integrated semantic information.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/error.hpp"
#include "qsheaf/qcore.hpp"
#include "qsheaf/random.hpp"

namespace qsheaf {

struct BipartiteState {
  std::size_t dim_a = 0;
  std::size_t dim_b = 0;
  DensityOperator rho;

  static BipartiteState make(std::size_t dim_a, std::size_t dim_b, const DensityOperator &rho) {
    if (dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim())
      fail(ErrorCode::Dimension, "state of dimension " + std::to_string(rho.dim()) +
                                     " does not factor as " + std::to_string(dim_a) + "x" +
                                     std::to_string(dim_b));
    return {dim_a, dim_b, rho};
  }
};

struct MeasurementSearch {
  std::size_t theta_steps = 64;
  std::size_t phi_steps = 128;
  std::size_t refine_iterations = 50;
  bool allow_coarse_search = false; ///< permit dim_b > 2 via random bases
  std::size_t coarse_samples = 1024;
  std::uint64_t seed = 0;
};

/// Rank-1 projective measurement on B; columns of `basis` are the projector
/// vectors. For qubit B, (theta, phi) are the Bloch angles of column 0.
struct BMeasurement {
  double theta = 0.0;
  double phi = 0.0;
  ComplexMatrix basis;
  bool lower_bound = false; ///< true when found by the coarse random search
};

struct ClassicalCorrelation {
  double j = 0.0;
  BMeasurement measurement;
};

struct CorrelationReport {
  double mutual_info = 0.0;
  double classical_j = 0.0;
  double discord = 0.0;
  double integrated_phi = 0.0;
  BMeasurement optimizer_measurement;
};

inline double matrix_entropy(const ComplexMatrix &m) { return spectrum_entropy(hermitian_eigenvalues(m)); }

inline double mutual_information(const BipartiteState &s) {
  const double sa = matrix_entropy(partial_trace(s.rho.matrix(), s.dim_a, s.dim_b, Subsystem::A));
  const double sb = matrix_entropy(partial_trace(s.rho.matrix(), s.dim_a, s.dim_b, Subsystem::B));
  return sa + sb - von_neumann_entropy(s.rho);
}

/// S(A | M_B) = Σ_b p_b S(ρ_A|b) for the measurement whose projector
/// vectors are the columns of `basis`.
inline double conditional_entropy(const BipartiteState &s, const ComplexMatrix &basis) {
  const auto da = static_cast<Eigen::Index>(s.dim_a);
  const auto db = static_cast<Eigen::Index>(s.dim_b);
  const ComplexMatrix &rho = s.rho.matrix();
  double total = 0.0;
  ComplexMatrix cond(da, da);
  for (Eigen::Index b = 0; b < basis.cols(); ++b) {
    const ComplexVector u = basis.col(b);
    for (Eigen::Index a = 0; a < da; ++a) {
      for (Eigen::Index ap = 0; ap < da; ++ap) {
        Complex acc{0.0, 0.0};
        for (Eigen::Index j = 0; j < db; ++j)
          for (Eigen::Index k = 0; k < db; ++k) acc += std::conj(u(j)) * rho(a * db + j, ap * db + k) * u(k);
        cond(a, ap) = acc;
      }
    }
    const double p = cond.trace().real();
    if (p <= kEntropyFloor) continue;
    total += p * matrix_entropy(cond / p);
  }
  return total;
}

inline ComplexMatrix qubit_basis(double theta, double phi) {
  ComplexMatrix u(2, 2);
  const Complex phase = std::polar(1.0, phi);
  u(0, 0) = std::cos(theta / 2);
  u(1, 0) = phase * std::sin(theta / 2);
  u(0, 1) = std::sin(theta / 2);
  u(1, 1) = -phase * std::cos(theta / 2);
  return u;
}

inline ClassicalCorrelation classical_correlation(const BipartiteState &s, const MeasurementSearch &search = {}) {
  const double sa = matrix_entropy(partial_trace(s.rho.matrix(), s.dim_a, s.dim_b, Subsystem::A));
  ClassicalCorrelation out;

  if (s.dim_b == 1) {
    out.measurement.basis = ComplexMatrix::Identity(1, 1);
    out.j = 0.0;
    return out;
  }

  if (s.dim_b > 2) {
    if (!search.allow_coarse_search)
      fail(ErrorCode::UnsupportedDimension, "classical correlation search supports dim_b = 2; dim_b = " +
                                                std::to_string(s.dim_b) + " needs the coarse-search override");
    Rng rng(search.seed);
    const auto db = static_cast<Eigen::Index>(s.dim_b);
    ComplexMatrix best_basis = ComplexMatrix::Identity(db, db);
    double best = conditional_entropy(s, best_basis);
    for (std::size_t i = 0; i < search.coarse_samples; ++i) {
      const ComplexMatrix u = haar_unitary(s.dim_b, rng);
      const double h = conditional_entropy(s, u);
      if (h < best) {
        best = h;
        best_basis = u;
      }
    }
    out.measurement.basis = best_basis;
    out.measurement.lower_bound = true;
    out.j = std::max(0.0, sa - best);
    return out;
  }

  const double pi = std::acos(-1.0);
  const std::size_t nt = std::max<std::size_t>(search.theta_steps, 2);
  const std::size_t np = std::max<std::size_t>(search.phi_steps, 1);
  const double dt = pi / static_cast<double>(nt - 1);
  const double dp = 2.0 * pi / static_cast<double>(np);

  double best = std::numeric_limits<double>::infinity();
  double bt = 0.0, bp = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      const double t = dt * static_cast<double>(i);
      const double p = dp * static_cast<double>(j);
      const double h = conditional_entropy(s, qubit_basis(t, p));
      if (h < best) {
        best = h;
        bt = t;
        bp = p;
      }
    }
  }

  // Coordinate descent with step halving around the best grid point.
  double st = dt, sp = dp;
  for (std::size_t it = 0; it < search.refine_iterations; ++it) {
    const double cand[4][2] = {{bt + st, bp}, {bt - st, bp}, {bt, bp + sp}, {bt, bp - sp}};
    bool improved = false;
    for (const auto &c : cand) {
      const double h = conditional_entropy(s, qubit_basis(c[0], c[1]));
      if (h < best - 1e-15) {
        best = h;
        bt = c[0];
        bp = c[1];
        improved = true;
      }
    }
    if (!improved) {
      st *= 0.5;
      sp *= 0.5;
    }
  }

  out.measurement.theta = bt;
  out.measurement.phi = bp;
  out.measurement.basis = qubit_basis(bt, bp);
  out.j = std::max(0.0, sa - best);
  return out;
}

inline CorrelationReport discord(const BipartiteState &s, const MeasurementSearch &search = {}) {
  CorrelationReport r;
  r.mutual_info = mutual_information(s);
  const ClassicalCorrelation cc = classical_correlation(s, search);
  r.classical_j = cc.j;
  r.optimizer_measurement = cc.measurement;
  r.discord = r.mutual_info - r.classical_j;
  r.integrated_phi = r.discord;
  return r;
}

// ---------------------------------------------------------------------------
// Integrated semantic information

enum class IntegrationMode { ProofIdentification, PartitionSearch };

/// Declared tensor factorization A = ⊗ A_i, B = ⊗ B_j.
struct Factorization {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

struct PartitionBlock {
  std::vector<std::size_t> a_factors;
  std::vector<std::size_t> b_factors;
};

struct PartitionSearchResult {
  double phi = 0.0;
  double mutual_info = 0.0;
  double best_sum = 0.0;
  std::vector<PartitionBlock> best_partition;
  std::size_t partitions_considered = 0;
};

namespace detail {

/// All set partitions of {0..n-1} as block lists, via restricted growth strings.
inline std::vector<std::vector<std::vector<std::size_t>>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::size_t> rgs(n, 0);
  auto emit = [&] {
    const std::size_t k = n ? *std::max_element(rgs.begin(), rgs.end()) + 1 : 0;
    std::vector<std::vector<std::size_t>> blocks(k);
    for (std::size_t i = 0; i < n; ++i) blocks[rgs[i]].push_back(i);
    out.push_back(std::move(blocks));
  };
  auto rec = [&](auto &self, std::size_t i, std::size_t max_so_far) -> void {
    if (i == n) {
      emit();
      return;
    }
    for (std::size_t v = 0; v <= max_so_far + 1; ++v) {
      rgs[i] = v;
      self(self, i + 1, std::max(max_so_far, v));
    }
  };
  if (n == 0) return out;
  rgs[0] = 0;
  rec(rec, 1, 0);
  return out;
}

inline double subsystem_mutual_info(const ComplexMatrix &rho, const std::vector<std::size_t> &dims,
                                    const std::vector<std::size_t> &x, const std::vector<std::size_t> &y) {
  std::vector<std::size_t> xy = x;
  xy.insert(xy.end(), y.begin(), y.end());
  std::sort(xy.begin(), xy.end());
  return matrix_entropy(reduce_to(rho, dims, x)) + matrix_entropy(reduce_to(rho, dims, y)) -
         matrix_entropy(reduce_to(rho, dims, xy));
}

} // namespace detail

/// Φ = I(A:B) − max over nontrivial matched partitions {(A_i, B_i)}, i ≥ 2
/// blocks, of Σ_i I(A_i:B_i).
inline PartitionSearchResult partition_search(const BipartiteState &s, const Factorization &f) {
  auto product = [](const std::vector<std::size_t> &v) {
    return std::accumulate(v.begin(), v.end(), std::size_t{1}, std::multiplies<>());
  };
  if (f.a.empty() || f.b.empty() || product(f.a) != s.dim_a || product(f.b) != s.dim_b)
    fail(ErrorCode::Dimension, "declared factorization does not match the state's dimensions");
  if (f.a.size() < 2 || f.b.size() < 2)
    fail(ErrorCode::NoPartition, "no nontrivial partition: A and B each need at least two declared factors");

  std::vector<std::size_t> dims = f.a;
  dims.insert(dims.end(), f.b.begin(), f.b.end());
  const std::size_t na = f.a.size();

  PartitionSearchResult out;
  out.mutual_info = mutual_information(s);
  out.best_sum = -std::numeric_limits<double>::infinity();
  const auto pa = detail::set_partitions(na);
  const auto pb = detail::set_partitions(f.b.size());
  for (const auto &blocks_a : pa) {
    if (blocks_a.size() < 2) continue;
    for (const auto &blocks_b : pb) {
      if (blocks_b.size() != blocks_a.size()) continue;
      std::vector<std::size_t> perm(blocks_b.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        double sum = 0.0;
        std::vector<PartitionBlock> part;
        for (std::size_t i = 0; i < blocks_a.size(); ++i) {
          std::vector<std::size_t> y;
          for (std::size_t j : blocks_b[perm[i]]) y.push_back(na + j);
          sum += detail::subsystem_mutual_info(s.rho.matrix(), dims, blocks_a[i], y);
          part.push_back({blocks_a[i], blocks_b[perm[i]]});
        }
        ++out.partitions_considered;
        if (sum > out.best_sum) {
          out.best_sum = sum;
          out.best_partition = std::move(part);
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  out.phi = out.mutual_info - out.best_sum;
  return out;
}

inline double integrated_information(const BipartiteState &s, const MeasurementSearch &search,
                                     IntegrationMode mode, const Factorization &factors = {}) {
  if (mode == IntegrationMode::ProofIdentification) {
    return mutual_information(s) - classical_correlation(s, search).j;
  }
  return partition_search(s, factors).phi;
}

// ---------------------------------------------------------------------------
// Standard two-qubit states

namespace states {

inline DensityOperator bell_phi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return DensityOperator::pure(v);
}

/// v |Ψ⁻⟩⟨Ψ⁻| + (1 − v) I/4.
inline DensityOperator werner(double visibility) {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = -1.0 / std::sqrt(2.0);
  ComplexMatrix m = visibility * (psi * psi.adjoint()) +
                    (1.0 - visibility) * ComplexMatrix::Identity(4, 4) / 4.0;
  return DensityOperator::make(m);
}

/// ½(|00⟩⟨00| + |11⟩⟨11|).
inline DensityOperator classically_correlated() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = 0.5;
  return DensityOperator::make(m);
}

/// Bell pairs on (A1,B1) and (A2,B2), ordered A1 A2 B1 B2.
inline DensityOperator double_bell() {
  ComplexVector v = ComplexVector::Zero(16);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) v(((i * 2 + j) * 2 + i) * 2 + j) = 0.5;
  return DensityOperator::pure(v);
}

} // namespace states

} // namespace qsheaf
