#pragma once

// Quantum semantic sheaves over directed graphs and their cohomology.
//
// C⁰ = ⊕_v L(H_v), C¹ = ⊕_e L(H_target(e)), both vectorized row-major in
// vertex/edge declaration order. (δ⁰σ)_e = F_e(σ_source) − σ_target.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/error.hpp"
#include "qsheaf/linalg.hpp"
#include "qsheaf/qcore.hpp"
#include "qsheaf/random.hpp"

namespace qsheaf {

struct Vertex {
  std::string id;
  std::size_t stalk_dim = 1;
};

struct Edge {
  std::string id;
  std::string source;
  std::string target;
};

class SemanticGraph {
public:
  SemanticGraph() = default;

  SemanticGraph(std::vector<Vertex> vertices, std::vector<Edge> edges) {
    for (auto &v : vertices) add_vertex(std::move(v));
    for (auto &e : edges) add_edge(std::move(e));
  }

  void add_vertex(Vertex v) {
    if (v.stalk_dim == 0) fail(ErrorCode::Validation, "vertex '" + v.id + "' has stalk_dim 0");
    if (vertex_index_.count(v.id)) fail(ErrorCode::Validation, "duplicate vertex id '" + v.id + "'");
    vertex_index_.emplace(v.id, vertices_.size());
    vertices_.push_back(std::move(v));
  }

  void add_edge(Edge e) {
    if (edge_index_.count(e.id)) fail(ErrorCode::Validation, "duplicate edge id '" + e.id + "'");
    if (!vertex_index_.count(e.source) || !vertex_index_.count(e.target))
      fail(ErrorCode::Validation, "edge '" + e.id + "' references an unknown vertex");
    edge_index_.emplace(e.id, edges_.size());
    edges_.push_back(std::move(e));
  }

  const std::vector<Vertex> &vertices() const { return vertices_; }
  const std::vector<Edge> &edges() const { return edges_; }

  std::size_t vertex_index(const std::string &id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) fail(ErrorCode::Validation, "unknown vertex '" + id + "'");
    return it->second;
  }

  std::size_t edge_index(const std::string &id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) fail(ErrorCode::Validation, "unknown edge '" + id + "'");
    return it->second;
  }

  bool has_vertex(const std::string &id) const { return vertex_index_.count(id) != 0; }
  bool has_edge(const std::string &id) const { return edge_index_.count(id) != 0; }

  std::size_t source_of(std::size_t e) const { return vertex_index(edges_[e].source); }
  std::size_t target_of(std::size_t e) const { return vertex_index(edges_[e].target); }
  std::size_t dim(std::size_t v) const { return vertices_[v].stalk_dim; }

private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> vertex_index_;
  std::map<std::string, std::size_t> edge_index_;
};

class QuantumSemanticSheaf {
public:
  QuantumSemanticSheaf(SemanticGraph graph, const std::map<std::string, QuantumChannel> &channels,
                       const std::map<std::string, DensityOperator> &states = {})
      : graph_(std::move(graph)) {
    for (const auto &[id, ch] : channels)
      if (!graph_.has_edge(id)) fail(ErrorCode::Validation, "channel for unknown edge '" + id + "'");
    channels_.reserve(graph_.edges().size());
    for (std::size_t e = 0; e < graph_.edges().size(); ++e) {
      const auto &edge = graph_.edges()[e];
      auto it = channels.find(edge.id);
      if (it == channels.end()) fail(ErrorCode::Validation, "edge '" + edge.id + "' has no channel");
      const QuantumChannel &ch = it->second;
      if (ch.dim_in() != graph_.dim(graph_.source_of(e)) ||
          ch.dim_out() != graph_.dim(graph_.target_of(e)))
        fail(ErrorCode::Validation, "edge '" + edge.id + "': channel dimensions " +
                                        std::to_string(ch.dim_in()) + "->" +
                                        std::to_string(ch.dim_out()) +
                                        " do not match its endpoint stalks");
      const ChannelReport rep = validate_channel(ch);
      if (!rep.accepted)
        fail(ErrorCode::Validation, "edge '" + edge.id + "': channel is not CPTP (trace residual " +
                                        std::to_string(rep.trace_residual) + ", min Choi eigenvalue " +
                                        std::to_string(rep.min_choi_eigenvalue) + ")");
      channels_.push_back(ch);
      superoperators_.push_back(ch.superoperator());
    }
    for (const auto &[id, rho] : states) {
      const std::size_t v = graph_.vertex_index(id);
      if (rho.dim() != graph_.dim(v))
        fail(ErrorCode::Validation, "vertex '" + id + "': state dimension does not match stalk");
      states_.emplace(id, rho);
    }
  }

  const SemanticGraph &graph() const { return graph_; }
  const QuantumChannel &channel(std::size_t e) const { return channels_.at(e); }
  const ComplexMatrix &superoperator(std::size_t e) const { return superoperators_.at(e); }
  const std::map<std::string, DensityOperator> &states() const { return states_; }

  std::size_t num_vertices() const { return graph_.vertices().size(); }
  std::size_t num_edges() const { return graph_.edges().size(); }

  /// Offset of vertex v's block inside vectorized C⁰; index num_vertices() gives dim C⁰.
  std::size_t vertex_offset(std::size_t v) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < v; ++i) off += graph_.dim(i) * graph_.dim(i);
    return off;
  }

  /// Offset of edge e's block inside vectorized C¹; index num_edges() gives dim C¹.
  std::size_t edge_offset(std::size_t e) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < e; ++i) {
      const std::size_t d = graph_.dim(graph_.target_of(i));
      off += d * d;
    }
    return off;
  }

  std::size_t dim_c0() const { return vertex_offset(num_vertices()); }
  std::size_t dim_c1() const { return edge_offset(num_edges()); }

private:
  SemanticGraph graph_;
  std::vector<QuantumChannel> channels_;
  std::vector<ComplexMatrix> superoperators_;
  std::map<std::string, DensityOperator> states_;
};

// ---------------------------------------------------------------------------
// Cochains

namespace detail {

inline void write_block(ComplexVector &out, std::size_t offset, const ComplexMatrix &m) {
  const auto d = m.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out(static_cast<Eigen::Index>(offset) + i * d + j) = m(i, j);
}

inline ComplexMatrix read_block(const ComplexVector &in, std::size_t offset, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = in(static_cast<Eigen::Index>(offset) + i * d + j);
  return m;
}

} // namespace detail

/// Operator per vertex, in vertex declaration order.
struct Cochain0 {
  std::vector<ComplexMatrix> blocks;

  static Cochain0 zero(const QuantumSemanticSheaf &s) {
    Cochain0 c;
    for (const auto &v : s.graph().vertices()) {
      const auto d = static_cast<Eigen::Index>(v.stalk_dim);
      c.blocks.push_back(ComplexMatrix::Zero(d, d));
    }
    return c;
  }

  static Cochain0 from_vector(const QuantumSemanticSheaf &s, const ComplexVector &vec) {
    if (static_cast<std::size_t>(vec.size()) != s.dim_c0())
      fail(ErrorCode::Dimension, "vector length does not match dim C0");
    Cochain0 c;
    for (std::size_t v = 0; v < s.num_vertices(); ++v)
      c.blocks.push_back(detail::read_block(vec, s.vertex_offset(v), s.graph().dim(v)));
    return c;
  }

  ComplexVector vectorize(const QuantumSemanticSheaf &s) const {
    check_shape(s);
    ComplexVector out(static_cast<Eigen::Index>(s.dim_c0()));
    for (std::size_t v = 0; v < blocks.size(); ++v) detail::write_block(out, s.vertex_offset(v), blocks[v]);
    return out;
  }

  void check_shape(const QuantumSemanticSheaf &s) const {
    if (blocks.size() != s.num_vertices())
      fail(ErrorCode::Dimension, "0-cochain has " + std::to_string(blocks.size()) +
                                     " blocks for " + std::to_string(s.num_vertices()) + " vertices");
    for (std::size_t v = 0; v < blocks.size(); ++v) {
      const auto d = static_cast<Eigen::Index>(s.graph().dim(v));
      if (blocks[v].rows() != d || blocks[v].cols() != d)
        fail(ErrorCode::Dimension, "0-cochain block for vertex '" + s.graph().vertices()[v].id +
                                       "' has the wrong shape");
    }
  }
};

/// Operator per edge, living on the edge's target stalk.
struct Cochain1 {
  std::vector<ComplexMatrix> blocks;

  static Cochain1 zero(const QuantumSemanticSheaf &s) {
    Cochain1 c;
    for (std::size_t e = 0; e < s.num_edges(); ++e) {
      const auto d = static_cast<Eigen::Index>(s.graph().dim(s.graph().target_of(e)));
      c.blocks.push_back(ComplexMatrix::Zero(d, d));
    }
    return c;
  }

  static Cochain1 from_vector(const QuantumSemanticSheaf &s, const ComplexVector &vec) {
    if (static_cast<std::size_t>(vec.size()) != s.dim_c1())
      fail(ErrorCode::Dimension, "vector length does not match dim C1");
    Cochain1 c;
    for (std::size_t e = 0; e < s.num_edges(); ++e)
      c.blocks.push_back(
          detail::read_block(vec, s.edge_offset(e), s.graph().dim(s.graph().target_of(e))));
    return c;
  }

  ComplexVector vectorize(const QuantumSemanticSheaf &s) const {
    check_shape(s);
    ComplexVector out(static_cast<Eigen::Index>(s.dim_c1()));
    for (std::size_t e = 0; e < blocks.size(); ++e) detail::write_block(out, s.edge_offset(e), blocks[e]);
    return out;
  }

  void check_shape(const QuantumSemanticSheaf &s) const {
    if (blocks.size() != s.num_edges())
      fail(ErrorCode::Dimension, "1-cochain has " + std::to_string(blocks.size()) +
                                     " blocks for " + std::to_string(s.num_edges()) + " edges");
    for (std::size_t e = 0; e < blocks.size(); ++e) {
      const auto d = static_cast<Eigen::Index>(s.graph().dim(s.graph().target_of(e)));
      if (blocks[e].rows() != d || blocks[e].cols() != d)
        fail(ErrorCode::Dimension, "1-cochain block for edge '" + s.graph().edges()[e].id +
                                       "' has the wrong shape");
    }
  }
};

/// Σ_e ⟨a_e, b_e⟩_HS.
inline Complex hs_inner(const Cochain1 &a, const Cochain1 &b) {
  if (a.blocks.size() != b.blocks.size()) fail(ErrorCode::Dimension, "1-cochains of different length");
  Complex s{0.0, 0.0};
  for (std::size_t e = 0; e < a.blocks.size(); ++e) s += hs_inner(a.blocks[e], b.blocks[e]);
  return s;
}

inline Complex hs_inner(const Cochain0 &a, const Cochain0 &b) {
  if (a.blocks.size() != b.blocks.size()) fail(ErrorCode::Dimension, "0-cochains of different length");
  Complex s{0.0, 0.0};
  for (std::size_t v = 0; v < a.blocks.size(); ++v) s += hs_inner(a.blocks[v], b.blocks[v]);
  return s;
}

// ---------------------------------------------------------------------------
// Coboundaries

inline ComplexMatrix build_coboundary(const QuantumSemanticSheaf &sheaf) {
  const auto rows = static_cast<Eigen::Index>(sheaf.dim_c1());
  const auto cols = static_cast<Eigen::Index>(sheaf.dim_c0());
  ComplexMatrix d0 = ComplexMatrix::Zero(rows, cols);
  const auto &g = sheaf.graph();
  for (std::size_t e = 0; e < sheaf.num_edges(); ++e) {
    const std::size_t s = g.source_of(e), t = g.target_of(e);
    const auto r0 = static_cast<Eigen::Index>(sheaf.edge_offset(e));
    const auto ds = static_cast<Eigen::Index>(g.dim(s) * g.dim(s));
    const auto dt = static_cast<Eigen::Index>(g.dim(t) * g.dim(t));
    d0.block(r0, static_cast<Eigen::Index>(sheaf.vertex_offset(s)), dt, ds) += sheaf.superoperator(e);
    d0.block(r0, static_cast<Eigen::Index>(sheaf.vertex_offset(t)), dt, dt) -=
        ComplexMatrix::Identity(dt, dt);
  }
  return d0;
}

inline Cochain1 apply_coboundary(const QuantumSemanticSheaf &sheaf, const Cochain0 &sigma) {
  sigma.check_shape(sheaf);
  Cochain1 out;
  const auto &g = sheaf.graph();
  for (std::size_t e = 0; e < sheaf.num_edges(); ++e)
    out.blocks.push_back(apply_channel(sheaf.channel(e), sigma.blocks[g.source_of(e)]) -
                         sigma.blocks[g.target_of(e)]);
  return out;
}

inline ComplexMatrix sheaf_laplacian(const ComplexMatrix &d0) { return d0.adjoint() * d0; }

/// Smallest eigenvalue above 1e-9·λ_max, or 0 when the matrix is zero.
inline double spectral_gap(const ComplexMatrix &laplacian, double rel_tol = kRankTolerance) {
  if (laplacian.rows() != laplacian.cols()) fail(ErrorCode::Dimension, "spectral_gap: non-square matrix");
  const double scale = std::max(1.0, max_norm(laplacian));
  if (hermiticity_residual(laplacian) > kRankTolerance * scale)
    fail(ErrorCode::Validation, "spectral_gap: matrix is not Hermitian");
  const RealVector ev = hermitian_eigenvalues(laplacian);
  if (ev.size() == 0) return 0.0;
  const double lmax = ev(ev.size() - 1);
  if (lmax <= kZeroMatrixFloor) return 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > rel_tol * lmax) return ev(i);
  return 0.0;
}

// ---------------------------------------------------------------------------
// 2-cells

struct CellEdge {
  std::string edge;
  int sign = 1; ///< +1 traverses source→target, −1 target→source
};

struct TwoCell {
  std::string id;
  std::vector<CellEdge> boundary;
};

struct TwoCellComplex {
  std::vector<TwoCell> cells;
};

/// How a cell's edge disagreements are carried back to its base vertex.
struct CellTransport {
  std::size_t base_vertex = 0;
  std::vector<std::size_t> edges;          ///< edge index per boundary step
  std::vector<int> signs;
  std::vector<ComplexMatrix> transports;   ///< superoperator L(H_target(e)) → L(H_base) per step
  ComplexMatrix holonomy;                  ///< transport around the full loop
  ComplexMatrix fixed_projector;           ///< projector onto holonomy-invariant operators
};

inline CellTransport cell_transport(const QuantumSemanticSheaf &sheaf, const TwoCell &cell,
                                    double rank_tol = kRankTolerance) {
  const auto &g = sheaf.graph();
  if (cell.boundary.empty()) fail(ErrorCode::MalformedCell, "cell '" + cell.id + "' has no edges");
  CellTransport out;
  for (const auto &ce : cell.boundary) {
    if (!g.has_edge(ce.edge))
      fail(ErrorCode::MalformedCell, "cell '" + cell.id + "' references unknown edge '" + ce.edge + "'");
    if (ce.sign != 1 && ce.sign != -1)
      fail(ErrorCode::MalformedCell, "cell '" + cell.id + "': orientation sign must be +1 or -1");
    const std::size_t e = g.edge_index(ce.edge);
    if (sheaf.channel(e).as_unitary().size() == 0)
      fail(ErrorCode::UnsupportedCell, "cell '" + cell.id + "': edge '" + ce.edge +
                                           "' does not carry a unitary channel");
    out.edges.push_back(e);
    out.signs.push_back(ce.sign);
  }

  const std::size_t first = out.edges.front();
  out.base_vertex = out.signs.front() > 0 ? g.source_of(first) : g.target_of(first);
  std::size_t current = out.base_vertex;
  const auto db = static_cast<Eigen::Index>(g.dim(current) * g.dim(current));
  ComplexMatrix t = ComplexMatrix::Identity(db, db); // L(H_current) → L(H_base)
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    const std::size_t e = out.edges[i];
    const ComplexMatrix &s = sheaf.superoperator(e); // unitary superoperator
    if (out.signs[i] > 0) {
      if (g.source_of(e) != current)
        fail(ErrorCode::MalformedCell, "cell '" + cell.id + "' is not a walk at edge '" +
                                           g.edges()[e].id + "'");
      t = t * s.adjoint();
      current = g.target_of(e);
      out.transports.push_back(t);
    } else {
      if (g.target_of(e) != current)
        fail(ErrorCode::MalformedCell, "cell '" + cell.id + "' is not a walk at edge '" +
                                           g.edges()[e].id + "'");
      out.transports.push_back(t);
      t = t * s;
      current = g.source_of(e);
    }
  }
  if (current != out.base_vertex)
    fail(ErrorCode::MalformedCell, "cell '" + cell.id + "' is an open walk");
  out.holonomy = t;
  const ComplexMatrix fixed = null_space(t - ComplexMatrix::Identity(db, db), rank_tol);
  out.fixed_projector = projector(fixed, db);
  return out;
}

/// δ¹: per cell, Q·Σ ±T_e(ω_e), where T_e transports the disagreement on e
/// to the base vertex and Q projects onto holonomy-invariant operators.
inline ComplexMatrix build_delta1(const QuantumSemanticSheaf &sheaf, const TwoCellComplex &cells,
                                  double rank_tol = kRankTolerance) {
  std::vector<CellTransport> transports;
  std::size_t rows = 0;
  for (const auto &cell : cells.cells) {
    transports.push_back(cell_transport(sheaf, cell, rank_tol));
    const std::size_t d = sheaf.graph().dim(transports.back().base_vertex);
    rows += d * d;
  }
  ComplexMatrix d1 = ComplexMatrix::Zero(static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(sheaf.dim_c1()));
  Eigen::Index r0 = 0;
  for (const auto &ct : transports) {
    const Eigen::Index db = ct.holonomy.rows();
    for (std::size_t i = 0; i < ct.edges.size(); ++i) {
      const std::size_t e = ct.edges[i];
      const auto c0 = static_cast<Eigen::Index>(sheaf.edge_offset(e));
      const Eigen::Index dt = ct.transports[i].cols();
      d1.block(r0, c0, db, dt) += static_cast<double>(ct.signs[i]) * (ct.fixed_projector * ct.transports[i]);
    }
    r0 += db;
  }
  return d1;
}

// ---------------------------------------------------------------------------
// Cohomology

struct CohomologyReport {
  std::size_t dim_c0 = 0;
  std::size_t dim_c1 = 0;
  std::size_t rank_delta0 = 0;
  std::size_t dim_ker_delta1 = 0;
  std::size_t dim_h0 = 0;
  std::size_t dim_h1 = 0;
  bool with_cells = false;
  std::vector<Cochain1> cocycle_basis;
  double spectral_gap = 0.0;
};

namespace detail {

/// Rotate a vector's phase so its largest-magnitude entry is real positive.
inline void canonical_phase(ComplexVector &v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best + 1e-12) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(arg)) / std::abs(v(arg));
}

} // namespace detail

inline CohomologyReport cohomology(const QuantumSemanticSheaf &sheaf,
                                   const std::optional<TwoCellComplex> &cells = std::nullopt,
                                   double rank_tol = kRankTolerance) {
  CohomologyReport rep;
  rep.dim_c0 = sheaf.dim_c0();
  rep.dim_c1 = sheaf.dim_c1();
  const ComplexMatrix d0 = build_coboundary(sheaf);
  const Svd svd0(d0, rank_tol);
  rep.rank_delta0 = svd0.rank();
  rep.dim_h0 = rep.dim_c0 - rep.rank_delta0;

  const auto n1 = static_cast<Eigen::Index>(rep.dim_c1);
  ComplexMatrix p_cycles = ComplexMatrix::Identity(n1, n1);
  rep.dim_ker_delta1 = rep.dim_c1;
  if (cells && !cells->cells.empty()) {
    rep.with_cells = true;
    const Svd svd1(build_delta1(sheaf, *cells, rank_tol), rank_tol);
    rep.dim_ker_delta1 = rep.dim_c1 - svd1.rank();
    p_cycles = projector(svd1.kernel(), n1);
  }
  if (rep.dim_ker_delta1 < rep.rank_delta0)
    fail(ErrorCode::Internal, "image of delta0 is not contained in ker delta1");
  rep.dim_h1 = rep.dim_ker_delta1 - rep.rank_delta0;

  // Orthogonal complement of im δ⁰ inside ker δ¹.
  const ComplexMatrix p_quotient = p_cycles - projector(svd0.range(), n1);
  if (rep.dim_h1 > 0) {
    Eigen::JacobiSVD<ComplexMatrix> svdq(p_quotient, Eigen::ComputeFullV);
    for (std::size_t i = 0; i < rep.dim_h1; ++i) {
      ComplexVector v = svdq.matrixV().col(static_cast<Eigen::Index>(i));
      detail::canonical_phase(v);
      rep.cocycle_basis.push_back(Cochain1::from_vector(sheaf, v));
    }
  }
  rep.spectral_gap = spectral_gap(sheaf_laplacian(d0), rank_tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Sections

struct SectionSearchOptions {
  std::size_t restarts = 64;
  std::size_t iterations = 200;
  std::uint64_t seed = 0x5eedULL;
};

struct GlobalSections {
  std::vector<Cochain0> basis;
  std::optional<Cochain0> density_feasible;
};

namespace detail {

/// min over vertices of λ_min(σ_v)/Tr σ_v; heavily penalized when a trace
/// is not positive.
inline double density_margin(const std::vector<ComplexMatrix> &blocks) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto &b : blocks) {
    const double tr = b.trace().real();
    if (tr <= 1e-9) return -1e3 + tr;
    worst = std::min(worst, hermitian_eigenvalues(b)(0) / tr);
  }
  return worst;
}

inline std::vector<ComplexMatrix> combine(const std::vector<std::vector<ComplexMatrix>> &basis,
                                          const Eigen::VectorXd &x) {
  std::vector<ComplexMatrix> out = basis.front();
  for (auto &b : out) b.setZero();
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += x(static_cast<Eigen::Index>(j)) * basis[j][v];
  return out;
}

} // namespace detail

/// Kernel of δ⁰ as 0-cochains, plus (when the random-restart search finds
/// one) a kernel element whose every vertex block is a density operator.
inline GlobalSections global_sections(const QuantumSemanticSheaf &sheaf,
                                      const SectionSearchOptions &opts = {}) {
  GlobalSections out;
  const ComplexMatrix kernel = null_space(build_coboundary(sheaf));
  for (Eigen::Index j = 0; j < kernel.cols(); ++j)
    out.basis.push_back(Cochain0::from_vector(sheaf, kernel.col(j)));
  if (out.basis.empty()) return out;

  // Hermitian parts of kernel vectors stay in the kernel because CPTP maps
  // commute with the adjoint. Build a real orthonormal basis of them.
  const std::size_t n0 = sheaf.dim_c0();
  Eigen::MatrixXd real_span(static_cast<Eigen::Index>(2 * n0), static_cast<Eigen::Index>(2 * out.basis.size()));
  std::size_t col = 0;
  for (const auto &k : out.basis) {
    for (int part = 0; part < 2; ++part) {
      Cochain0 h;
      for (const auto &b : k.blocks)
        h.blocks.push_back(part == 0 ? ComplexMatrix(0.5 * (b + b.adjoint()))
                                     : ComplexMatrix((b - b.adjoint()) / Complex(0.0, 2.0)));
      const ComplexVector v = h.vectorize(sheaf);
      real_span.col(static_cast<Eigen::Index>(col)) << v.real(), v.imag();
      ++col;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> rsvd(real_span, Eigen::ComputeThinU);
  const auto &sv = rsvd.singularValues();
  std::vector<std::vector<ComplexMatrix>> herm_basis;
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) <= kRankTolerance * sv(0)) break;
    const Eigen::VectorXd u = rsvd.matrixU().col(j);
    const auto n = static_cast<Eigen::Index>(n0);
    const ComplexVector v = u.head(n).cast<Complex>() + Complex(0.0, 1.0) * u.tail(n).cast<Complex>();
    herm_basis.push_back(Cochain0::from_vector(sheaf, v).blocks);
  }
  if (herm_basis.empty()) return out;

  const auto m = static_cast<Eigen::Index>(herm_basis.size());
  Rng rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_direction = [&] {
    Eigen::VectorXd x(m);
    for (Eigen::Index i = 0; i < m; ++i) x(i) = normal(rng);
    return x;
  };

  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(m);
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXd &x) {
    const double f = detail::density_margin(detail::combine(herm_basis, x));
    if (f > best) {
      best = f;
      best_x = x;
    }
    return f;
  };
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(m, j);
    consider(e);
    consider(-e);
  }

  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd x = random_direction();
    double fx = consider(x);
    double step = 0.5;
    for (std::size_t it = 0; it < opts.iterations; ++it) {
      const Eigen::VectorXd y = x + step * x.norm() * random_direction() / std::sqrt(static_cast<double>(m));
      const double fy = consider(y);
      if (fy > fx) {
        x = y;
        fx = fy;
        step *= 1.5;
      } else {
        step *= 0.9;
      }
    }
  }

  if (best >= -kStateTolerance) {
    std::vector<ComplexMatrix> blocks = detail::combine(herm_basis, best_x);
    Cochain0 section;
    for (auto &b : blocks) {
      ComplexMatrix rho = b / b.trace().real();
      rho = 0.5 * (rho + rho.adjoint());
      section.blocks.push_back(DensityOperator::make(rho).matrix());
    }
    out.density_feasible = std::move(section);
  }
  return out;
}

inline constexpr double kSectionTolerance = 1e-8;

struct LocalSectionCheck {
  bool ok = true;
  std::map<std::string, double> residuals; ///< HS norm of F_e(σ_u) − σ_v per induced edge
};

inline LocalSectionCheck is_local_section(const QuantumSemanticSheaf &sheaf,
                                          const std::map<std::string, ComplexMatrix> &config,
                                          const std::set<std::string> &subset) {
  const auto &g = sheaf.graph();
  for (const auto &v : subset) {
    const std::size_t vi = g.vertex_index(v);
    auto it = config.find(v);
    if (it == config.end()) fail(ErrorCode::MissingState, "no configuration for vertex '" + v + "'");
    const auto d = static_cast<Eigen::Index>(g.dim(vi));
    if (it->second.rows() != d || it->second.cols() != d)
      fail(ErrorCode::Dimension, "configuration for vertex '" + v + "' has the wrong shape");
  }
  LocalSectionCheck out;
  for (const auto &e : g.edges()) {
    if (!subset.count(e.source) || !subset.count(e.target)) continue;
    const std::size_t ei = g.edge_index(e.id);
    const ComplexMatrix diff = apply_channel(sheaf.channel(ei), config.at(e.source)) - config.at(e.target);
    const double r = hs_norm(diff);
    out.residuals[e.id] = r;
    if (r > kSectionTolerance) out.ok = false;
  }
  return out;
}

inline LocalSectionCheck is_local_section(const QuantumSemanticSheaf &sheaf, const Cochain0 &config,
                                          const std::set<std::string> &subset) {
  config.check_shape(sheaf);
  std::map<std::string, ComplexMatrix> m;
  for (std::size_t v = 0; v < config.blocks.size(); ++v)
    m.emplace(sheaf.graph().vertices()[v].id, config.blocks[v]);
  return is_local_section(sheaf, m, subset);
}

} // namespace qsheaf
