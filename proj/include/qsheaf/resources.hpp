#pragma once

// Quantum resources that lower alignment cost: per-edge entanglement
// (Schmidt rank accounting) and contextuality (distance of an empirical
// model from the non-contextual polytope).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qsheaf/error.hpp"
#include "qsheaf/qcore.hpp"
#include "qsheaf/simplex.hpp"

namespace qsheaf {

// ---------------------------------------------------------------------------
// Entanglement assistance

struct EntangledEdgeResource {
  std::string edge;
  PureState state;
  std::vector<double> schmidt_coefficients;
  std::size_t schmidt_rank = 1;

  static EntangledEdgeResource make(std::string edge, PureState state, double tol = kRankTolerance) {
    const SchmidtDecomposition sd = schmidt_decompose(state, tol);
    return {std::move(edge), std::move(state), sd.coefficients, sd.rank};
  }
};

inline std::size_t edge_schmidt_rank(const EntangledEdgeResource &res, double tol = kRankTolerance) {
  return schmidt_decompose(res.state, tol).rank;
}

struct EAReport {
  std::size_t dim_h1_unassisted = 0;
  double ebit_budget = 0.0; ///< Σ_e log₂ r_e
  double dim_h1_ea = 0.0;   ///< real-valued effective obstruction dimension
};

inline EAReport ea_h1_dimension(std::size_t dim_h1, const std::vector<EntangledEdgeResource> &resources) {
  EAReport r;
  r.dim_h1_unassisted = dim_h1;
  for (const auto &res : resources) r.ebit_budget += std::log2(static_cast<double>(edge_schmidt_rank(res)));
  r.dim_h1_ea = std::max(0.0, static_cast<double>(dim_h1) - r.ebit_budget);
  return r;
}

// ---------------------------------------------------------------------------
// Measurement scenarios and empirical models

inline constexpr double kTableTolerance = 1e-9;
inline constexpr double kNoSignallingTolerance = 1e-8;
inline constexpr std::size_t kMaxGlobalAssignments = 1'000'000;

struct Measurement {
  std::string id;
  std::size_t outcomes = 2;
};

/// Contexts list measurement indices; joint outcome tables are row-major
/// over the context's measurements in the listed order.
struct MeasurementScenario {
  std::vector<Measurement> measurements;
  std::vector<std::vector<std::size_t>> contexts;

  std::size_t measurement_index(const std::string &id) const {
    for (std::size_t i = 0; i < measurements.size(); ++i)
      if (measurements[i].id == id) return i;
    fail(ErrorCode::Validation, "unknown measurement '" + id + "'");
  }

  std::size_t table_size(std::size_t ctx) const {
    std::size_t n = 1;
    for (std::size_t m : contexts.at(ctx)) n *= measurements.at(m).outcomes;
    return n;
  }

  void validate() const {
    for (const auto &m : measurements)
      if (m.outcomes < 2) fail(ErrorCode::Validation, "measurement '" + m.id + "' needs >= 2 outcomes");
    for (std::size_t i = 0; i < measurements.size(); ++i)
      for (std::size_t j = i + 1; j < measurements.size(); ++j)
        if (measurements[i].id == measurements[j].id)
          fail(ErrorCode::Validation, "duplicate measurement id '" + measurements[i].id + "'");
    if (contexts.empty()) fail(ErrorCode::Validation, "scenario has no contexts");
    for (const auto &ctx : contexts) {
      if (ctx.empty()) fail(ErrorCode::Validation, "empty measurement context");
      for (std::size_t k = 0; k < ctx.size(); ++k) {
        if (ctx[k] >= measurements.size()) fail(ErrorCode::Validation, "context references an undeclared measurement");
        for (std::size_t l = k + 1; l < ctx.size(); ++l)
          if (ctx[k] == ctx[l]) fail(ErrorCode::Validation, "context repeats a measurement");
      }
    }
  }
};

struct EmpiricalModel {
  MeasurementScenario scenario;
  std::vector<std::vector<double>> tables; ///< one probability table per context
};

namespace detail {

/// Marginal of a context table onto the measurements in `onto` (a subset of
/// the context, given as measurement indices in ascending order).
inline std::vector<double> marginal(const MeasurementScenario &sc, std::size_t ctx,
                                    const std::vector<double> &table, const std::vector<std::size_t> &onto) {
  const auto &c = sc.contexts[ctx];
  std::size_t out_size = 1;
  for (std::size_t m : onto) out_size *= sc.measurements[m].outcomes;
  std::vector<double> out(out_size, 0.0);
  std::vector<std::size_t> digits(c.size());
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = c.size(); k-- > 0;) {
      digits[k] = rem % sc.measurements[c[k]].outcomes;
      rem /= sc.measurements[c[k]].outcomes;
    }
    std::size_t o = 0;
    for (std::size_t m : onto) {
      const auto pos = static_cast<std::size_t>(std::find(c.begin(), c.end(), m) - c.begin());
      o = o * sc.measurements[m].outcomes + digits[pos];
    }
    out[o] += table[idx];
  }
  return out;
}

} // namespace detail

inline void validate_model(const EmpiricalModel &model) {
  const auto &sc = model.scenario;
  sc.validate();
  if (model.tables.size() != sc.contexts.size())
    fail(ErrorCode::Validation, "empirical model needs one table per context");
  for (std::size_t c = 0; c < sc.contexts.size(); ++c) {
    const auto &t = model.tables[c];
    if (t.size() != sc.table_size(c))
      fail(ErrorCode::Validation, "context " + std::to_string(c) + " table has " + std::to_string(t.size()) +
                                      " entries, expected " + std::to_string(sc.table_size(c)));
    double sum = 0.0;
    for (double p : t) {
      if (!std::isfinite(p) || p < -kTableTolerance)
        fail(ErrorCode::Validation, "context " + std::to_string(c) + " has a negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kTableTolerance)
      fail(ErrorCode::Validation, "context " + std::to_string(c) + " table sums to " + std::to_string(sum));
  }
  for (std::size_t a = 0; a < sc.contexts.size(); ++a) {
    for (std::size_t b = a + 1; b < sc.contexts.size(); ++b) {
      std::vector<std::size_t> shared;
      for (std::size_t m : sc.contexts[a])
        if (std::find(sc.contexts[b].begin(), sc.contexts[b].end(), m) != sc.contexts[b].end())
          shared.push_back(m);
      if (shared.empty()) continue;
      std::sort(shared.begin(), shared.end());
      const auto ma = detail::marginal(sc, a, model.tables[a], shared);
      const auto mb = detail::marginal(sc, b, model.tables[b], shared);
      for (std::size_t i = 0; i < ma.size(); ++i)
        if (std::abs(ma[i] - mb[i]) > kNoSignallingTolerance)
          fail(ErrorCode::Validation, "contexts " + std::to_string(a) + " and " + std::to_string(b) +
                                          " disagree on shared marginals (signalling)");
    }
  }
}

/// Deterministic models induced by every global outcome assignment; these
/// are the vertices of the non-contextual polytope.
inline std::vector<EmpiricalModel> nc_vertices(const MeasurementScenario &scenario) {
  scenario.validate();
  std::size_t count = 1;
  for (const auto &m : scenario.measurements) {
    if (count > kMaxGlobalAssignments / m.outcomes)
      fail(ErrorCode::Scale, "more than 1e6 global assignments");
    count *= m.outcomes;
  }
  std::vector<EmpiricalModel> out;
  out.reserve(count);
  std::vector<std::size_t> assignment(scenario.measurements.size());
  for (std::size_t g = 0; g < count; ++g) {
    std::size_t rem = g;
    for (std::size_t i = scenario.measurements.size(); i-- > 0;) {
      assignment[i] = rem % scenario.measurements[i].outcomes;
      rem /= scenario.measurements[i].outcomes;
    }
    EmpiricalModel v{scenario, {}};
    for (std::size_t c = 0; c < scenario.contexts.size(); ++c) {
      std::vector<double> t(scenario.table_size(c), 0.0);
      std::size_t idx = 0;
      for (std::size_t m : scenario.contexts[c]) idx = idx * scenario.measurements[m].outcomes + assignment[m];
      t[idx] = 1.0;
      v.tables.push_back(std::move(t));
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// Σ over contexts of the per-context total variation distance ½‖p − q‖₁.
inline std::vector<double> context_distances(const EmpiricalModel &a, const EmpiricalModel &b) {
  if (a.tables.size() != b.tables.size()) fail(ErrorCode::Dimension, "models have different context counts");
  std::vector<double> out;
  for (std::size_t c = 0; c < a.tables.size(); ++c) {
    if (a.tables[c].size() != b.tables[c].size()) fail(ErrorCode::Dimension, "context table sizes differ");
    double d = 0.0;
    for (std::size_t i = 0; i < a.tables[c].size(); ++i) d += std::abs(a.tables[c][i] - b.tables[c][i]);
    out.push_back(0.5 * d);
  }
  return out;
}

inline double model_distance(const EmpiricalModel &a, const EmpiricalModel &b) {
  double s = 0.0;
  for (double d : context_distances(a, b)) s += d;
  return s;
}

struct ContextualFraction {
  double cf = 0.0;
  EmpiricalModel nearest_nc;
  std::vector<double> per_context;  ///< TV distance per context to nearest_nc
  std::vector<double> weights;      ///< convex weights over nc_vertices
  std::size_t pivots = 0;
};

/// min over the NC polytope of the summed per-context TV distance, as an LP:
///   e − Vμ = p − n,  Σμ = 1,  μ, p, n ≥ 0,  minimize ½ Σ(p + n).
inline ContextualFraction contextual_fraction(const EmpiricalModel &model) {
  validate_model(model);
  const std::vector<EmpiricalModel> vertices = nc_vertices(model.scenario);

  std::vector<std::pair<std::size_t, std::size_t>> entries; // (context, outcome)
  for (std::size_t c = 0; c < model.tables.size(); ++c)
    for (std::size_t i = 0; i < model.tables[c].size(); ++i) entries.emplace_back(c, i);
  const auto k = static_cast<Eigen::Index>(entries.size());
  const auto nv = static_cast<Eigen::Index>(vertices.size());

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, nv + 2 * k);
  Eigen::VectorXd b(k + 1);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nv + 2 * k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto [c, i] = entries[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < nv; ++j) a(r, j) = vertices[static_cast<std::size_t>(j)].tables[c][i];
    a(r, nv + r) = 1.0;
    a(r, nv + k + r) = -1.0;
    b(r) = model.tables[c][i];
  }
  a.row(k).head(nv).setOnes();
  b(k) = 1.0;
  cost.tail(2 * k).setConstant(0.5);

  const lp::Result res = lp::solve(a, b, cost);
  if (res.status != lp::Status::Optimal)
    fail(ErrorCode::Internal, "contextual fraction LP did not reach an optimum");

  ContextualFraction out;
  out.pivots = res.pivots;
  out.nearest_nc.scenario = model.scenario;
  for (const auto &t : model.tables) out.nearest_nc.tables.emplace_back(t.size(), 0.0);
  for (Eigen::Index j = 0; j < nv; ++j) {
    const double w = std::max(0.0, res.x(j));
    out.weights.push_back(w);
    if (w == 0.0) continue;
    const auto &v = vertices[static_cast<std::size_t>(j)];
    for (std::size_t c = 0; c < v.tables.size(); ++c)
      for (std::size_t i = 0; i < v.tables[c].size(); ++i) out.nearest_nc.tables[c][i] += w * v.tables[c][i];
  }
  out.per_context = context_distances(model, out.nearest_nc);
  out.cf = std::max(0.0, res.objective);
  return out;
}

// ---------------------------------------------------------------------------
// Audits

inline constexpr double kContextualityThreshold = 1e-9;

/// Passes when the model is non-contextual or the quantum sheaf really has
/// the smaller obstruction space.
inline bool theorem3_check(std::size_t dim_h1_classical, std::size_t dim_h1_quantum, double cf) {
  return cf <= kContextualityThreshold || dim_h1_quantum < dim_h1_classical;
}

/// Lower bound CF · log₂ dim H¹_classical on the rate saved by contextuality.
inline double rate_reduction_bound(double cf, std::size_t dim_h1_classical) {
  if (dim_h1_classical == 0)
    fail(ErrorCode::UndefinedBound, "rate reduction bound needs dim H1_classical >= 1");
  return cf * std::log2(static_cast<double>(dim_h1_classical));
}

} // namespace qsheaf
