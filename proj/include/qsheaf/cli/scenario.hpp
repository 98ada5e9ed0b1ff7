#pragma once

// Scenario files: strict JSON schema (schema_version 1) describing a sheaf
// plus optional resource and correlation payloads.
//
// Complex numbers are [re, im] pairs (a bare number is read as real);
// matrices are row-major arrays of rows.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsheaf/error.hpp"
#include "qsheaf/qcore.hpp"
#include "qsheaf/resources.hpp"
#include "qsheaf/semantics.hpp"
#include "qsheaf/sheaf.hpp"

namespace qsheaf::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct RunOptions {
  double tol_rank = kRankTolerance;
  std::size_t grid_theta = 64;
  std::size_t grid_phi = 128;
  double step = 0.1;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  std::optional<double> channel_capacity_bits;
  bool coarse_search = false;
};

struct NamedModel {
  std::string name;
  EmpiricalModel model;
  std::optional<std::pair<std::size_t, std::size_t>> audit_dims; ///< (dim H¹ classical, quantum)
};

struct NamedState {
  std::string name;
  BipartiteState state;
  std::optional<Factorization> factors;
};

struct Scenario {
  std::string name;
  QuantumSemanticSheaf sheaf;
  std::vector<EntangledEdgeResource> entanglement;
  std::optional<TwoCellComplex> cells;
  std::vector<NamedModel> empirical_models;
  std::vector<NamedState> bipartite_states;
  std::optional<Cochain1> cocycle;
  std::optional<Cochain0> initial_section;
  RunOptions options;
  std::string hash; ///< FNV-1a of the canonical JSON document
};

namespace detail {

inline std::string fnv1a_hex(const std::string &text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

[[noreturn]] inline void field_error(const std::string &path, const std::string &what) {
  fail(ErrorCode::Parse, "at '" + path + "': " + what);
}

inline const json &require(const json &obj, const std::string &key, const std::string &path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path, "missing required field '" + key + "'");
  return *it;
}

inline void allow_only(const json &obj, std::initializer_list<const char *> keys, const std::string &path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) field_error(path, "unknown field '" + it.key() + "'");
}

inline double number(const json &j, const std::string &path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

inline std::size_t count(const json &j, const std::string &path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) field_error(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline std::string string(const json &j, const std::string &path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

inline Complex complex_value(const json &j, const std::string &path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  field_error(path, "expected a complex number [re, im]");
}

inline ComplexMatrix matrix(const json &j, const std::string &path) {
  if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) field_error(path + "[0]", "expected a non-empty row");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json &row = j[static_cast<std::size_t>(r)];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) field_error(rp, "ragged matrix row");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = complex_value(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline ComplexVector vector(const json &j, const std::string &path) {
  if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_value(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

template <class F> auto with_context(const std::string &path, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error &e) {
    if (e.code() == ErrorCode::Parse) throw;
    throw Error(e.code(), std::string("at '") + path + "': " + e.message());
  }
}

inline QuantumChannel channel(const json &j, std::size_t din, std::size_t dout, const std::string &path) {
  const std::string kind = string(require(j, "kind", path), path + ".kind");
  if (kind == "identity") {
    allow_only(j, {"kind"}, path);
    if (din != dout) field_error(path, "identity channel needs equal endpoint dimensions");
    return identity_channel(din);
  }
  if (kind == "unitary") {
    allow_only(j, {"kind", "matrix"}, path);
    return QuantumChannel({matrix(require(j, "matrix", path), path + ".matrix")});
  }
  if (kind == "depolarizing") {
    allow_only(j, {"kind", "p"}, path);
    if (din != dout) field_error(path, "depolarizing channel needs equal endpoint dimensions");
    const double p = number(require(j, "p", path), path + ".p");
    return with_context(path, [&] { return depolarizing_channel(din, p); });
  }
  if (kind == "kraus") {
    allow_only(j, {"kind", "operators"}, path);
    const json &ops = require(j, "operators", path);
    if (!ops.is_array() || ops.empty()) field_error(path + ".operators", "expected a non-empty array");
    std::vector<ComplexMatrix> kraus;
    for (std::size_t i = 0; i < ops.size(); ++i)
      kraus.push_back(matrix(ops[i], path + ".operators[" + std::to_string(i) + "]"));
    return with_context(path, [&] { return QuantumChannel(std::move(kraus)); });
  }
  field_error(path + ".kind", "unknown channel kind '" + kind + "'");
}

inline RunOptions options(const json &j, const std::string &path) {
  allow_only(j, {"tol_rank", "grid", "step", "steps", "seed", "channel_capacity_bits", "coarse_search"}, path);
  RunOptions o;
  if (j.contains("tol_rank")) o.tol_rank = number(j["tol_rank"], path + ".tol_rank");
  if (j.contains("grid")) {
    const json &g = j["grid"];
    if (!g.is_array() || g.size() != 2) field_error(path + ".grid", "expected [theta_steps, phi_steps]");
    o.grid_theta = count(g[0], path + ".grid[0]");
    o.grid_phi = count(g[1], path + ".grid[1]");
  }
  if (j.contains("step")) o.step = number(j["step"], path + ".step");
  if (j.contains("steps")) o.steps = count(j["steps"], path + ".steps");
  if (j.contains("seed")) o.seed = j["seed"].is_number_unsigned() ? j["seed"].get<std::uint64_t>()
                                                                  : count(j["seed"], path + ".seed");
  if (j.contains("channel_capacity_bits"))
    o.channel_capacity_bits = number(j["channel_capacity_bits"], path + ".channel_capacity_bits");
  if (j.contains("coarse_search")) {
    if (!j["coarse_search"].is_boolean()) field_error(path + ".coarse_search", "expected a boolean");
    o.coarse_search = j["coarse_search"].get<bool>();
  }
  return o;
}

inline EmpiricalModel empirical_model(const json &j, const std::string &path) {
  MeasurementScenario sc;
  const json &ms = require(j, "measurements", path);
  if (!ms.is_array()) field_error(path + ".measurements", "expected an array");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string mp = path + ".measurements[" + std::to_string(i) + "]";
    allow_only(ms[i], {"id", "outcomes"}, mp);
    sc.measurements.push_back({string(require(ms[i], "id", mp), mp + ".id"),
                               count(require(ms[i], "outcomes", mp), mp + ".outcomes")});
  }
  const json &cs = require(j, "contexts", path);
  if (!cs.is_array()) field_error(path + ".contexts", "expected an array");
  std::vector<std::vector<double>> tables;
  for (std::size_t c = 0; c < cs.size(); ++c) {
    const std::string cp = path + ".contexts[" + std::to_string(c) + "]";
    allow_only(cs[c], {"measurements", "probabilities"}, cp);
    const json &ids = require(cs[c], "measurements", cp);
    if (!ids.is_array()) field_error(cp + ".measurements", "expected an array of ids");
    std::vector<std::size_t> ctx;
    for (const auto &id : ids)
      ctx.push_back(with_context(cp, [&] { return sc.measurement_index(string(id, cp + ".measurements")); }));
    sc.contexts.push_back(std::move(ctx));
    const json &ps = require(cs[c], "probabilities", cp);
    if (!ps.is_array()) field_error(cp + ".probabilities", "expected an array");
    std::vector<double> t;
    for (std::size_t i = 0; i < ps.size(); ++i) t.push_back(number(ps[i], cp + ".probabilities[" + std::to_string(i) + "]"));
    tables.push_back(std::move(t));
  }
  EmpiricalModel m{std::move(sc), std::move(tables)};
  with_context(path, [&] {
    validate_model(m);
    return 0;
  });
  return m;
}

inline std::vector<std::size_t> count_list(const json &j, const std::string &path) {
  if (!j.is_array()) field_error(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

} // namespace detail

/// Parse and validate a scenario document.
inline Scenario parse_scenario(const json &doc) {
  using namespace detail;
  allow_only(doc, {"schema_version", "name", "graph", "channels", "states", "entanglement", "cells",
                   "empirical_models", "bipartite_states", "cocycle", "initial_section", "options"},
             "$");
  const json &ver = require(doc, "schema_version", "$");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
    field_error("$.schema_version", "unsupported schema version (expected 1)");
  const std::string name = string(require(doc, "name", "$"), "$.name");

  const json &gj = require(doc, "graph", "$");
  allow_only(gj, {"vertices", "edges"}, "$.graph");
  SemanticGraph graph;
  const json &vs = require(gj, "vertices", "$.graph");
  if (!vs.is_array()) field_error("$.graph.vertices", "expected an array");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string p = "$.graph.vertices[" + std::to_string(i) + "]";
    allow_only(vs[i], {"id", "dim"}, p);
    Vertex v{string(require(vs[i], "id", p), p + ".id"), count(require(vs[i], "dim", p), p + ".dim")};
    with_context(p, [&] {
      graph.add_vertex(std::move(v));
      return 0;
    });
  }
  const json &es = require(gj, "edges", "$.graph");
  if (!es.is_array()) field_error("$.graph.edges", "expected an array");
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string p = "$.graph.edges[" + std::to_string(i) + "]";
    allow_only(es[i], {"id", "source", "target"}, p);
    Edge e{string(require(es[i], "id", p), p + ".id"), string(require(es[i], "source", p), p + ".source"),
           string(require(es[i], "target", p), p + ".target")};
    with_context(p, [&] {
      graph.add_edge(std::move(e));
      return 0;
    });
  }

  const json &cj = require(doc, "channels", "$");
  if (!cj.is_object()) field_error("$.channels", "expected an object keyed by edge id");
  std::map<std::string, QuantumChannel> channels;
  for (auto it = cj.begin(); it != cj.end(); ++it) {
    const std::string p = "$.channels." + it.key();
    if (!graph.has_edge(it.key())) field_error(p, "no such edge");
    const std::size_t e = graph.edge_index(it.key());
    channels.emplace(it.key(), channel(it.value(), graph.dim(graph.source_of(e)), graph.dim(graph.target_of(e)), p));
  }

  std::map<std::string, DensityOperator> states;
  if (doc.contains("states")) {
    const json &sj = doc["states"];
    if (!sj.is_object()) field_error("$.states", "expected an object keyed by vertex id");
    for (auto it = sj.begin(); it != sj.end(); ++it) {
      const std::string p = "$.states." + it.key();
      ComplexMatrix m = matrix(it.value(), p);
      states.emplace(it.key(), with_context(p, [&] { return DensityOperator::make(std::move(m)); }));
    }
  }

  Scenario sc{name,
              with_context("$.channels", [&] { return QuantumSemanticSheaf(graph, channels, states); }),
              {}, std::nullopt, {}, {}, std::nullopt, std::nullopt, {}, {}};
  const auto &sheaf = sc.sheaf;

  if (doc.contains("entanglement")) {
    const json &ej = doc["entanglement"];
    if (!ej.is_array()) field_error("$.entanglement", "expected an array");
    for (std::size_t i = 0; i < ej.size(); ++i) {
      const std::string p = "$.entanglement[" + std::to_string(i) + "]";
      allow_only(ej[i], {"edge", "dim_a", "dim_b", "amplitudes"}, p);
      const std::string edge = string(require(ej[i], "edge", p), p + ".edge");
      if (!sheaf.graph().has_edge(edge)) field_error(p + ".edge", "no such edge '" + edge + "'");
      const std::size_t da = count(require(ej[i], "dim_a", p), p + ".dim_a");
      const std::size_t db = count(require(ej[i], "dim_b", p), p + ".dim_b");
      ComplexVector amps = vector(require(ej[i], "amplitudes", p), p + ".amplitudes");
      sc.entanglement.push_back(with_context(p, [&] {
        return EntangledEdgeResource::make(edge, PureState(da, db, std::move(amps)));
      }));
    }
  }

  if (doc.contains("cells")) {
    const json &cl = doc["cells"];
    if (!cl.is_array()) field_error("$.cells", "expected an array");
    TwoCellComplex cx;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      const std::string p = "$.cells[" + std::to_string(i) + "]";
      allow_only(cl[i], {"id", "boundary"}, p);
      TwoCell cell{string(require(cl[i], "id", p), p + ".id"), {}};
      const json &bd = require(cl[i], "boundary", p);
      if (!bd.is_array()) field_error(p + ".boundary", "expected an array");
      for (std::size_t k = 0; k < bd.size(); ++k) {
        const std::string bp = p + ".boundary[" + std::to_string(k) + "]";
        allow_only(bd[k], {"edge", "sign"}, bp);
        const json &sg = require(bd[k], "sign", bp);
        if (!sg.is_number_integer()) field_error(bp + ".sign", "expected +1 or -1");
        cell.boundary.push_back({string(require(bd[k], "edge", bp), bp + ".edge"), sg.get<int>()});
      }
      with_context(p, [&] { return cell_transport(sheaf, cell); });
      cx.cells.push_back(std::move(cell));
    }
    sc.cells = std::move(cx);
  }

  if (doc.contains("empirical_models")) {
    const json &mj = doc["empirical_models"];
    if (!mj.is_array()) field_error("$.empirical_models", "expected an array");
    for (std::size_t i = 0; i < mj.size(); ++i) {
      const std::string p = "$.empirical_models[" + std::to_string(i) + "]";
      allow_only(mj[i], {"name", "measurements", "contexts", "audit"}, p);
      NamedModel nm{string(require(mj[i], "name", p), p + ".name"), empirical_model(mj[i], p), std::nullopt};
      if (mj[i].contains("audit")) {
        const json &a = mj[i]["audit"];
        allow_only(a, {"dim_h1_classical", "dim_h1_quantum"}, p + ".audit");
        nm.audit_dims = std::make_pair(count(require(a, "dim_h1_classical", p + ".audit"), p + ".audit.dim_h1_classical"),
                                       count(require(a, "dim_h1_quantum", p + ".audit"), p + ".audit.dim_h1_quantum"));
      }
      sc.empirical_models.push_back(std::move(nm));
    }
  }

  if (doc.contains("bipartite_states")) {
    const json &bj = doc["bipartite_states"];
    if (!bj.is_array()) field_error("$.bipartite_states", "expected an array");
    for (std::size_t i = 0; i < bj.size(); ++i) {
      const std::string p = "$.bipartite_states[" + std::to_string(i) + "]";
      allow_only(bj[i], {"name", "dim_a", "dim_b", "rho", "amplitudes", "factors_a", "factors_b"}, p);
      const std::string nm = string(require(bj[i], "name", p), p + ".name");
      const std::size_t da = count(require(bj[i], "dim_a", p), p + ".dim_a");
      const std::size_t db = count(require(bj[i], "dim_b", p), p + ".dim_b");
      const bool has_rho = bj[i].contains("rho"), has_amp = bj[i].contains("amplitudes");
      if (has_rho == has_amp) field_error(p, "exactly one of 'rho' or 'amplitudes' is required");
      DensityOperator rho = with_context(p, [&] {
        return has_rho ? DensityOperator::make(matrix(bj[i]["rho"], p + ".rho"))
                       : DensityOperator::pure(vector(bj[i]["amplitudes"], p + ".amplitudes"));
      });
      NamedState ns{nm, with_context(p, [&] { return BipartiteState::make(da, db, rho); }), std::nullopt};
      if (bj[i].contains("factors_a") || bj[i].contains("factors_b")) {
        Factorization f{count_list(require(bj[i], "factors_a", p), p + ".factors_a"),
                        count_list(require(bj[i], "factors_b", p), p + ".factors_b")};
        ns.factors = std::move(f);
      }
      sc.bipartite_states.push_back(std::move(ns));
    }
  }

  if (doc.contains("cocycle")) {
    const json &wj = doc["cocycle"];
    if (!wj.is_object()) field_error("$.cocycle", "expected an object keyed by edge id");
    Cochain1 w = Cochain1::zero(sheaf);
    for (auto it = wj.begin(); it != wj.end(); ++it) {
      const std::string p = "$.cocycle." + it.key();
      if (!sheaf.graph().has_edge(it.key())) field_error(p, "no such edge");
      w.blocks[sheaf.graph().edge_index(it.key())] = matrix(it.value(), p);
    }
    with_context("$.cocycle", [&] {
      w.check_shape(sheaf);
      return 0;
    });
    sc.cocycle = std::move(w);
  }

  if (doc.contains("initial_section")) {
    const json &ij = doc["initial_section"];
    if (!ij.is_object()) field_error("$.initial_section", "expected an object keyed by vertex id");
    Cochain0 s = Cochain0::zero(sheaf);
    for (auto it = ij.begin(); it != ij.end(); ++it) {
      const std::string p = "$.initial_section." + it.key();
      if (!sheaf.graph().has_vertex(it.key())) field_error(p, "no such vertex");
      s.blocks[sheaf.graph().vertex_index(it.key())] = matrix(it.value(), p);
    }
    with_context("$.initial_section", [&] {
      s.check_shape(sheaf);
      return 0;
    });
    sc.initial_section = std::move(s);
  }

  if (doc.contains("options")) sc.options = options(doc["options"], "$.options");
  sc.hash = fnv1a_hex(doc.dump());
  return sc;
}

inline Scenario parse_scenario_text(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    // Translate the byte offset into a line number for the message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Parse, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario_text(ss.str());
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

// ---------------------------------------------------------------------------
// Serialization helpers shared with the report writer

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ComplexMatrix &m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const ComplexVector &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

/// Minimal scenario document (graph plus Kraus channels) for a sheaf.
inline json scenario_json(const std::string &name, const QuantumSemanticSheaf &sheaf, std::uint64_t seed) {
  json vertices = json::array(), edges = json::array(), channels = json::object();
  for (const auto &v : sheaf.graph().vertices()) vertices.push_back({{"id", v.id}, {"dim", v.stalk_dim}});
  for (std::size_t e = 0; e < sheaf.num_edges(); ++e) {
    const Edge &edge = sheaf.graph().edges()[e];
    edges.push_back({{"id", edge.id}, {"source", edge.source}, {"target", edge.target}});
    json ops = json::array();
    for (const auto &k : sheaf.channel(e).kraus()) ops.push_back(to_json(k));
    channels[edge.id] = {{"kind", "kraus"}, {"operators", std::move(ops)}};
  }
  return {{"schema_version", kSchemaVersion},
          {"name", name},
          {"graph", {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}}},
          {"channels", std::move(channels)},
          {"options", {{"seed", seed}}}};
}

} // namespace qsheaf::cli
