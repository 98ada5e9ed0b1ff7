#pragma once

// Command dispatch and report emission for scenario runs.
//
// A report is a JSON document with sorted keys. Timings live under the
// top-level "timings_ms" key and are the only non-deterministic part.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsheaf/align.hpp"
#include "qsheaf/cli/scenario.hpp"
#include "qsheaf/corpus.hpp"
#include "qsheaf/error.hpp"
#include "qsheaf/random.hpp"
#include "qsheaf/resources.hpp"
#include "qsheaf/semantics.hpp"
#include "qsheaf/sheaf.hpp"
#include "qsheaf/simplex.hpp"

namespace qsheaf::cli {

inline constexpr const char *kToolVersion = "0.1.0";

inline const std::vector<std::string> &command_names() {
  static const std::vector<std::string> names{"cohomology", "align", "spectrum", "ea", "cf", "discord"};
  return names;
}

/// Plot data kept beside the report: rows of (step, value).
struct Series {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> rows;
};

struct RunReport {
  json doc;
  std::vector<Series> series;
};

enum class ExitCode : int { Ok = 0, Usage = 1, Validation = 2, Payload = 3, Numerical = 4 };

inline ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::Payload: return ExitCode::Payload;
  case ErrorCode::Dimension:
  case ErrorCode::Validation:
  case ErrorCode::UnsupportedCell:
  case ErrorCode::MalformedCell:
  case ErrorCode::MissingState:
  case ErrorCode::Parse: return ExitCode::Validation;
  default: return ExitCode::Numerical;
  }
}

/// Exit code implied by a report: the worst status among top-level results.
inline ExitCode exit_code_for(const RunReport &report) {
  ExitCode worst = ExitCode::Ok;
  for (const auto &[cmd, res] : report.doc.at("results").items()) {
    if (res.value("status", "ok") != "error") continue;
    const auto c = static_cast<ExitCode>(res.value("exit_code", 4));
    if (static_cast<int>(c) > static_cast<int>(worst)) worst = c;
  }
  return worst;
}

inline json strip_timings(json doc) {
  doc.erase("timings_ms");
  return doc;
}

namespace detail {

inline json error_json(const Error &e) {
  return {{"status", "error"},
          {"error_code", std::string(to_string(e.code()))},
          {"exit_code", static_cast<int>(exit_code_for(e.code()))},
          {"message", e.message()}};
}

/// Run `f`, turning library errors into an error record.
inline json guarded(const std::function<json()> &f) {
  try {
    json out = f();
    out["status"] = "ok";
    return out;
  } catch (const Error &e) {
    return error_json(e);
  }
}

inline Rng command_rng(const RunOptions &o, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return Rng(seq);
}

inline MeasurementSearch search_for(const RunOptions &o) {
  MeasurementSearch s;
  s.theta_steps = o.grid_theta;
  s.phi_steps = o.grid_phi;
  s.allow_coarse_search = o.coarse_search;
  s.seed = o.seed;
  return s;
}

inline json cochain_json(const QuantumSemanticSheaf &sheaf, const Cochain1 &c) {
  json out = json::object();
  for (std::size_t e = 0; e < sheaf.num_edges(); ++e) out[sheaf.graph().edges()[e].id] = to_json(c.blocks[e]);
  return out;
}

inline json cochain_json(const QuantumSemanticSheaf &sheaf, const Cochain0 &c) {
  json out = json::object();
  for (std::size_t v = 0; v < sheaf.num_vertices(); ++v)
    out[sheaf.graph().vertices()[v].id] = to_json(c.blocks[v]);
  return out;
}

inline json model_json(const EmpiricalModel &m) {
  json ctx = json::array();
  for (std::size_t c = 0; c < m.scenario.contexts.size(); ++c) {
    json ids = json::array();
    for (std::size_t k : m.scenario.contexts[c]) ids.push_back(m.scenario.measurements[k].id);
    ctx.push_back({{"measurements", ids}, {"probabilities", m.tables[c]}});
  }
  return ctx;
}

inline void require_payload(bool present, const std::string &what) {
  if (!present) fail(ErrorCode::Payload, "scenario has no " + what);
}

// -- individual commands ----------------------------------------------------

inline json run_cohomology(const Scenario &sc) {
  const RunOptions &o = sc.options;
  const CohomologyReport rep = cohomology(sc.sheaf, sc.cells, o.tol_rank);
  json out{{"dim_c0", rep.dim_c0},
           {"dim_c1", rep.dim_c1},
           {"rank_delta0", rep.rank_delta0},
           {"dim_ker_delta1", rep.dim_ker_delta1},
           {"dim_H0", rep.dim_h0},
           {"dim_H1", rep.dim_h1},
           {"with_cells", rep.with_cells},
           {"spectral_gap", rep.spectral_gap}};
  if (rep.with_cells) out["dim_H1_graph_mode"] = cohomology(sc.sheaf, std::nullopt, o.tol_rank).dim_h1;
  json basis = json::array();
  for (const auto &b : rep.cocycle_basis) basis.push_back(cochain_json(sc.sheaf, b));
  out["cocycle_basis"] = std::move(basis);

  const SemanticRate rate = semantic_rate(rep);
  out["semantic_rate"] = {{"symbols", rate.symbols}, {"bits", rate.bits}};
  if (o.channel_capacity_bits) {
    out["semantic_capacity"] = guarded([&] {
      return json{{"channel_capacity_bits", *o.channel_capacity_bits},
                  {"messages_per_use", semantic_capacity(*o.channel_capacity_bits, rep)}};
    });
  }
  SectionSearchOptions so;
  so.seed = o.seed ^ 0x5eedULL;
  const GlobalSections gs = global_sections(sc.sheaf, so);
  out["global_sections"] = {{"dimension", gs.basis.size()}, {"density_feasible", gs.density_feasible.has_value()}};
  if (gs.density_feasible) out["global_sections"]["density_section"] = cochain_json(sc.sheaf, *gs.density_feasible);
  return out;
}

/// A random cochain in ker δ¹ (all of C¹ when no cells are attached).
inline Cochain1 random_cocycle(const Scenario &sc, Rng &rng) {
  ComplexVector w = random_gaussian_vector(static_cast<Eigen::Index>(sc.sheaf.dim_c1()), rng);
  if (sc.cells && !sc.cells->cells.empty()) {
    const ComplexMatrix ker = null_space(build_delta1(sc.sheaf, *sc.cells, sc.options.tol_rank));
    w = ker * (ker.adjoint() * w);
  }
  return Cochain1::from_vector(sc.sheaf, w);
}

inline json run_align(const Scenario &sc) {
  const RunOptions &o = sc.options;
  Rng rng = command_rng(o, 0xa11);
  const bool given = sc.cocycle.has_value();
  const Cochain1 omega = given ? *sc.cocycle : random_cocycle(sc, rng);
  const AlignmentTranscript t = align_protocol(sc.sheaf, omega, sc.cells, o.tol_rank);
  json out{{"omega_source", given ? "scenario" : "random"},
           {"coefficients", to_json(t.coefficients)},
           {"residual", t.residual},
           {"symbols_sent", t.symbols_sent},
           {"rate_bits", t.rate_bits},
           {"section", cochain_json(sc.sheaf, t.section)}};

  const std::size_t k = t.symbols_sent;
  if (k == 0) {
    out["converse"] = {{"status", "skipped"}, {"reason", "dim H1 = 0; nothing to compress"}};
    return out;
  }
  out["converse"] = guarded([&] {
    const ComplexMatrix enc = random_gaussian_matrix(static_cast<Eigen::Index>(k - 1),
                                                     static_cast<Eigen::Index>(sc.sheaf.dim_c1()), rng);
    const ConverseWitness w = converse_witness(sc.sheaf, enc, sc.cells, o.tol_rank);
    return json{{"encoder_rows", k - 1},
                {"encoder_rank", w.encoder_rank},
                {"codeword_gap", w.codeword_gap},
                {"quotient_distance", w.quotient_distance}};
  });
  return out;
}

inline json run_spectrum(const Scenario &sc, std::vector<Series> &series) {
  const RunOptions &o = sc.options;
  const ComplexMatrix d0 = build_coboundary(sc.sheaf);
  const ComplexMatrix lap = sheaf_laplacian(d0);
  const RealVector ev = hermitian_eigenvalues(lap);
  std::vector<double> eig(ev.data(), ev.data() + ev.size());
  json out{{"eigenvalues", eig}, {"spectral_gap", spectral_gap(lap, o.tol_rank)}};

  Rng rng = command_rng(o, 0xd1f);
  const bool given = sc.initial_section.has_value();
  const Cochain0 init = given ? *sc.initial_section : random_cochain0(sc.sheaf, rng);
  out["diffusion"] = guarded([&] {
    const DiffusionTrajectory traj = diffuse(sc.sheaf, init, o.step, o.steps);
    const std::vector<double> cf = contraction_factors(traj);
    Series s{"diffusion", "step", "disagreement_norm", {}};
    json samples = json::array();
    for (const auto &p : traj.samples) {
      s.rows.emplace_back(static_cast<double>(p.step), p.disagreement);
      samples.push_back(json::array({p.step, p.disagreement}));
    }
    series.push_back(std::move(s));
    json d{{"initial_source", given ? "scenario" : "random"},
           {"step", o.step},
           {"steps", o.steps},
           {"lambda_max", traj.lambda_max},
           {"predicted_contraction", 1.0 - o.step * traj.spectral_gap},
           {"initial_disagreement", traj.samples.front().disagreement},
           {"final_disagreement", traj.samples.back().disagreement},
           {"trajectory", std::move(samples)}};
    // The contraction settles on the slowest mode; report the last value
    // taken before round-off dominates.
    double last = 0.0;
    for (std::size_t i = 0; i < cf.size(); ++i)
      if (traj.samples[i].disagreement > 1e-10) last = cf[i];
    d["measured_contraction"] = last;
    return d;
  });
  return out;
}

inline json run_ea(const Scenario &sc) {
  require_payload(!sc.entanglement.empty(), "entanglement resources");
  const CohomologyReport rep = cohomology(sc.sheaf, sc.cells, sc.options.tol_rank);
  const EAReport ea = ea_h1_dimension(rep.dim_h1, sc.entanglement);
  json res = json::array();
  for (const auto &r : sc.entanglement)
    res.push_back({{"edge", r.edge}, {"schmidt_rank", r.schmidt_rank}, {"schmidt_coefficients", r.schmidt_coefficients}});
  return {{"dim_H1_unassisted", ea.dim_h1_unassisted},
          {"ebit_budget", ea.ebit_budget},
          {"dim_H1_ea", ea.dim_h1_ea},
          {"resources", std::move(res)}};
}

inline json run_cf(const Scenario &sc) {
  require_payload(!sc.empirical_models.empty(), "empirical models");
  json models = json::object();
  for (const auto &nm : sc.empirical_models) {
    models[nm.name] = guarded([&] {
      const ContextualFraction cf = contextual_fraction(nm.model);
      json m{{"cf", cf.cf},
             {"per_context", cf.per_context},
             {"pivots", cf.pivots},
             {"nearest_nc", model_json(cf.nearest_nc)}};
      if (nm.audit_dims) {
        const auto [cl, qu] = *nm.audit_dims;
        json audit{{"dim_H1_classical", cl}, {"dim_H1_quantum", qu}, {"consistent", theorem3_check(cl, qu, cf.cf)}};
        audit["rate_reduction_bound"] = guarded([&] { return json{{"bits", rate_reduction_bound(cf.cf, cl)}}; });
        m["audit"] = std::move(audit);
      }
      return m;
    });
  }
  return {{"models", std::move(models)}};
}

inline json run_discord(const Scenario &sc) {
  require_payload(!sc.bipartite_states.empty(), "bipartite states");
  const MeasurementSearch search = search_for(sc.options);
  json states = json::object();
  for (const auto &ns : sc.bipartite_states) {
    states[ns.name] = guarded([&] {
      const CorrelationReport r = discord(ns.state, search);
      json s{{"mutual_info", r.mutual_info},
             {"classical_J", r.classical_j},
             {"discord", r.discord},
             {"phi_proof_identification", r.integrated_phi},
             {"measurement",
              {{"theta", r.optimizer_measurement.theta},
               {"phi", r.optimizer_measurement.phi},
               {"lower_bound", r.optimizer_measurement.lower_bound}}}};
      if (ns.factors) {
        s["partition_search"] = guarded([&] {
          const PartitionSearchResult p = partition_search(ns.state, *ns.factors);
          json blocks = json::array();
          for (const auto &b : p.best_partition) blocks.push_back({{"a", b.a_factors}, {"b", b.b_factors}});
          return json{{"phi", p.phi},
                      {"best_sum", p.best_sum},
                      {"best_partition", std::move(blocks)},
                      {"partitions_considered", p.partitions_considered},
                      {"discrepancy_vs_discord", p.phi - r.discord}};
        });
      }
      return s;
    });
  }
  return {{"measurement_class", "rank-1 projective on B"},
          {"grid", {search.theta_steps, search.phi_steps}},
          {"states", std::move(states)}};
}

inline bool has_payload(const Scenario &sc, const std::string &cmd) {
  if (cmd == "ea") return !sc.entanglement.empty();
  if (cmd == "cf") return !sc.empirical_models.empty();
  if (cmd == "discord") return !sc.bipartite_states.empty();
  return true;
}

inline json tolerances_json(const RunOptions &o) {
  return {{"rank", o.tol_rank},
          {"alignment", kAlignmentTolerance},
          {"alignment_failure", kAlignmentFailure},
          {"orthonormal", kOrthonormalTolerance},
          {"section", kSectionTolerance},
          {"state", kStateTolerance},
          {"channel", kChannelTolerance},
          {"no_signalling", kNoSignallingTolerance},
          {"contextuality", kContextualityThreshold}};
}

} // namespace detail

/// Run one command (or "all") on a scenario. Module errors are embedded in
/// the report; an unknown command name is a usage error and throws.
inline RunReport run_command(const Scenario &sc, const std::string &command) {
  const auto &names = command_names();
  std::vector<std::string> todo;
  if (command == "all") {
    for (const auto &n : names)
      if (detail::has_payload(sc, n)) todo.push_back(n);
  } else if (std::find(names.begin(), names.end(), command) != names.end()) {
    todo.push_back(command);
  } else {
    fail(ErrorCode::Validation, "unknown command '" + command + "'");
  }

  RunReport rep;
  const RunOptions &o = sc.options;
  json results = json::object(), timings = json::object();
  for (const auto &cmd : todo) {
    const auto t0 = std::chrono::steady_clock::now();
    json r;
    if (cmd == "cohomology") r = detail::guarded([&] { return detail::run_cohomology(sc); });
    else if (cmd == "align") r = detail::guarded([&] { return detail::run_align(sc); });
    else if (cmd == "spectrum") r = detail::guarded([&] { return detail::run_spectrum(sc, rep.series); });
    else if (cmd == "ea") r = detail::guarded([&] { return detail::run_ea(sc); });
    else if (cmd == "cf") r = detail::guarded([&] { return detail::run_cf(sc); });
    else r = detail::guarded([&] { return detail::run_discord(sc); });
    results[cmd] = std::move(r);
    timings[cmd] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  rep.doc = {{"scenario", sc.name},
             {"scenario_hash", sc.hash},
             {"tool_version", kToolVersion},
             {"command", command},
             {"seed", o.seed},
             {"tolerances", detail::tolerances_json(o)},
             {"options",
              {{"grid", {o.grid_theta, o.grid_phi}},
               {"step", o.step},
               {"steps", o.steps},
               {"coarse_search", o.coarse_search}}},
             {"results", std::move(results)},
             {"timings_ms", std::move(timings)}};
  return rep;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline double tolerance_for(const json &doc, const std::string &command) {
  const json &t = doc.at("tolerances");
  if (command == "align") return t.at("alignment").get<double>();
  if (command == "cf") return lp::kPivotTolerance;
  if (command == "discord") return 1e-3;
  return t.at("rank").get<double>();
}

/// Depth-first walk emitting one row per numeric or boolean leaf. Matrix
/// payloads are plot/data material and stay in the JSON form only.
inline void csv_rows(const json &node, const std::string &prefix, std::vector<std::pair<std::string, std::string>> &rows) {
  static const std::set<std::string> skip{"cocycle_basis", "section", "density_section", "nearest_nc",
                                          "trajectory",    "coefficients", "message"};
  if (node.is_object()) {
    for (const auto &[k, v] : node.items()) {
      if (skip.count(k)) continue;
      csv_rows(v, prefix.empty() ? k : prefix + "." + k, rows);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) csv_rows(node[i], prefix + "[" + std::to_string(i) + "]", rows);
  } else if (node.is_boolean()) {
    rows.emplace_back(prefix, node.get<bool>() ? "1" : "0");
  } else if (node.is_number_integer() || node.is_number_unsigned()) {
    rows.emplace_back(prefix, node.dump());
  } else if (node.is_number()) {
    rows.emplace_back(prefix, format_double(node.get<double>()));
  } else if (node.is_string() && prefix.size() >= 6 && prefix.compare(prefix.size() - 6, 6, "status") == 0) {
    rows.emplace_back(prefix, node.get<std::string>());
  }
}

} // namespace detail

inline std::string csv_header() { return "scenario,command,metric,value,tolerance\n"; }

inline std::string report_csv(const RunReport &report, bool header = true) {
  std::ostringstream os;
  if (header) os << csv_header();
  const std::string scenario = detail::csv_field(report.doc.at("scenario").get<std::string>());
  for (const auto &[cmd, res] : report.doc.at("results").items()) {
    std::vector<std::pair<std::string, std::string>> rows;
    detail::csv_rows(res, "", rows);
    const std::string tol = detail::format_double(detail::tolerance_for(report.doc, cmd));
    for (const auto &[metric, value] : rows)
      os << scenario << ',' << cmd << ',' << detail::csv_field(metric) << ',' << value << ',' << tol << '\n';
  }
  return os.str();
}

inline std::string series_csv(const Series &s) {
  std::ostringstream os;
  os << s.x_label << ',' << s.y_label << '\n';
  for (const auto &[x, y] : s.rows) os << detail::format_double(x) << ',' << detail::format_double(y) << '\n';
  return os.str();
}

inline std::string report_json(const RunReport &report) { return report.doc.dump(2) + "\n"; }

/// Path of a series file next to `report_path`: out/run.json → out/run.diffusion.csv.
inline std::filesystem::path series_path(const std::filesystem::path &report_path, const Series &s) {
  std::filesystem::path p = report_path;
  p.replace_extension();
  p += "." + s.name + ".csv";
  return p;
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

/// Write the report as json or csv to `path`, with plot series beside it.
inline void emit_report(const RunReport &report, const std::string &format, const std::filesystem::path &path) {
  if (format == "json") write_text(path, report_json(report));
  else if (format == "csv") write_text(path, report_csv(report));
  else throw std::invalid_argument("unknown report format '" + format + "'");
  for (const auto &s : report.series) write_text(series_path(path, s), series_csv(s));
}

} // namespace qsheaf::cli
