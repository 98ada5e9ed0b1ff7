// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/cohomology_oracle.hpp"
#include "oracles/lp_oracle.hpp"
#include "qsheaf/align.hpp"
#include "qsheaf/cli/report.hpp"
#include "qsheaf/cli/scenario.hpp"
#include "qsheaf/corpus.hpp"
#include "qsheaf/resources.hpp"
#include "qsheaf/semantics.hpp"
#include "qsheaf/sheaf.hpp"

using namespace qsheaf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string &what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

std::vector<fs::path> fixture_files() {
  std::vector<fs::path> out;
  for (const auto &e : fs::directory_iterator(QSHEAF_FIXTURE_DIR))
    if (e.path().extension() == ".json" && e.path().filename() != "werner_discord.json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// Fixture sheaves followed by seeded random ones.
std::vector<std::pair<std::string, QuantumSemanticSheaf>> corpus() {
  std::vector<std::pair<std::string, QuantumSemanticSheaf>> out;
  for (const auto &p : fixture_files()) out.emplace_back(p.stem().string(), cli::load_scenario(p.string()).sheaf);
  Rng rng(1001);
  RandomSheafOptions opts;
  for (int i = 0; i < 40; ++i) {
    opts.require_cycle = i % 2 == 0;
    out.emplace_back("random-" + std::to_string(i), random_sheaf(rng, opts));
  }
  return out;
}

Outcome ac1_achievability() {
  Outcome o;
  Rng rng(101);
  const auto t0 = Clock::now();
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    RandomSheafOptions opts;
    opts.require_cycle = i % 4 != 0;
    const QuantumSemanticSheaf s = random_sheaf(rng, opts);
    const std::size_t h1 = cohomology(s).dim_h1;
    try {
      const AlignmentTranscript t = align_protocol(s, random_cochain1(s, rng));
      if (t.residual <= 1e-7 && t.symbols_sent == h1) ++ok;
    } catch (const Error &) {
    }
  }
  const double secs = seconds_since(t0);
  o.check(ok == 100, std::to_string(100 - ok) + " instances failed");
  o.check(secs < 60.0, "runtime over 60 s");
  o.detail << ok << "/100 aligned in " << secs << " s";
  return o;
}

Outcome ac2_converse() {
  Outcome o;
  Rng rng(202);
  int tried = 0, witnessed = 0;
  for (const auto &[name, s] : corpus()) {
    const std::size_t k = cohomology(s).dim_h1;
    if (k == 0) continue;
    ++tried;
    const ComplexMatrix enc = random_gaussian_matrix(static_cast<Eigen::Index>(k - 1),
                                                     static_cast<Eigen::Index>(s.dim_c1()), rng);
    try {
      const ConverseWitness w = converse_witness(s, enc);
      const bool valid = w.codeword_gap <= 1e-9 && w.quotient_distance > 1e-6 && w.encoder_rank == k - 1;
      o.check(valid, name + " gave an invalid witness");
      witnessed += valid;
    } catch (const Error &e) {
      o.check(false, name + ": " + e.what());
    }
  }
  o.check(tried > 0, "no sheaf with dim H1 >= 1");
  o.detail << witnessed << "/" << tried << " witnesses";
  return o;
}

Outcome ac3_kernel() {
  Outcome o;
  int n = 0;
  for (const auto &[name, s] : corpus()) {
    const ComplexMatrix d0 = build_coboundary(s);
    const ComplexMatrix lap = sheaf_laplacian(d0);
    const ComplexMatrix kl = null_space(lap), kd = null_space(d0);
    o.check(kl.cols() == kd.cols(), name + " kernel dimensions differ");
    for (Eigen::Index j = 0; j < kl.cols(); ++j) o.check((d0 * kl.col(j)).norm() <= 1e-8, name + " Laplacian kernel");
    for (Eigen::Index j = 0; j < kd.cols(); ++j) o.check((lap * kd.col(j)).norm() <= 1e-8, name + " coboundary kernel");
    ++n;
  }
  o.detail << n << " sheaves";
  return o;
}

Outcome ac4_oracle() {
  Outcome o;
  std::mt19937_64 rng(404);
  int agree = 0, total = 0;
  for (int i = 0; i < 40; ++i) {
    const bool cells = i % 4 == 3;
    const oracle::ExactSheaf es = oracle::random_exact_sheaf(rng, cells);
    const oracle::ExactCohomology exact = oracle::exact_cohomology(es);
    const CohomologyReport r = cells ? cohomology(oracle::to_library(es), oracle::library_cells(es))
                                     : cohomology(oracle::to_library(es));
    o.check(r.dim_c0 <= 12 && r.dim_c1 <= 12, "instance exceeds dimension 12");
    ++total;
    if (r.dim_h1 == exact.dim_h1) ++agree;
    else o.check(false, "instance " + std::to_string(i) + " disagrees");
  }
  o.check(total >= 30, "fewer than 30 instances");
  o.detail << agree << "/" << total << " exact agreement";
  return o;
}

Outcome ac5_triangle() {
  Outcome o;
  const cli::Scenario tri = cli::load_scenario(std::string(QSHEAF_FIXTURE_DIR) + "/triangle.json");
  const cli::Scenario cell = cli::load_scenario(std::string(QSHEAF_FIXTURE_DIR) + "/triangle_cell.json");
  const CohomologyReport g = cohomology(tri.sheaf);
  const CohomologyReport c = cohomology(cell.sheaf, cell.cells);
  o.check(g.dim_h0 == 1, "dim H0");
  o.check(g.dim_h1 == 1, "dim H1 graph mode");
  o.check(c.dim_h1 == 0, "dim H1 with cell");
  o.check(std::abs(g.spectral_gap - 3.0) <= 1e-9, "spectral gap");
  o.detail << "H0=" << g.dim_h0 << " H1=" << g.dim_h1 << " H1(cell)=" << c.dim_h1 << " gap=" << g.spectral_gap;
  return o;
}

Outcome ac6_entanglement() {
  Outcome o;
  auto resource = [](const std::string &edge, std::size_t d, std::size_t r) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < r; ++i) v(static_cast<Eigen::Index>(i * d + i)) = 1.0 / std::sqrt(double(r));
    return EntangledEdgeResource::make(edge, PureState(d, d, v));
  };
  int cases = 0;
  for (std::size_t k : {0u, 1u, 2u, 4u}) {
    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>> combos = {
        {{2, 1}, {2, 1}},   // all separable
        {{2, 2}},           // one Bell pair
        {{3, 3}, {2, 2}},   // qutrit pair and Bell pair
        {{4, 4}, {4, 4}},   // over budget for small k
        {{3, 2}, {4, 3}}};  // partial Schmidt ranks
    for (const auto &combo : combos) {
      std::vector<EntangledEdgeResource> res;
      double budget = 0.0;
      for (std::size_t i = 0; i < combo.size(); ++i) {
        res.push_back(resource("e" + std::to_string(i), combo[i].first, combo[i].second));
        budget += std::log2(double(combo[i].second));
      }
      const double expected = std::max(0.0, double(k) - budget);
      const double got = ea_h1_dimension(k, res).dim_h1_ea;
      o.check(std::abs(got - expected) <= 1e-12, "k=" + std::to_string(k));
      ++cases;
    }
  }
  o.check(cases >= 20, "fewer than 20 combinations");
  o.detail << cases << " combinations";
  return o;
}

Outcome ac7_contextuality() {
  Outcome o;
  const cli::Scenario sc = cli::load_scenario(std::string(QSHEAF_FIXTURE_DIR) + "/chsh.json");
  const EmpiricalModel *pr = nullptr, *uniform = nullptr;
  for (const auto &m : sc.empirical_models) {
    if (m.name == "pr-box") pr = &m.model;
    if (m.name == "uniform") uniform = &m.model;
  }
  if (!pr || !uniform) {
    o.check(false, "chsh fixture lacks pr-box or uniform");
    return o;
  }
  double worst = 0.0;
  auto timed_cf = [&](const EmpiricalModel &m) {
    const auto t0 = Clock::now();
    const double cf = contextual_fraction(m).cf;
    worst = std::max(worst, seconds_since(t0));
    return cf;
  };
  const auto vertices = nc_vertices(pr->scenario);
  o.check(vertices.size() == 16, "vertex count");
  for (const auto &v : vertices) o.check(timed_cf(v) <= 1e-7, "deterministic vertex");
  o.check(timed_cf(*uniform) <= 1e-7, "uniform noise");

  oracle::RationalModel exact;
  for (const auto &m : pr->scenario.measurements) exact.outcomes.push_back(m.outcomes);
  exact.contexts = pr->scenario.contexts;
  for (const auto &t : pr->tables) {
    std::vector<oracle::Rational> row;
    for (double p : t) row.emplace_back(static_cast<long long>(std::llround(p * 1024)), 1024);
    exact.tables.push_back(std::move(row));
  }
  const double want = static_cast<double>(oracle::contextual_fraction(exact));
  const double got = timed_cf(*pr);
  o.check(std::abs(got - want) <= 1e-7, "PR box vs rational oracle");
  o.check(worst < 1.0, "LP over 1 s");
  o.detail << "cf(PR)=" << got << " oracle=" << want << " slowest LP " << worst << " s";
  return o;
}

Outcome ac8_discord() {
  Outcome o;
  auto q = [](const DensityOperator &rho) { return BipartiteState::make(2, 2, rho); };
  const CorrelationReport bell = discord(q(states::bell_phi_plus()));
  o.check(std::abs(bell.mutual_info - 2.0) <= 1e-6, "Bell I");
  o.check(std::abs(bell.classical_j - 1.0) <= 1e-3, "Bell J");
  o.check(std::abs(bell.discord - 1.0) <= 1e-3, "Bell discord");

  Rng rng(808);
  double worst_product = 0.0;
  for (int i = 0; i < 10; ++i) {
    const DensityOperator a = random_density(2, rng), b = random_density(2, rng);
    worst_product = std::max(worst_product, discord(q(DensityOperator::make(kron(a.matrix(), b.matrix())))).discord);
  }
  o.check(worst_product <= 1e-6, "product discord");

  const double cc = discord(q(states::classically_correlated())).discord;
  o.check(cc <= 2e-3, "classically correlated discord");

  double worst_shift = 0.0;
  MeasurementSearch fine;
  fine.theta_steps *= 2;
  fine.phi_steps *= 2;
  for (int i = 0; i < 5; ++i) {
    const BipartiteState s = q(random_density(4, rng));
    worst_shift = std::max(worst_shift, std::abs(classical_correlation(s).j - classical_correlation(s, fine).j));
  }
  o.check(worst_shift <= 1e-3, "grid doubling");
  o.detail << "Bell I=" << bell.mutual_info << " J=" << bell.classical_j << " D=" << bell.discord
           << "; product D<=" << worst_product << "; classical D=" << cc << "; grid shift " << worst_shift;
  return o;
}

Outcome ac9_integration() {
  Outcome o;
  const cli::Scenario sc = cli::load_scenario(std::string(QSHEAF_FIXTURE_DIR) + "/states.json");
  const MeasurementSearch search = cli::detail::search_for(sc.options);
  double worst = 0.0;
  for (const auto &ns : sc.bipartite_states) {
    const double phi = integrated_information(ns.state, search, IntegrationMode::ProofIdentification);
    worst = std::max(worst, std::abs(phi - discord(ns.state, search).discord));
  }
  o.check(worst <= 1e-9, "proof identification");

  const cli::RunReport rep = cli::run_command(sc, "discord");
  const auto &db = rep.doc.at("results").at("discord").at("states").at("double-bell");
  const auto &ps = db.at("partition_search");
  const double phi = ps.at("phi").get<double>();
  o.check(std::abs(phi) <= 2e-3, "double-Bell partition search");
  o.check(ps.contains("discrepancy_vs_discord"), "discrepancy not reported");
  o.detail << "identity gap " << worst << "; double-Bell phi=" << phi
           << " discrepancy=" << ps.value("discrepancy_vs_discord", 0.0);
  return o;
}

Outcome ac10_diffusion() {
  Outcome o;
  const cli::Scenario sc = cli::load_scenario(std::string(QSHEAF_FIXTURE_DIR) + "/triangle.json");
  Cochain0 init;
  for (double x : {1.0, 0.0, 0.0}) init.blocks.push_back(ComplexMatrix::Constant(1, 1, x));
  const DiffusionTrajectory traj = diffuse(sc.sheaf, init, 0.1, 50);
  const std::vector<double> cf = contraction_factors(traj);
  o.check(!cf.empty(), "no contraction factors");
  const double last = cf.empty() ? 0.0 : cf.back();
  o.check(std::abs(last - 0.7) <= 1e-4, "contraction");
  o.detail << "contraction after " << cf.size() << " steps: " << last;
  return o;
}

Outcome ac11_determinism() {
  Outcome o;
  int n = 0;
  for (const auto &p : fixture_files()) {
    cli::Scenario sc = cli::load_scenario(p.string());
    sc.options.seed = 11;
    const std::string a = cli::strip_timings(cli::run_command(sc, "all").doc).dump(2);
    const std::string b = cli::strip_timings(cli::run_command(sc, "all").doc).dump(2);
    o.check(a == b, p.filename().string() + " differs");
    ++n;
  }
  o.detail << n << " fixtures";
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1_achievability}, {"AC2", ac2_converse},      {"AC3", ac3_kernel},
      {"AC4", ac4_oracle},        {"AC5", ac5_triangle},      {"AC6", ac6_entanglement},
      {"AC7", ac7_contextuality}, {"AC8", ac8_discord},       {"AC9", ac9_integration},
      {"AC10", ac10_diffusion},   {"AC11", ac11_determinism}};
  int failures = 0;
  for (const auto &[id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
