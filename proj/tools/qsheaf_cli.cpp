// qsheaf: run scenario files through the toolkit and write reports.
//
//   qsheaf <command> <scenario.json>... [--format json|csv] [--out PATH]
//          [--seed N] [--tol-rank X] [--grid TxP] [--step H] [--steps N]
//   qsheaf generate --seed N [--out PATH]
//
// Exit codes: 0 ok, 1 usage or I/O, 2 validation, 3 missing payload,
// 4 numerical failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsheaf/cli/report.hpp"
#include "qsheaf/cli/scenario.hpp"
#include "qsheaf/corpus.hpp"

namespace fs = std::filesystem;
using namespace qsheaf;
using namespace qsheaf::cli;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_rank;
  std::optional<std::string> grid;
  std::optional<double> step;
  std::optional<std::size_t> steps;
  bool coarse_search = false;
};

struct Job {
  std::string path;
  RunReport report;
  std::optional<Error> load_error;
};

void apply(const Overrides &ov, RunOptions &o) {
  if (ov.seed) o.seed = *ov.seed;
  if (ov.tol_rank) o.tol_rank = *ov.tol_rank;
  if (ov.step) o.step = *ov.step;
  if (ov.steps) o.steps = *ov.steps;
  if (ov.coarse_search) o.coarse_search = true;
  if (ov.grid) {
    static const std::regex re(R"((\d+)[xX](\d+))");
    std::smatch m;
    if (!std::regex_match(*ov.grid, m, re)) fail(ErrorCode::Validation, "--grid expects THETAxPHI, e.g. 64x128");
    o.grid_theta = std::stoul(m[1]);
    o.grid_phi = std::stoul(m[2]);
  }
}

Job run_one(const std::string &path, const std::string &command, const Overrides &ov) {
  Job job{path, {}, std::nullopt};
  try {
    Scenario sc = load_scenario(path);
    apply(ov, sc.options);
    job.report = run_command(sc, command);
  } catch (const Error &e) {
    job.load_error = e;
  }
  return job;
}

std::string stem_for(const Job &job) {
  if (!job.report.doc.is_null()) return job.report.doc.at("scenario").get<std::string>();
  return fs::path(job.path).stem().string();
}

int run_jobs(const std::string &command, const std::vector<std::string> &paths, const Overrides &ov,
             const std::string &format, const std::string &out) {
  std::vector<std::future<Job>> futures;
  for (const auto &p : paths)
    futures.push_back(std::async(std::launch::async, run_one, p, command, std::cref(ov)));
  std::vector<Job> jobs;
  for (auto &f : futures) jobs.push_back(f.get());

  int code = 0;
  for (const auto &j : jobs) {
    if (j.load_error) {
      std::cerr << "qsheaf: " << j.load_error->what() << "\n";
      code = std::max(code, static_cast<int>(exit_code_for(j.load_error->code())));
      continue;
    }
    for (const auto &[cmd, res] : j.report.doc.at("results").items())
      if (res.value("status", "ok") == "error")
        std::cerr << "qsheaf: " << stem_for(j) << ": " << cmd << ": " << res.value("message", "") << "\n";
    code = std::max(code, static_cast<int>(exit_code_for(j.report)));
  }

  const bool many = paths.size() > 1;
  if (out.empty()) {
    bool header = true;
    if (format == "json" && many) std::cout << "[\n";
    bool first = true;
    for (const auto &j : jobs) {
      if (j.load_error) continue;
      if (format == "csv") {
        std::cout << report_csv(j.report, header);
        header = false;
      } else {
        if (many && !first) std::cout << ",\n";
        std::string text = report_json(j.report);
        if (many) text.pop_back();
        std::cout << text;
      }
      first = false;
    }
    if (format == "json" && many) std::cout << "\n]\n";
    return code;
  }

  try {
    for (const auto &j : jobs) {
      if (j.load_error) continue;
      fs::path target = out;
      if (many) {
        fs::create_directories(target);
        target /= stem_for(j) + "." + format;
      } else if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
      }
      emit_report(j.report, format, target);
    }
  } catch (const std::exception &e) {
    std::cerr << "qsheaf: " << e.what() << "\n";
    return 1;
  }
  return code;
}

int generate(std::uint64_t seed, const std::string &out, std::size_t max_vertices, std::size_t max_dim) {
  Rng rng(seed);
  RandomSheafOptions opts;
  opts.max_vertices = max_vertices;
  opts.max_stalk_dim = max_dim;
  const QuantumSemanticSheaf sheaf = random_sheaf(rng, opts);
  const std::string text = scenario_json("random-" + std::to_string(seed), sheaf, seed).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  try {
    write_text(out, text);
  } catch (const std::exception &e) {
    std::cerr << "qsheaf: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Quantum semantic sheaf toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Overrides ov;
  std::vector<std::string> paths;
  std::string format = "json", out;

  std::vector<std::string> commands = command_names();
  commands.push_back("all");
  for (const auto &name : commands) {
    CLI::App *sub = app.add_subcommand(name, name == "all" ? "Run every command the scenario has a payload for"
                                                           : "Run the " + name + " command");
    sub->add_option("scenarios", paths, "Scenario JSON files")->required()->check(CLI::ExistingFile);
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out, "Output file (a directory when several scenarios are given)");
    sub->add_option("--seed", ov.seed, "Seed for random cocycles, encoders and initial sections");
    sub->add_option("--tol-rank", ov.tol_rank, "Relative singular-value cutoff for ranks");
    sub->add_option("--grid", ov.grid, "Measurement grid as THETAxPHI");
    sub->add_option("--step", ov.step, "Diffusion step size");
    sub->add_option("--steps", ov.steps, "Diffusion step count");
    sub->add_flag("--coarse-search", ov.coarse_search, "Allow the random-basis search for dim_b > 2");
  }

  std::uint64_t gen_seed = 0;
  std::size_t gen_vertices = 5, gen_dim = 2;
  std::string gen_out;
  CLI::App *gen = app.add_subcommand("generate", "Write a random scenario");
  gen->add_option("--seed", gen_seed, "64-bit seed (required)")->required();
  gen->add_option("--out", gen_out, "Output file (stdout when omitted)");
  gen->add_option("--max-vertices", gen_vertices, "Largest vertex count")->check(CLI::Range(2, 12));
  gen->add_option("--max-dim", gen_dim, "Largest stalk dimension")->check(CLI::Range(1, 4));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  if (gen->parsed()) return generate(gen_seed, gen_out, gen_vertices, gen_dim);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (ov.grid) {
      RunOptions probe;
      apply(ov, probe);
    }
  } catch (const Error &e) {
    std::cerr << "qsheaf: " << e.what() << "\n";
    return 1;
  }
  return run_jobs(command, paths, ov, format, out);
}
