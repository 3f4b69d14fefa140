// Command-line front end: rank sweeps, density grids, single solves.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sketchsdp/experiment.hpp"
#include "sketchsdp/sketch.hpp"
#include "sketchsdp/solver.hpp"
#include "sketchsdp/sos.hpp"

namespace fs = std::filesystem;
using namespace sketchsdp;

namespace {

constexpr int kUsageError = 1;

struct CommonFlags {
  std::string config_file;
  std::string kind;
  std::string problem_file;
  std::vector<int> ranks;
  int samples = 0;
  std::vector<std::uint64_t> seeds;
  int jobs = 0;
  double tol = 0.0;
  std::string mode;
  bool nested = false;
  bool raw_gaussian = false;
  std::string out;
  int degree = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_file, "experiment config JSON")->check(CLI::ExistingFile);
  app->add_option("--kind", f.kind, "problem kind")->check(CLI::IsMember({"pop", "poc", "raw-sdp"}));
  app->add_option("--problem", f.problem_file, "instance JSON (polynomial, control problem or SDP)")
      ->check(CLI::ExistingFile);
  app->add_option("--ranks", f.ranks, "projection ranks, comma separated")->delimiter(',');
  app->add_option("--samples", f.samples, "subspaces per rank (N)");
  app->add_option("--seeds", f.seeds, "seeds, comma separated")->delimiter(',');
  app->add_option("--jobs", f.jobs, "concurrent solves");
  app->add_option("--tol", f.tol, "solver tolerance");
  app->add_option("--mode", f.mode, "solver")->check(CLI::IsMember({"ipm", "consensus"}));
  app->add_flag("--nested", f.nested, "extend one ensemble across ranks instead of resampling");
  app->add_flag("--raw-gaussian", f.raw_gaussian, "do not orthonormalize the sampled subspaces");
  app->add_option("--out", f.out, "output directory");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_mode(SolverConfig& s, const std::string& mode) {
  if (mode == "ipm") s.mode = SolverMode::InteriorPoint;
  if (mode == "consensus") s.mode = SolverMode::Consensus;
}

ExperimentConfig make_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_file.empty()) c = experiment_config_from_json(parse_json_with_position(read_file(f.config_file)));
  if (!f.kind.empty()) c.kind = problem_kind_from_string(f.kind);
  if (!f.problem_file.empty()) c.problem = parse_json_with_position(read_file(f.problem_file));
  if (!f.ranks.empty()) c.ranks = f.ranks;
  if (f.samples > 0) c.samples = f.samples;
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.jobs > 0) c.jobs = f.jobs;
  if (f.tol > 0.0) c.solver.tolerance = f.tol;
  apply_mode(c.solver, f.mode);
  if (f.nested) c.nested = true;
  if (f.raw_gaussian) c.orthonormal = false;
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.degree > 0) c.density_degree = f.degree;
  return c;
}

int run_sweep(const CommonFlags& f) {
  const ExperimentConfig c = make_config(f);
  const SweepResult r = run_rank_sweep(c);
  write_sweep_csv(std::cout, r);
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    std::ofstream table(fs::path(c.out_dir) / "sweep.csv");
    write_sweep_csv(table, r);
    std::ofstream timing(fs::path(c.out_dir) / "timing.csv");
    write_timing_csv(timing, r);
    std::ofstream cells(fs::path(c.out_dir) / "cells.csv");
    write_cells_csv(cells, r);
  }
  return 0;
}

int run_density_cmd(const CommonFlags& f) {
  ExperimentConfig c = make_config(f);
  if (c.out_dir.empty()) c.out_dir = "density";
  const auto results = run_density(c);
  write_density_outputs(c.out_dir, results);
  for (const auto& d : results) {
    std::cout << d.label << ": " << to_string(d.status) << " objective "
              << format_objective(d.objective);
    if (d.grid) {
      std::cout << ", modes";
      for (const auto& m : d.modes) {
        std::cout << " (";
        for (std::size_t k = 0; k < m.size(); ++k) std::cout << (k ? ", " : "") << m[k];
        std::cout << ")";
      }
    } else {
      std::cout << ", skipped: " << d.note;
    }
    std::cout << '\n';
  }
  return 0;
}

struct SolveFlags {
  std::string file;
  double tol = 0.0;
  std::string mode;
  std::string trace;
  std::string out;
  int jobs = 1;
};

int run_solve(const SolveFlags& f) {
  const nlohmann::json doc = parse_json_with_position(read_file(f.file));
  SolverConfig cfg;
  if (f.tol > 0.0) cfg.tolerance = f.tol;
  apply_mode(cfg, f.mode);
  cfg.workers = f.jobs;
  cfg.record_trace = !f.trace.empty();

  Solution sol;
  if (doc.is_object() && doc.value("format", std::string()) == "sketchsdp-sketch-1") {
    const BlockSdp sketch = block_sdp_from_json(doc);
    sol = solve(sketch.program, cfg);
  } else {
    SdpProblem p = doc.get<SdpProblem>();
    p.validate();
    sol = solve(p, cfg);
  }
  std::cout << "status " << to_string(sol.status) << "\nobjective " << format_objective(sol.objective)
            << "\niterations " << sol.iterations << "\nkkt primal " << sol.kkt.primal << " dual "
            << sol.kkt.dual << " gap " << sol.kkt.gap << '\n';
  if (!f.out.empty()) {
    std::ofstream out(f.out);
    out << solution_to_json(sol).dump(2) << '\n';
  }
  if (!f.trace.empty()) {
    std::ofstream out(f.trace);
    write_trace_csv(out, sol.trace);
  }
  return exit_code(sol.status);
}

// Quick end-to-end sanity checks with known answers.
int run_selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };
  {
    SdpProblem p;
    p.add_block(2);
    p.block_objective[0] = {{0, 0, 1.0}, {1, 1, 1.0}};
    Constraint c;
    c.blocks.push_back({0, {{0, 0, 1.0}}});
    c.rhs = 1.0;
    p.constraints.push_back(c);
    const Solution s = solve(p);
    check("2x2 trace problem has value 1",
          s.status == SolveStatus::Optimal && std::fabs(s.objective - 1.0) < 1e-6);
  }
  {
    const Polynomial x = Polynomial::variable(1, 0);
    const Polynomial p = x * x - 2.0 * x + Polynomial::constant(1, 2.0);
    const Solution s = solve(compile_pop(p, monomial_basis(1, 1)));
    check("x^2 - 2x + 2 has minimum 1",
          s.status == SolveStatus::Optimal && std::fabs(s.objective - 1.0) < 1e-6);
    const Solution n = solve(compile_sos(-1.0 * x * x, monomial_basis(1, 1)));
    check("-x^2 is not SOS", n.status == SolveStatus::Infeasible);
  }
  {
    const SdpProblem base = compile_pop(four_double_zero_polynomial(), monomial_basis(2, 4));
    const Solution full = solve(base);
    check("four-zero polynomial has minimum 0",
          full.status == SolveStatus::Optimal && std::fabs(full.objective) < 1e-5);
    const BlockSdp sk = restrict_dual(base, sample_ensemble(base.block_dims[0], base.block_dims[0], 1, 7));
    const Solution rs = solve(sk.program);
    check("full-rank restriction is exact",
          rs.status == SolveStatus::Optimal && std::fabs(rs.objective - full.objective) < 1e-6);
  }
  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-subspace sketching for semidefinite programs"};
  app.require_subcommand(1);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "rank sweep of the restricted problem, CSV on stdout");
  add_common(sweep, sweep_flags);

  CommonFlags density_flags;
  auto* density = app.add_subcommand("density", "density grids recovered from the dual per rank");
  add_common(density, density_flags);
  density->add_option("--degree", density_flags.degree, "basis degree of the moment matrix");

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "solve an SdpProblem or sketch JSON file");
  solve_cmd->add_option("file", solve_flags.file, "problem file")->required();
  solve_cmd->add_option("--tol", solve_flags.tol, "solver tolerance");
  solve_cmd->add_option("--mode", solve_flags.mode, "solver")->check(CLI::IsMember({"ipm", "consensus"}));
  solve_cmd->add_option("--trace", solve_flags.trace, "write the iteration trace CSV here");
  solve_cmd->add_option("--out", solve_flags.out, "write the solution JSON here");
  solve_cmd->add_option("--jobs", solve_flags.jobs, "worker threads for consensus projections");

  auto* selftest = app.add_subcommand("selftest", "quick checks against known answers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*sweep) return run_sweep(sweep_flags);
    if (*density) return run_density_cmd(density_flags);
    if (*solve_cmd) return run_solve(solve_flags);
    if (*selftest) return run_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
