#include "sketchsdp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "sketchsdp/sos.hpp"
#include "sketchsdp/thread_pool.hpp"

namespace sketchsdp {

namespace fs = std::filesystem;

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Pop:
      return "pop";
    case ProblemKind::Poc:
      return "poc";
    case ProblemKind::RawSdp:
      return "raw-sdp";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "pop") return ProblemKind::Pop;
  if (s == "poc") return ProblemKind::Poc;
  if (s == "raw-sdp" || s == "raw") return ProblemKind::RawSdp;
  throw std::invalid_argument("unknown problem kind '" + s + "' (expected pop, poc or raw-sdp)");
}

void ExperimentConfig::validate(int cone_dim) const {
  solver.validate();
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  for (int r : ranks) {
    if (r < 1 || r > cone_dim)
      throw std::invalid_argument("rank " + std::to_string(r) + " outside [1, " +
                                  std::to_string(cone_dim) + "]");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("kind")) c.kind = problem_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("problem")) c.problem = j["problem"];
  if (j.contains("problem_file")) {
    std::ifstream in(j["problem_file"].get<std::string>());
    if (!in) throw std::runtime_error("cannot open " + j["problem_file"].get<std::string>());
    c.problem = parse_json_with_position(
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  }
  if (j.contains("ranks")) c.ranks = j["ranks"].get<std::vector<int>>();
  c.samples = j.value("samples", c.samples);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  c.nested = j.value("nested", c.nested);
  c.orthonormal = j.value("orthonormal", c.orthonormal);
  c.jobs = j.value("jobs", c.jobs);
  c.out_dir = j.value("out", c.out_dir);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
    c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    c.solver.step_fraction = s.value("step_fraction", c.solver.step_fraction);
    c.solver.infeasibility_tolerance =
        s.value("infeasibility_tolerance", c.solver.infeasibility_tolerance);
    const auto mode = s.value("mode", std::string("ipm"));
    if (mode == "ipm") {
      c.solver.mode = SolverMode::InteriorPoint;
    } else if (mode == "consensus") {
      c.solver.mode = SolverMode::Consensus;
    } else {
      throw std::invalid_argument("unknown solver mode '" + mode + "'");
    }
    c.solver.workers = s.value("workers", c.solver.workers);
    c.solver.consensus_tolerance = s.value("consensus_tolerance", c.solver.consensus_tolerance);
    c.solver.consensus_max_iterations =
        s.value("consensus_max_iterations", c.solver.consensus_max_iterations);
  }
  if (j.contains("density")) {
    const auto& d = j["density"];
    c.density_degree = d.value("degree", 0);
    if (d.contains("grid")) {
      for (const auto& a : d["grid"])
        c.grid.push_back({a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("count").get<int>()});
    }
  }
  return c;
}

namespace {

BaseInstance pop_instance(const nlohmann::json& spec) {
  const bool is_default =
      !spec.contains("polynomial") || spec["polynomial"].get<std::string>() == "default";
  Polynomial p;
  if (is_default) {
    p = four_double_zero_polynomial();
  } else {
    if (!spec.contains("variables"))
      throw std::invalid_argument("a custom polynomial needs a \"variables\" list");
    p = Polynomial::parse(spec["polynomial"].get<std::string>(),
                          spec["variables"].get<std::vector<std::string>>());
  }
  // The default instance uses a degree-6 Gram basis (28 monomials) so that
  // ranks up to 25 are meaningful, with a ball certificate keeping it
  // strictly feasible.
  const int gram = spec.value("gram_degree", is_default ? 6 : default_gram_degree(p));
  std::optional<double> radius;
  if (spec.contains("ball_radius")) {
    if (!spec["ball_radius"].is_null() && spec["ball_radius"].get<double>() > 0.0)
      radius = spec["ball_radius"].get<double>();
  } else if (is_default) {
    radius = 2.0;
  }
  BaseInstance b;
  const Basis basis = monomial_basis(p.num_vars(), gram);
  if (radius) {
    const int mdeg = spec.value("multiplier_degree", gram - 1);
    b.problem = compile_pop_on_ball(p, basis, *radius, monomial_basis(p.num_vars(), mdeg));
  } else {
    b.problem = compile_pop(p, basis);
  }
  b.moment_family = kSosFamily;
  b.moment_vars = p.num_vars();
  for (int i = 0; i < p.num_vars(); ++i) b.marginal_vars.push_back(i);
  b.n = b.problem.block_dims[0];
  return b;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  if (v.size() % 2 == 1) return v[h];
  if (v[h - 1] == v[h]) return v[h];
  return 0.5 * (v[h - 1] + v[h]);
}

bool counts_toward_statistics(SolveStatus s) {
  return s == SolveStatus::Optimal || s == SolveStatus::Infeasible || s == SolveStatus::Unbounded;
}

const std::vector<SolveStatus>& all_statuses() {
  static const std::vector<SolveStatus> v{SolveStatus::Optimal, SolveStatus::Infeasible,
                                          SolveStatus::Unbounded, SolveStatus::MaxIterations,
                                          SolveStatus::NumericalFailure};
  return v;
}

std::vector<int> sorted_ranks(const ExperimentConfig& config, int n) {
  std::vector<int> r = config.ranks.empty() ? default_ranks(config.kind, n) : config.ranks;
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

int density_degree(const ExperimentConfig& config, const BaseInstance& base) {
  if (config.density_degree > 0) return config.density_degree;
  int max_deg = 0;
  for (const auto& c : base.problem.constraints) {
    if (c.label.family != base.moment_family) continue;
    int d = 0;
    std::size_t k = 0;
    for (int e : c.label.monomial) {
      // Only the kept variables matter after marginalization.
      if (std::find(base.marginal_vars.begin(), base.marginal_vars.end(), static_cast<int>(k)) !=
          base.marginal_vars.end())
        d += e;
      ++k;
    }
    max_deg = std::max(max_deg, d);
  }
  return std::max(1, max_deg / 2);
}

std::vector<GridAxis> density_axes(const ExperimentConfig& config, int dims) {
  if (!config.grid.empty()) return config.grid;
  return std::vector<GridAxis>(dims, GridAxis{-2.0, 2.0, dims == 1 ? 201 : 81});
}

DensityResult density_for(const ExperimentConfig& config, const BaseInstance& base,
                          const Solution& sol, const SdpProblem& rows) {
  DensityResult d;
  d.status = sol.status;
  d.objective = sol.objective;
  if (sol.status != SolveStatus::Optimal) {
    d.note = "no dual to plot (" + to_string(sol.status) + ")";
    return d;
  }
  try {
    MomentVector mv = extract_moments(sol, rows, base.moment_family);
    if (static_cast<int>(base.marginal_vars.size()) != mv.num_vars) mv = marginal(mv, base.marginal_vars);
    const int dims = mv.num_vars;
    if (dims > 2) {
      d.note = "density grids support at most two variables";
      return d;
    }
    const Basis sub = monomial_basis(dims, density_degree(config, base));
    d.grid = density_grid(mv, sub, density_axes(config, dims));
    for (std::size_t idx : local_maxima(*d.grid, 4)) d.modes.push_back(d.grid->point(idx));
  } catch (const std::exception& e) {
    d.grid.reset();
    d.note = e.what();
  }
  return d;
}

}  // namespace

BaseInstance build_base(const ExperimentConfig& config) {
  switch (config.kind) {
    case ProblemKind::Pop:
      return pop_instance(config.problem.is_null() ? nlohmann::json::object() : config.problem);
    case ProblemKind::Poc: {
      BaseInstance b;
      ControlProblem cp = config.problem.is_null() ? default_control_problem()
                                                   : control_problem_from_json(config.problem);
      b.problem = compile_poc(cp);
      b.moment_family = kBellmanFamily;
      b.moment_vars = cp.num_vars();
      for (int i = 0; i < cp.num_states; ++i) b.marginal_vars.push_back(i);
      b.n = b.problem.block_dims[0];
      b.control = std::move(cp);
      return b;
    }
    case ProblemKind::RawSdp: {
      if (config.problem.is_null()) throw std::invalid_argument("raw-sdp needs a problem document");
      BaseInstance b;
      b.problem = config.problem.get<SdpProblem>();
      b.problem.validate();
      b.n = b.problem.cone_dim();
      return b;
    }
  }
  throw std::invalid_argument("unknown problem kind");
}

std::vector<int> default_ranks(ProblemKind kind, int n) {
  if (kind == ProblemKind::Pop) {
    std::vector<int> r;
    for (int v : {1, 3, 6, 9, 11, 14, 17, 19, 22, 25}) {
      if (v <= n) r.push_back(v);
    }
    return r;
  }
  std::vector<int> r;
  for (int v = 1; v <= n; ++v) r.push_back(v);
  return r;
}

SubspaceEnsemble sweep_ensemble(const ExperimentConfig& config, int n, int rank,
                                std::uint64_t seed) {
  if (!config.nested)
    return sample_ensemble(n, rank, config.samples, mix_seed(seed, static_cast<std::uint64_t>(rank)),
                           config.orthonormal);
  const auto ranks = sorted_ranks(config, n);
  const auto it = std::find(ranks.begin(), ranks.end(), rank);
  if (it == ranks.end() || it == ranks.begin())
    return sample_ensemble(n, rank, config.samples, seed, config.orthonormal);
  return extend_ensemble(sample_ensemble(n, *(it - 1), config.samples, seed, config.orthonormal),
                         rank);
}

SweepResult run_rank_sweep(const ExperimentConfig& config) {
  const BaseInstance base = build_base(config);
  config.validate(base.n);
  const auto ranks = sorted_ranks(config, base.n);
  auto base_ptr = std::make_shared<const SdpProblem>(base.problem);

  SweepResult res;
  res.kind = config.kind;
  res.n = base.n;
  res.samples = config.samples;
  const Solution full = solve(base.problem, config.solver);
  res.full_status = full.status;
  res.full_objective = full.objective;
  res.full_seconds = full.seconds;

  for (int r : ranks) {
    for (auto s : config.seeds) {
      SweepCell cell;
      cell.rank = r;
      cell.seed = s;
      res.cells.push_back(cell);
    }
  }
  if (!config.out_dir.empty()) fs::create_directories(fs::path(config.out_dir) / "problems");

  ThreadPool pool(std::min<int>(config.jobs, static_cast<int>(res.cells.size())));
  pool.parallel_for(res.cells.size(), [&](std::size_t i) {
    SweepCell& cell = res.cells[i];
    try {
      const SubspaceEnsemble ens = sweep_ensemble(config, base.n, cell.rank, cell.seed);
      const BlockSdp sketch = restrict_dual(base_ptr, ensembles_for(*base_ptr, ens));
      if (!config.out_dir.empty()) {
        std::ofstream out(fs::path(config.out_dir) / "problems" /
                          ("r" + std::to_string(cell.rank) + "_s" + std::to_string(cell.seed) +
                           ".json"));
        out << block_sdp_to_json(sketch).dump() << '\n';
      }
      const Solution sol = solve(sketch.program, config.solver);
      cell.status = sol.status;
      cell.objective = sol.objective;
      cell.iterations = sol.iterations;
      cell.seconds = sol.seconds;
      cell.kkt = sol.kkt;
    } catch (const std::exception&) {
      cell.status = SolveStatus::NumericalFailure;
      cell.objective = std::numeric_limits<double>::quiet_NaN();
    }
  });

  for (int r : ranks) {
    SweepRow row;
    row.rank = r;
    row.cone_size = r * (r + 1) / 2;
    std::vector<double> vals;
    for (auto st : all_statuses()) row.counts[st] = 0;
    for (const auto& c : res.cells) {
      if (c.rank != r) continue;
      ++row.counts[c.status];
      row.seconds += c.seconds;
      if (counts_toward_statistics(c.status)) vals.push_back(c.objective);
    }
    row.median = median_of(vals);
    row.min = vals.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : *std::min_element(vals.begin(), vals.end());
    row.max = vals.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : *std::max_element(vals.begin(), vals.end());
    res.rows.push_back(std::move(row));
  }
  return res;
}

std::string format_objective(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "rank,cone_size,median_objective,min_objective,max_objective";
  for (auto st : all_statuses()) out << ',' << to_string(st);
  out << '\n';
  for (const auto& row : r.rows) {
    out << row.rank << ',' << row.cone_size << ',' << format_objective(row.median) << ','
        << format_objective(row.min) << ',' << format_objective(row.max);
    for (auto st : all_statuses()) out << ',' << row.counts.at(st);
    out << '\n';
  }
  const std::string obj = format_objective(r.full_objective);
  out << "full," << r.n * (r.n + 1) / 2 << ',' << obj << ',' << obj << ',' << obj;
  for (auto st : all_statuses()) out << ',' << (st == r.full_status ? 1 : 0);
  out << '\n';
}

void write_timing_csv(std::ostream& out, const SweepResult& r) {
  out << "rank,seconds\n";
  for (const auto& row : r.rows) out << row.rank << ',' << row.seconds << '\n';
  out << "full," << r.full_seconds << '\n';
}

void write_cells_csv(std::ostream& out, const SweepResult& r) {
  out << "rank,seed,status,objective,iterations,kkt_max\n";
  for (const auto& c : r.cells) {
    out << c.rank << ',' << c.seed << ',' << to_string(c.status) << ','
        << format_objective(c.objective) << ',' << c.iterations << ','
        << format_double(c.kkt.max()) << '\n';
  }
}

std::vector<DensityResult> run_density(const ExperimentConfig& config) {
  const BaseInstance base = build_base(config);
  config.validate(base.n);
  if (base.moment_family.empty())
    throw std::invalid_argument("density needs a pop or poc instance");
  auto base_ptr = std::make_shared<const SdpProblem>(base.problem);
  std::vector<DensityResult> out;

  const Solution full = solve(base.problem, config.solver);
  DensityResult fd = density_for(config, base, full, base.problem);
  fd.label = "full";
  fd.rank = base.n;
  out.push_back(std::move(fd));

  const auto ranks = sorted_ranks(config, base.n);
  std::vector<DensityResult> per_rank(ranks.size());
  ThreadPool pool(std::min<int>(config.jobs, static_cast<int>(ranks.size())));
  pool.parallel_for(ranks.size(), [&](std::size_t i) {
    const int r = ranks[i];
    DensityResult d;
    try {
      const SubspaceEnsemble ens = sweep_ensemble(config, base.n, r, config.seeds.front());
      const BlockSdp sketch = restrict_dual(base_ptr, ensembles_for(*base_ptr, ens));
      d = density_for(config, base, solve(sketch.program, config.solver), *base_ptr);
    } catch (const std::exception& e) {
      d.note = e.what();
    }
    d.label = "r" + std::to_string(r);
    d.rank = r;
    per_rank[i] = std::move(d);
  });
  for (auto& d : per_rank) out.push_back(std::move(d));
  return out;
}

void write_density_outputs(const std::string& dir, const std::vector<DensityResult>& results) {
  fs::create_directories(dir);
  std::ofstream summary(fs::path(dir) / "density_summary.csv");
  summary << "label,rank,status,objective,modes,note\n";
  for (const auto& d : results) {
    std::string modes;
    for (const auto& m : d.modes) {
      if (!modes.empty()) modes += ' ';
      modes += '(';
      for (std::size_t k = 0; k < m.size(); ++k) modes += (k ? ";" : "") + format_double(m[k]);
      modes += ')';
    }
    std::string note = d.note;
    std::replace(note.begin(), note.end(), ',', ';');
    summary << d.label << ',' << d.rank << ',' << to_string(d.status) << ','
            << format_objective(d.objective) << ',' << modes << ',' << note << '\n';
    if (!d.grid) continue;
    std::ofstream csv(fs::path(dir) / ("density_" + d.label + ".csv"));
    write_grid_csv(csv, *d.grid);
    std::ofstream pgm(fs::path(dir) / ("density_" + d.label + ".pgm"), std::ios::binary);
    write_grid_pgm(pgm, *d.grid);
  }
}

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return 0;
    case SolveStatus::Infeasible:
      return 2;
    case SolveStatus::Unbounded:
      return 3;
    case SolveStatus::MaxIterations:
      return 4;
    case SolveStatus::NumericalFailure:
      return 5;
  }
  return 5;
}

}  // namespace sketchsdp
