#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sketchsdp/control.hpp"
#include "sketchsdp/measures.hpp"
#include "sketchsdp/sdp_problem.hpp"
#include "sketchsdp/sketch.hpp"
#include "sketchsdp/solver.hpp"

namespace sketchsdp {

enum class ProblemKind { Pop, Poc, RawSdp };

std::string to_string(ProblemKind k);
ProblemKind problem_kind_from_string(const std::string& s);

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::Pop;
  /// Instance description; empty selects the default instance of `kind`.
  /// pop: {"polynomial", "variables", "gram_degree", "ball_radius",
  ///       "multiplier_degree"}; poc: a control problem document;
  /// raw-sdp: an SdpProblem document.
  nlohmann::json problem;
  std::vector<int> ranks;
  int samples = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  SolverConfig solver;
  bool nested = false;
  bool orthonormal = true;
  int jobs = 1;
  std::string out_dir;
  /// Gram degree of the basis the density is evaluated over; 0 picks the
  /// largest one the recovered moments support.
  int density_degree = 0;
  std::vector<GridAxis> grid;

  void validate(int cone_dim) const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// A compiled base instance together with what moment recovery needs.
struct BaseInstance {
  SdpProblem problem;
  std::string moment_family;
  int moment_vars = 1;
  /// Variables kept when marginalizing moments (the states for control).
  std::vector<int> marginal_vars;
  /// Dimension of the block the rank refers to.
  int n = 0;
  std::optional<ControlProblem> control;
};

BaseInstance build_base(const ExperimentConfig& config);

/// Default ranks: 1, 3, 6, ..., 25 for pop, 1..n for the others.
std::vector<int> default_ranks(ProblemKind kind, int n);

/// Ensemble of cell (rank, seed): nested chains share one seed per chain,
/// independent sampling derives a fresh seed per rank.
SubspaceEnsemble sweep_ensemble(const ExperimentConfig& config, int n, int rank,
                                std::uint64_t seed);

struct SweepCell {
  int rank = 0;
  std::uint64_t seed = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  KktResiduals kkt;
};

struct SweepRow {
  int rank = 0;
  int cone_size = 0;
  /// Over runs that ended Optimal, Infeasible or Unbounded (others are only
  /// counted); NaN when there are none.
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::map<SolveStatus, int> counts;
  double seconds = 0.0;
};

struct SweepResult {
  ProblemKind kind = ProblemKind::Pop;
  int n = 0;
  int samples = 0;
  SolveStatus full_status = SolveStatus::NumericalFailure;
  double full_objective = 0.0;
  double full_seconds = 0.0;
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;
};

/// Runs every (rank, seed) cell, up to config.jobs at a time. Solver failures
/// are recorded in the cells and never abort the sweep. With out_dir set,
/// each cell's sketched problem is written to problems/ for replay.
SweepResult run_rank_sweep(const ExperimentConfig& config);

/// rank, cone size, objective statistics and status counts, followed by the
/// unprojected reference row. Contains no timings, so reruns are
/// byte-identical.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_timing_csv(std::ostream& out, const SweepResult& result);
void write_cells_csv(std::ostream& out, const SweepResult& result);

struct DensityResult {
  std::string label;  // "full" or "r<rank>"
  int rank = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::optional<DensityGrid> grid;
  std::vector<std::vector<double>> modes;
  std::string note;
};

/// Full problem plus one restricted solve per rank (first seed); grids are
/// skipped, with a note, when no dual can be recovered.
std::vector<DensityResult> run_density(const ExperimentConfig& config);

/// density_summary.csv plus density_<label>.csv / .pgm under `dir`.
void write_density_outputs(const std::string& dir, const std::vector<DensityResult>& results);

/// Objective formatting used in tables: shortest round-trip decimal, or
/// "-inf" / "inf" / "nan".
std::string format_objective(double v);

/// 0 Optimal, 2 Infeasible, 3 Unbounded, 4 MaxIterations, 5 NumericalFailure.
int exit_code(SolveStatus s);

}  // namespace sketchsdp
