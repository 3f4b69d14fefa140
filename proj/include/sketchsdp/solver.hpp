#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sketchsdp/conic_program.hpp"
#include "sketchsdp/sdp_problem.hpp"

namespace sketchsdp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& s);

enum class SolverMode { InteriorPoint, Consensus };

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.98;
  /// Certificate quality required to declare infeasibility or unboundedness.
  double infeasibility_tolerance = 1e-8;
  SolverMode mode = SolverMode::InteriorPoint;
  bool record_trace = false;

  // Consensus mode.
  double penalty = 1.0;
  bool adaptive_penalty = true;
  double relaxation = 1.6;
  double consensus_tolerance = 1e-7;
  int consensus_max_iterations = 100000;
  /// Worker threads for the per-block projections; 1 runs them inline.
  int workers = 1;

  void validate() const;
};

/// Relative KKT residuals of a candidate point.
struct KktResiduals {
  double primal = 0.0;       // ||Ax - b|| / (1 + ||b||)
  double dual = 0.0;         // dual slack cone violation and free-row mismatch, / (1 + ||c||)
  double gap = 0.0;          // |c'x - b'y| / (1 + |c'x| + |b'y|)
  double primal_cone = 0.0;  // max over blocks of -lambda_min(X_k), clipped at 0

  double max() const;
};

struct TraceRow {
  int iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double mu = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  double step = 0.0;
  double sigma = 0.0;
  double penalty = 0.0;
};

/// Farkas-type ray attached to Infeasible (multiplier ray) or Unbounded
/// (primal ray) outcomes.
struct Certificate {
  Eigen::VectorXd multipliers;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd free;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Objective in the problem's own sense; -inf/+inf for infeasible or
  /// unbounded outcomes.
  double objective = 0.0;
  std::vector<Eigen::MatrixXd> psd_blocks;
  Eigen::VectorXd free_vars;
  /// One per equality row. Sign convention: the dual slack
  /// S = C - A'y (minimize) or S = A'y - C (maximize) is PSD.
  Eigen::VectorXd eq_multipliers;
  std::vector<Eigen::MatrixXd> dual_slacks;
  KktResiduals kkt;
  int iterations = 0;
  double seconds = 0.0;
  std::optional<Certificate> certificate;
  std::vector<TraceRow> trace;
};

/// Point to audit with kkt_residuals. Without dual slacks the dual residual
/// is the cone violation of the implied slack; with them it is the mismatch
/// of the slack equation plus the slacks' own cone violation.
struct Candidate {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd free_vars;
  Eigen::VectorXd eq_multipliers;
  std::vector<Eigen::MatrixXd> dual_slacks;
};

KktResiduals kkt_residuals(const ConicProgram& program, const Candidate& candidate);
KktResiduals kkt_residuals(const ConicProgram& program, const Solution& solution);

/// Dispatches on config.mode.
Solution solve(const ConicProgram& program, const SolverConfig& config = {});
Solution solve(const SdpProblem& problem, const SolverConfig& config = {});

/// Homogeneous self-dual primal-dual interior-point method (HKM direction,
/// Mehrotra predictor-corrector).
Solution solve_interior_point(const ConicProgram& program, const SolverConfig& config);

/// Operator splitting with one independent PSD projection per block and an
/// affine consensus step over the shared equality rows.
Solution solve_consensus(const ConicProgram& program, const SolverConfig& config);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

nlohmann::json solution_to_json(const Solution& s);
Solution solution_from_json(const nlohmann::json& j);

double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace sketchsdp
