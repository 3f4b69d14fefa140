#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sketchsdp/conic_program.hpp"
#include "sketchsdp/solver.hpp"
#include "sketchsdp/sos.hpp"

using namespace sketchsdp;

namespace {

// min Tr(X) s.t. X11 = rhs over 2x2 X >= 0.
SdpProblem trace_problem(double rhs = 1.0) {
  SdpProblem p;
  p.add_block(2);
  p.block_objective[0] = {{0, 0, 1.0}, {1, 1, 1.0}};
  Constraint c;
  c.blocks.push_back({0, {{0, 0, 1.0}}});
  c.rhs = rhs;
  p.constraints.push_back(c);
  return p;
}

// min <C, X> s.t. <A_j, X> = b_j with C, b built around interior points so
// both sides are strictly feasible.
SdpProblem random_feasible(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g;
  auto rand_sym = [&] {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    return Eigen::MatrixXd(0.5 * (a + a.transpose()));
  };
  auto rand_pd = [&] {
    Eigen::MatrixXd f = rand_sym();
    return Eigen::MatrixXd(f * f.transpose() + Eigen::MatrixXd::Identity(n, n));
  };
  const Eigen::MatrixXd x0 = rand_pd();
  Eigen::MatrixXd c = rand_pd();
  SdpProblem p;
  p.add_block(n);
  for (int j = 0; j < m; ++j) {
    const Eigen::MatrixXd a = rand_sym();
    Constraint row;
    row.blocks.push_back({0, sparse_upper(a)});
    row.rhs = (a.cwiseProduct(x0)).sum();
    p.constraints.push_back(row);
    c += g(rng) * a;
  }
  p.block_objective[0] = sparse_upper(c);
  return p;
}

}  // namespace

TEST(InteriorPoint, TraceExample) {
  const SdpProblem p = trace_problem();
  const Solution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  EXPECT_NEAR(s.psd_blocks[0](0, 0), 1.0, 1e-7);
  EXPECT_NEAR(s.psd_blocks[0](1, 1), 0.0, 1e-7);
  EXPECT_NEAR(s.psd_blocks[0](0, 1), 0.0, 1e-7);
  EXPECT_LE(s.kkt.max(), 1e-8 * (1.0 + std::fabs(s.objective)));
  EXPECT_GT(s.iterations, 0);
}

TEST(InteriorPoint, MaximizeSense) {
  // max -X11 - X22 with X11 = 1 is the trace problem negated.
  SdpProblem p = trace_problem();
  p.sense = Sense::Maximize;
  p.block_objective[0] = {{0, 0, -1.0}, {1, 1, -1.0}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-7);
  // Dual slack A'y - C must be PSD for a maximization.
  EXPECT_GE(min_eigenvalue(s.dual_slacks[0]), -1e-8);
}

TEST(InteriorPoint, DetectsInfeasibility) {
  const Solution s = solve(trace_problem(-1.0));
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
  EXPECT_TRUE(std::isinf(s.objective) && s.objective > 0);
  ASSERT_TRUE(s.certificate.has_value());
  // X11 = -1 is refuted by y = -1: A'y = -E11 is NSD and b'y = 1 > 0.
  const double y = s.certificate->multipliers[0];
  EXPECT_LT(y, 0.0);
}

TEST(InteriorPoint, DetectsUnboundedness) {
  // min -2 X12 with X11 = 1: X22 is free to grow, so X12 is unbounded.
  SdpProblem p = trace_problem();
  p.block_objective[0] = {{0, 1, -1.0}};
  const Solution s = solve(p);
  EXPECT_EQ(s.status, SolveStatus::Unbounded);
  EXPECT_TRUE(std::isinf(s.objective) && s.objective < 0);
  ASSERT_TRUE(s.certificate.has_value());
  ASSERT_EQ(s.certificate->blocks.size(), 1u);
  EXPECT_GE(min_eigenvalue(s.certificate->blocks[0]), -1e-8);
}

TEST(InteriorPoint, FreeVariablesAndPopValue) {
  const Polynomial x = Polynomial::variable(1, 0);
  const Solution s = solve(compile_pop(x * x, monomial_basis(1, 1)));
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 0.0, 1e-7);
}

// min x1 + x2 with x1 + x2 = X11 and X11 = 1: the two free columns are equal.
TEST(InteriorPoint, DuplicateFreeColumns) {
  SdpProblem p;
  p.add_block(2);
  p.add_free();
  p.add_free();
  p.free_objective = {1.0, 1.0};
  Constraint link;
  link.blocks.push_back({0, {{0, 0, -1.0}}});
  link.free = {{0, 1.0}, {1, 1.0}};
  Constraint unit;
  unit.blocks.push_back({0, {{0, 0, 1.0}}});
  unit.rhs = 1.0;
  p.constraints = {link, unit};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  ASSERT_EQ(s.free_vars.size(), 2);
  EXPECT_NEAR(s.free_vars.sum(), 1.0, 1e-7);
}

TEST(InteriorPoint, RandomInstancesPassIndependentKkt) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    const SdpProblem p = random_feasible(rng, 4 + trial, 3 + trial);
    const ConicProgram cp = ConicProgram::from_problem(p);
    const Solution s = solve(cp);
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << trial;
    const KktResiduals k = kkt_residuals(cp, s);
    EXPECT_LE(k.max(), 1e-8 * (1.0 + std::fabs(s.objective)));
    EXPECT_LE(k.primal_cone, 1e-10);
  }
}

TEST(KktResiduals, ExactSolutionIsClean) {
  const ConicProgram cp = ConicProgram::from_problem(trace_problem());
  Candidate c;
  c.blocks = {Eigen::MatrixXd::Zero(2, 2)};
  c.blocks[0](0, 0) = 1.0;
  c.free_vars = Eigen::VectorXd(0);
  c.eq_multipliers = Eigen::VectorXd::Constant(1, 1.0);
  const KktResiduals r = kkt_residuals(cp, c);
  EXPECT_LE(r.max(), 1e-12);
}

TEST(KktResiduals, PerturbationIsDetected) {
  const ConicProgram cp = ConicProgram::from_problem(trace_problem());
  Candidate c;
  c.blocks = {Eigen::MatrixXd::Zero(2, 2)};
  c.blocks[0](0, 0) = 1.0 + 1e-3;
  c.free_vars = Eigen::VectorXd(0);
  c.eq_multipliers = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_GE(kkt_residuals(cp, c).primal, 1e-4);
  c.blocks[0](0, 0) = 1.0;
  c.eq_multipliers[0] = 1.0 + 1e-3;
  const KktResiduals r = kkt_residuals(cp, c);
  EXPECT_GE(r.dual, 1e-4 / 3.0);
  EXPECT_GE(r.gap, 1e-4 / 3.0);
}

TEST(KktResiduals, ZeroCandidateMeasuresCost) {
  ConicProgram cp = ConicProgram::from_problem(trace_problem());
  cp.cost[0] << 3.0, -1.0, -1.0, 2.0;
  Candidate c;
  c.blocks = {Eigen::MatrixXd::Zero(2, 2)};
  c.free_vars = Eigen::VectorXd(0);
  c.eq_multipliers = Eigen::VectorXd::Zero(1);
  c.dual_slacks = {Eigen::MatrixXd::Zero(2, 2)};
  const double cn = cp.cost[0].norm();
  EXPECT_NEAR(kkt_residuals(cp, c).dual, cn / (1.0 + cn), 1e-15);
}

TEST(KktResiduals, ShapeMismatchThrows) {
  const ConicProgram cp = ConicProgram::from_problem(trace_problem());
  Candidate c;
  c.blocks = {Eigen::MatrixXd::Zero(3, 3)};
  c.free_vars = Eigen::VectorXd(0);
  c.eq_multipliers = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(kkt_residuals(cp, c), std::invalid_argument);
}

TEST(Solver, TraceCsvHasOneRowPerIteration) {
  SolverConfig cfg;
  cfg.record_trace = true;
  const Solution s = solve(trace_problem(), cfg);
  ASSERT_FALSE(s.trace.empty());
  std::ostringstream out;
  write_trace_csv(out, s.trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,primal,dual,gap,mu,tau,kappa,step,sigma,penalty");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, s.trace.size());
}

TEST(Solver, SolutionJsonRoundTrip) {
  const Solution s = solve(trace_problem());
  const Solution r = solution_from_json(nlohmann::json::parse(solution_to_json(s).dump()));
  EXPECT_EQ(r.status, s.status);
  EXPECT_EQ(r.objective, s.objective);
  EXPECT_EQ(r.iterations, s.iterations);
  ASSERT_EQ(r.psd_blocks.size(), 1u);
  EXPECT_EQ(r.psd_blocks[0], s.psd_blocks[0]);
  EXPECT_EQ(r.eq_multipliers, s.eq_multipliers);

  const Solution inf = solve(trace_problem(-1.0));
  const Solution ri = solution_from_json(solution_to_json(inf));
  EXPECT_EQ(ri.status, SolveStatus::Infeasible);
  EXPECT_EQ(ri.objective, inf.objective);
}

TEST(Solver, StatusNames) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                  SolveStatus::MaxIterations, SolveStatus::NumericalFailure})
    EXPECT_EQ(status_from_string(to_string(st)), st);
  EXPECT_THROW(status_from_string("solved"), std::invalid_argument);
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  cfg.tolerance = -1.0;
  EXPECT_THROW(solve(trace_problem(), cfg), std::invalid_argument);
  cfg = {};
  cfg.step_fraction = 1.5;
  EXPECT_THROW(solve(trace_problem(), cfg), std::invalid_argument);
}

TEST(Consensus, AgreesWithInteriorPoint) {
  std::mt19937_64 rng(8);
  SolverConfig admm;
  admm.mode = SolverMode::Consensus;
  for (int trial = 0; trial < 5; ++trial) {
    const SdpProblem p = random_feasible(rng, 5, 4);
    const Solution a = solve(p);
    const Solution b = solve(p, admm);
    ASSERT_EQ(a.status, SolveStatus::Optimal);
    ASSERT_EQ(b.status, SolveStatus::Optimal);
    EXPECT_LE(std::fabs(a.objective - b.objective), 1e-4 * (1.0 + std::fabs(a.objective)));
    EXPECT_LE(b.kkt.primal, 1e-4);
  }
}

TEST(Consensus, FixedPenaltyResidualIsNonincreasing) {
  std::mt19937_64 rng(9);
  const SdpProblem p = random_feasible(rng, 6, 5);
  SolverConfig cfg;
  cfg.mode = SolverMode::Consensus;
  cfg.adaptive_penalty = false;
  cfg.relaxation = 1.0;
  cfg.record_trace = true;
  const Solution s = solve(p, cfg);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  ASSERT_GT(s.trace.size(), 20u);
  // The fixed-point residual of the splitting is recorded in the mu column.
  for (std::size_t k = 10; k < s.trace.size(); ++k)
    EXPECT_LE(s.trace[k].mu, s.trace[k - 1].mu * (1.0 + 1e-9) + 1e-14) << "iteration " << k;
}

TEST(Consensus, WorkerCountDoesNotChangeResult) {
  std::mt19937_64 rng(10);
  SdpProblem p = random_feasible(rng, 4, 3);
  p.add_block(3);
  p.block_objective[1] = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
  Constraint c;
  c.blocks.push_back({1, {{0, 1, 1.0}}});
  c.rhs = 0.5;
  p.constraints.push_back(c);
  SolverConfig one;
  one.mode = SolverMode::Consensus;
  SolverConfig four = one;
  four.workers = 4;
  const Solution a = solve(p, one);
  const Solution b = solve(p, four);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.iterations, b.iterations);
}
