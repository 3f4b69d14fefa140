#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sketchsdp/conic_program.hpp"
#include "sketchsdp/solver.hpp"
#include "sketchsdp/sos.hpp"

using namespace sketchsdp;

namespace {

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, int rank) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd f(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) f(i, j) = g(rng);
  return f * f.transpose();
}

// phi' Q phi built with plain polynomial arithmetic.
Polynomial quadratic_form(const Basis& b, const Eigen::MatrixXd& q) {
  Polynomial p(b.num_vars);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      p = p + Polynomial::monomial(b[i] * b[j], q(i, j));
  return p;
}

}  // namespace

TEST(GramMap, SizesForTwoVariablesDegreeFour) {
  const GramMap g = gram_map(monomial_basis(2, 4));
  EXPECT_EQ(g.basis.size(), 15u);
  EXPECT_EQ(g.monomials.size(), 45u);
  std::size_t pairs = 0;
  int weight = 0;
  for (const auto& row : g.rows) {
    pairs += row.size();
    for (const auto& pr : row) weight += pr.multiplicity;
  }
  EXPECT_EQ(pairs, 120u);
  EXPECT_EQ(weight, 15 * 15);
  EXPECT_EQ(g.row_of(Monomial({4, 4})), g.row_of(Monomial({4, 4})));
  EXPECT_EQ(g.row_of(Monomial({9, 0})), -1);
}

TEST(GramMap, RowsReproduceQuadraticForm) {
  std::mt19937_64 rng(1);
  const Basis b = monomial_basis(2, 3);
  const GramMap g = gram_map(b);
  const Eigen::MatrixXd q = random_psd(rng, static_cast<int>(b.size()), 4);
  const Polynomial p = quadratic_form(b, q);
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    double s = 0.0;
    for (const auto& pr : g.rows[r]) s += pr.multiplicity * q(pr.i, pr.j);
    EXPECT_NEAR(s, p.coeff(g.monomials[r]), 1e-10);
  }
}

TEST(CompileSos, GramMatrixOfKnownSosIsFeasiblePoint) {
  std::mt19937_64 rng(2);
  const Basis b = monomial_basis(2, 2);
  const Eigen::MatrixXd q = random_psd(rng, static_cast<int>(b.size()), 3);
  const SdpProblem prob = compile_sos(quadratic_form(b, q), b);
  prob.validate();
  const ConicProgram cp = ConicProgram::from_problem(prob);
  const Eigen::VectorXd r = cp.apply({q}, Eigen::VectorXd(0)) - cp.rhs;
  EXPECT_LT(r.norm(), 1e-10);
  EXPECT_EQ(prob.num_constraints(), 15);
}

TEST(CompileSos, ClassifiesSimpleExamples) {
  const Polynomial x = Polynomial::variable(1, 0);
  const Basis b1 = monomial_basis(1, 1);
  EXPECT_EQ(solve(compile_sos(x * x + Polynomial::constant(1, 1.0), b1)).status,
            SolveStatus::Optimal);
  EXPECT_EQ(solve(compile_sos(-1.0 * x * x, b1)).status, SolveStatus::Infeasible);
  // x^2 - 2x + 1 = (x - 1)^2 sits on the boundary of the cone.
  EXPECT_EQ(solve(compile_sos(x * x - 2.0 * x + Polynomial::constant(1, 1.0), b1)).status,
            SolveStatus::Optimal);
}

TEST(CompileSos, DegreeTooHighThrows) {
  const Polynomial x = Polynomial::variable(1, 0);
  EXPECT_THROW(compile_sos(x.pow(5), monomial_basis(1, 2)), DegreeError);
  EXPECT_THROW(compile_sos(x, monomial_basis(2, 1)), DimensionError);
}

TEST(CompilePop, QuadraticMinimum) {
  const Polynomial x = Polynomial::variable(1, 0);
  const Polynomial p = x * x - 2.0 * x + Polynomial::constant(1, 2.0);
  const Solution s = solve(compile_pop(p, monomial_basis(1, 1)));
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  EXPECT_NEAR(s.free_vars[0], 1.0, 1e-7);
}

TEST(CompilePop, ShiftEquivariance) {
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial y = Polynomial::variable(2, 1);
  const Polynomial p = x.pow(4) + y.pow(4) - x * y + 0.5 * x;
  const Basis b = monomial_basis(2, 2);
  const Solution a = solve(compile_pop(p, b));
  for (double c : {-3.0, 0.25, 10.0}) {
    const Solution s = solve(compile_pop(p + Polynomial::constant(2, c), b));
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    EXPECT_NEAR(s.objective, a.objective + c, 1e-6);
  }
}

TEST(CompilePop, FourDoubleZeroPolynomial) {
  const Polynomial p = four_double_zero_polynomial();
  EXPECT_EQ(p.degree(), 8);
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      const double pt[] = {a, b};
      EXPECT_EQ(p.eval(pt), 0.0);
    }
  }
  const double origin[] = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(p.eval(origin), 16.0);
  EXPECT_EQ(default_gram_degree(p), 4);
  const Solution s = solve(compile_pop(p, monomial_basis(2, 4)));
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 0.0, 1e-5);
}

TEST(BallCertificate, Examples) {
  const Polynomial x = Polynomial::variable(1, 0);
  const Polynomial one = Polynomial::constant(1, 1.0);
  EXPECT_EQ(solve(compile_sos_on_ball(one, monomial_basis(1, 1), 1.0, monomial_basis(1, 0))).status,
            SolveStatus::Optimal);
  EXPECT_EQ(solve(compile_sos_on_ball(one - x * x, monomial_basis(1, 1), 1.0, monomial_basis(1, 0)))
                .status,
            SolveStatus::Optimal);
  EXPECT_EQ(solve(compile_sos_on_ball(x - 2.0 * one, monomial_basis(1, 1), 1.0, monomial_basis(1, 0)))
                .status,
            SolveStatus::Infeasible);
  EXPECT_THROW(compile_sos_on_ball(one, monomial_basis(1, 1), 1.0, monomial_basis(1, 1)), DegreeError);
  EXPECT_THROW(compile_sos_on_ball(one, monomial_basis(1, 1), 0.0, monomial_basis(1, 0)),
               std::invalid_argument);
}

TEST(BallCertificate, LowerBoundOnBall) {
  // x + 2 = (x + 2)^2 / 4 + (4 - x^2) / 4, so the bound -2 is attained.
  const Polynomial x = Polynomial::variable(1, 0);
  const Solution s = solve(compile_pop_on_ball(x, monomial_basis(1, 1), 2.0, monomial_basis(1, 0)));
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -2.0, 1e-6);
}
