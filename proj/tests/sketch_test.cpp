#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sketchsdp/conic_program.hpp"
#include "sketchsdp/sketch.hpp"
#include "sketchsdp/solver.hpp"
#include "sketchsdp/sos.hpp"

using namespace sketchsdp;

namespace {

SubspaceEnsemble single(const Eigen::MatrixXd& u) {
  SubspaceEnsemble e;
  e.n = static_cast<int>(u.rows());
  e.r = static_cast<int>(u.cols());
  e.count = 1;
  e.matrices = {u};
  return e;
}

SdpProblem shifted_quadratic() {
  const Polynomial x = Polynomial::variable(1, 0);
  return compile_pop(x * x - 2.0 * x + Polynomial::constant(1, 2.0), monomial_basis(1, 1));
}

// max b'y s.t. sum y_j A_j + S = C built so both sides are strictly feasible.
struct DualData {
  Eigen::MatrixXd c;
  std::vector<Eigen::MatrixXd> a;
  Eigen::VectorXd b;
};

DualData random_dual(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> g;
  auto rand_sym = [&] {
    Eigen::MatrixXd t(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(i, j) = g(rng);
    return Eigen::MatrixXd(0.5 * (t + t.transpose()));
  };
  DualData d;
  Eigen::MatrixXd x0 = rand_sym();
  x0 = x0 * x0.transpose() + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd s0 = rand_sym();
  s0 = s0 * s0.transpose() + Eigen::MatrixXd::Identity(n, n);
  d.c = s0;
  d.b.resize(m);
  for (int j = 0; j < m; ++j) {
    d.a.push_back(rand_sym());
    d.b[j] = d.a[j].cwiseProduct(x0).sum();
    d.c += g(rng) * d.a[j];
  }
  return d;
}

}  // namespace

TEST(Ensemble, DeterministicAndOrthonormal) {
  const SubspaceEnsemble a = sample_ensemble(5, 2, 100, 42);
  const SubspaceEnsemble b = sample_ensemble(5, 2, 100, 42);
  ASSERT_EQ(a.matrices.size(), 100u);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.matrices[i], b.matrices[i]);
    const Eigen::MatrixXd gram = a.matrices[i].transpose() * a.matrices[i];
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  }
  const SubspaceEnsemble c = sample_ensemble(5, 2, 100, 43);
  EXPECT_NE(a.matrices[0], c.matrices[0]);
}

TEST(Ensemble, RawGaussianHasFullRank) {
  const SubspaceEnsemble e = sample_ensemble(6, 4, 20, 3, false);
  for (const auto& u : e.matrices) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(u);
    EXPECT_GT(svd.singularValues().minCoeff(), 1e-10);
    EXPECT_GT((u.transpose() * u - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-3);
  }
}

TEST(Ensemble, RejectsBadShapes) {
  EXPECT_THROW(sample_ensemble(3, 4, 1, 0), std::invalid_argument);
  EXPECT_THROW(sample_ensemble(3, 0, 1, 0), std::invalid_argument);
  EXPECT_THROW(sample_ensemble(3, 2, 0, 0), std::invalid_argument);
  EXPECT_THROW(extend_ensemble(sample_ensemble(3, 2, 1, 0), 2), std::invalid_argument);
}

TEST(Ensemble, ExtensionKeepsLeadingColumns) {
  const SubspaceEnsemble p = sample_ensemble(10, 3, 7, 5);
  const SubspaceEnsemble q = extend_ensemble(p, 6);
  ASSERT_TRUE(q.nested_of.has_value());
  EXPECT_EQ(*q.nested_of, 3);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(Eigen::MatrixXd(q.matrices[i].leftCols(3)), p.matrices[i]);
    EXPECT_LE((q.matrices[i].transpose() * q.matrices[i] - Eigen::MatrixXd::Identity(6, 6)).norm(),
              1e-12);
  }
  // Direct sampling at the higher rank produces the same chain.
  const SubspaceEnsemble d = sample_ensemble(10, 6, 7, 5);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(d.matrices[i], q.matrices[i]);
}

TEST(Ensemble, ConeSizes) {
  const int ranks[] = {1, 3, 6, 9, 11, 14, 17, 19, 22, 25};
  const int sizes[] = {1, 6, 21, 45, 66, 105, 153, 190, 253, 325};
  for (int k = 0; k < 10; ++k) EXPECT_EQ(sample_ensemble(25, ranks[k], 1, 0).cone_size(), sizes[k]);
}

TEST(Ensemble, JsonRegeneratesMatrices) {
  const SubspaceEnsemble e = extend_ensemble(sample_ensemble(8, 2, 4, 99), 5);
  const nlohmann::json j = e;
  EXPECT_FALSE(j.contains("matrices"));
  const SubspaceEnsemble r = nlohmann::json::parse(j.dump()).get<SubspaceEnsemble>();
  for (int i = 0; i < 4; ++i) EXPECT_EQ(r.matrices[i], e.matrices[i]);
}

TEST(Lift, Examples) {
  const SubspaceEnsemble e = sample_ensemble(6, 3, 4, 1);
  std::vector<Eigen::MatrixXd> zero(4, Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(lift_dual_certificate(zero, e).norm(), 0.0);

  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.5, 0.5, 1.0;
  EXPECT_EQ(lift_dual_certificate({s}, single(Eigen::MatrixXd::Identity(2, 2))), s);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::MatrixXd> blocks;
    for (int i = 0; i < 4; ++i) {
      Eigen::MatrixXd f(3, 2);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 2; ++b) f(a, b) = g(rng);
      blocks.push_back(f * f.transpose());
    }
    EXPECT_GE(min_eigenvalue(lift_dual_certificate(blocks, e)), -1e-10);
  }
  EXPECT_THROW(lift_dual_certificate(zero, sample_ensemble(6, 2, 4, 1)), std::invalid_argument);
}

TEST(ViolationDetection, FractionGrowsWithRank) {
  const int n = 8;
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n);
  x(n - 1, n - 1) = -0.5;
  Eigen::MatrixXd q = sample_ensemble(n, n, 1, 1234).matrices[0];
  x = q * x * q.transpose();

  auto fraction = [&](const SubspaceEnsemble& e) {
    int hits = 0;
    for (const auto& u : e.matrices) hits += min_eigenvalue(u.transpose() * x * u) < 0.0;
    return static_cast<double>(hits) / e.count;
  };
  std::vector<double> nested(n + 1, 0.0);
  std::vector<double> independent(n + 1, 0.0);
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SubspaceEnsemble e = sample_ensemble(n, 1, 100, s);
    for (int r = 1; r <= n; ++r) {
      if (r > 1) e = extend_ensemble(e, r);
      nested[r] += fraction(e) / seeds;
      independent[r] += fraction(sample_ensemble(n, r, 100, mix_seed(s, r))) / seeds;
    }
  }
  for (int r = 2; r <= n; ++r) {
    EXPECT_GE(nested[r], nested[r - 1]) << "rank " << r;
    // 2000 draws per rank: two standard errors of a proportion stay below 0.025.
    EXPECT_GE(independent[r], independent[r - 1] - 0.025) << "rank " << r;
  }
  EXPECT_NEAR(nested[n], 1.0, 1e-12);
  EXPECT_LT(nested[1], 0.5);
}

TEST(RestrictDual, FullRankIsExact) {
  const Polynomial x = Polynomial::variable(1, 0);
  const SdpProblem base = compile_pop(x * x, monomial_basis(1, 1));
  const Solution s = solve(restrict_dual(base, sample_ensemble(2, 2, 1, 0)).program);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 0.0, 1e-7);

  const SdpProblem four = compile_pop(four_double_zero_polynomial(), monomial_basis(2, 4));
  const Solution full = solve(four);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Solution r = solve(restrict_dual(four, sample_ensemble(15, 15, 1, seed)).program);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, full.objective, 1e-6);
  }
}

TEST(RestrictDual, SingleDirectionOracle) {
  // p - lambda = Q : [1, x] with Q = s u u'. Matching x^2 and x forces
  // u parallel to (1, -1) and then lambda = 1; any other direction is infeasible.
  const SdpProblem base = shifted_quadratic();
  Eigen::MatrixXd u(2, 1);
  u << 1.0, -1.0;
  u /= std::sqrt(2.0);
  const BlockSdp good = restrict_dual(base, single(u));
  const Solution s = solve(good.program);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  const Eigen::MatrixXd lifted = base_blocks(good, s)[0];
  Eigen::MatrixXd q(2, 2);
  q << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LE((lifted - q).norm(), 1e-6);

  const Solution e1 = solve(restrict_dual(base, single(Eigen::MatrixXd::Identity(2, 2).leftCols(1))).program);
  EXPECT_EQ(e1.status, SolveStatus::Infeasible);
  EXPECT_TRUE(std::isinf(e1.objective) && e1.objective < 0);
  Eigen::MatrixXd v(2, 1);
  v << std::cos(-0.7), std::sin(-0.7);
  EXPECT_EQ(solve(restrict_dual(base, single(v)).program).status, SolveStatus::Infeasible);
}

TEST(RestrictDual, BlockStructure) {
  const SdpProblem base = compile_pop_on_ball(four_double_zero_polynomial(), monomial_basis(2, 4), 2.0,
                                              monomial_basis(2, 3));
  const BlockSdp sk = restrict_dual(base, sample_ensemble(15, 4, 10, 7));
  ASSERT_EQ(sk.ensembles.size(), 2u);
  EXPECT_EQ(sk.ensembles[0].n, 15);
  EXPECT_EQ(sk.ensembles[1].n, 10);
  EXPECT_EQ(sk.ensembles[1].r, 4);
  EXPECT_EQ(sk.program.num_blocks(), 20);
  EXPECT_EQ(sk.cone_size(), 10);
  EXPECT_EQ(sk.rank(), 4);
  EXPECT_EQ(sk.program.num_rows(), base.num_constraints());
  EXPECT_EQ(sk.origin[10].base_block, 1);
  EXPECT_EQ(sk.origin[10].sample, 0);
}

TEST(RestrictDual, NestedChainIsMonotone) {
  const SdpProblem base = compile_pop(four_double_zero_polynomial(), monomial_basis(2, 4));
  SubspaceEnsemble e = sample_ensemble(15, 2, 20, 11);
  double last = -std::numeric_limits<double>::infinity();
  for (int r : {2, 4, 7, 10, 15}) {
    if (r > e.r) e = extend_ensemble(e, r);
    const Solution s = solve(restrict_dual(base, e).program);
    ASSERT_TRUE(s.status == SolveStatus::Optimal || s.status == SolveStatus::Infeasible);
    EXPECT_GE(s.objective, last - 1e-6) << "rank " << r;
    last = s.objective;
  }
  EXPECT_NEAR(last, 0.0, 1e-5);
}

TEST(RestrictDual, SandwichAndLiftOnRandomDualForm) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + trial % 5;
    const DualData d = random_dual(rng, n, 3);
    const SdpProblem base = dual_form_problem(d.c, d.a, d.b);
    const Solution full = solve(base);
    ASSERT_EQ(full.status, SolveStatus::Optimal);
    const SubspaceEnsemble e = sample_ensemble(n, 2, 6, trial);
    const BlockSdp sk = restrict_dual(base, e);
    const Solution s = solve(sk.program);
    if (s.status != SolveStatus::Optimal) {
      EXPECT_EQ(s.status, SolveStatus::Infeasible);
      continue;
    }
    EXPECT_LE(s.objective, full.objective + 1e-6);
    const Eigen::MatrixXd lift = base_blocks(sk, s)[0];
    const Eigen::VectorXd y = base_free(sk, s);
    Eigen::MatrixXd r = lift - d.c;
    for (int j = 0; j < 3; ++j) r += y[j] * d.a[j];
    EXPECT_LE(r.norm(), 1e-8 * (1.0 + d.c.norm()));
    EXPECT_GE(min_eigenvalue(lift), -1e-10);
  }
}

TEST(ProjectPrimal, FullRankMatchesBase) {
  std::mt19937_64 rng(2);
  const DualData d = random_dual(rng, 5, 3);
  // The primal of the dual form: min <C, X> s.t. <A_j, X> = b_j.
  SdpProblem base;
  base.add_block(5);
  base.block_objective[0] = sparse_upper(d.c);
  for (int j = 0; j < 3; ++j) {
    Constraint c;
    c.blocks.push_back({0, sparse_upper(d.a[j])});
    c.rhs = d.b[j];
    base.constraints.push_back(c);
  }
  const Solution full = solve(base);
  ASSERT_EQ(full.status, SolveStatus::Optimal);
  const SubspaceEnsemble e = sample_ensemble(5, 5, 1, 3, false);
  const BlockSdp sk = project_primal(base, e);
  const Solution s = solve(sk.program);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, full.objective, 1e-6 * (1.0 + std::fabs(full.objective)));
  const Eigen::MatrixXd x = base_blocks(sk, s)[0];
  EXPECT_LE((x - full.psd_blocks[0]).norm(), 1e-3 * (1.0 + full.psd_blocks[0].norm()));

  // Relaxation: low-rank projections never raise a minimum.
  const Solution low = solve(project_primal(base, sample_ensemble(5, 2, 30, 4)).program);
  if (low.status == SolveStatus::Optimal) {
    EXPECT_LE(low.objective, full.objective + 1e-6);
  } else {
    EXPECT_EQ(low.status, SolveStatus::Unbounded);
  }
}

TEST(ProjectPrimal, BaseFeasiblePointStaysFeasible) {
  const SubspaceEnsemble e = sample_ensemble(4, 2, 10, 8);
  Eigen::MatrixXd f = Eigen::MatrixXd::Random(4, 4);
  const Eigen::MatrixXd x = f * f.transpose();
  for (const auto& u : e.matrices) EXPECT_GE(min_eigenvalue(u.transpose() * x * u), -1e-12);
}

TEST(ProjectPrimal, SingleCoordinateLeavesTraceUnbounded) {
  // min Tr(X), X11 = 1, only u = e1 projected: X22 is unconstrained.
  SdpProblem base;
  base.add_block(2);
  base.block_objective[0] = {{0, 0, 1.0}, {1, 1, 1.0}};
  Constraint c;
  c.blocks.push_back({0, {{0, 0, 1.0}}});
  c.rhs = 1.0;
  base.constraints.push_back(c);
  const BlockSdp sk = project_primal(base, single(Eigen::MatrixXd::Identity(2, 2).leftCols(1)));
  EXPECT_EQ(sk.program.num_free(), 3);
  EXPECT_EQ(solve(sk.program).status, SolveStatus::Unbounded);
  // With both coordinates and the off-diagonal unconstrained, the value is 1.
  const Solution full = solve(project_primal(base, single(Eigen::MatrixXd::Identity(2, 2))).program);
  ASSERT_EQ(full.status, SolveStatus::Optimal);
  EXPECT_NEAR(full.objective, 1.0, 1e-7);
}

TEST(BlockSdp, JsonRoundTrip) {
  const SdpProblem base = shifted_quadratic();
  for (const BlockSdp& sk : {restrict_dual(base, sample_ensemble(2, 1, 5, 3)),
                             project_primal(base, extend_ensemble(sample_ensemble(2, 1, 3, 4), 2))}) {
    const BlockSdp r = block_sdp_from_json(nlohmann::json::parse(block_sdp_to_json(sk).dump()));
    EXPECT_EQ(r.kind, sk.kind);
    EXPECT_EQ(r.program.block_dims, sk.program.block_dims);
    EXPECT_EQ(r.program.rhs, sk.program.rhs);
    const Solution a = solve(sk.program);
    const Solution b = solve(r.program);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.objective, b.objective);
  }
  EXPECT_THROW(block_sdp_from_json(nlohmann::json{{"format", "other"}}), std::invalid_argument);
}

TEST(DualForm, RowsAreCoefficientMatching) {
  std::mt19937_64 rng(6);
  const DualData d = random_dual(rng, 3, 2);
  const SdpProblem p = dual_form_problem(d.c, d.a, d.b);
  EXPECT_EQ(p.num_constraints(), 6);
  EXPECT_EQ(p.num_free, 2);
  EXPECT_EQ(p.sense, Sense::Maximize);
  const ConicProgram cp = ConicProgram::from_problem(p);
  // Any (y, S = C - A*(y)) satisfies the rows exactly.
  Eigen::VectorXd y(2);
  y << 0.3, -1.2;
  Eigen::MatrixXd s = d.c - y[0] * d.a[0] - y[1] * d.a[1];
  EXPECT_LE((cp.apply({s}, y) - cp.rhs).norm(), 1e-12);
  EXPECT_THROW(dual_form_problem(d.c, {Eigen::MatrixXd::Zero(2, 2)}, Eigen::VectorXd::Zero(1)),
               std::invalid_argument);
}
