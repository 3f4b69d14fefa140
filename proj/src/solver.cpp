#include "sketchsdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace sketchsdp {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                  SolveStatus::MaxIterations, SolveStatus::NumericalFailure}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown solve status '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0))
    throw std::invalid_argument("step fraction must lie in (0, 1)");
  if (!(infeasibility_tolerance > 0.0))
    throw std::invalid_argument("infeasibility tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(penalty > 0.0)) throw std::invalid_argument("consensus penalty must be positive");
  if (!(relaxation > 0.0 && relaxation < 2.0))
    throw std::invalid_argument("relaxation must lie in (0, 2)");
  if (!(consensus_tolerance > 0.0))
    throw std::invalid_argument("consensus tolerance must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

double KktResiduals::max() const { return std::max({primal, dual, gap, primal_cone}); }

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

KktResiduals kkt_residuals(const ConicProgram& program, const Candidate& cand) {
  if (cand.blocks.size() != program.block_dims.size())
    throw std::invalid_argument("candidate block count mismatch");
  for (int k = 0; k < program.num_blocks(); ++k) {
    if (cand.blocks[k].rows() != program.block_dims[k] ||
        cand.blocks[k].cols() != program.block_dims[k])
      throw std::invalid_argument("candidate block " + std::to_string(k) + " has wrong shape");
  }
  if (cand.free_vars.size() != program.num_free() || cand.eq_multipliers.size() != program.num_rows())
    throw std::invalid_argument("candidate vector length mismatch");

  const double sign = program.sense == Sense::Minimize ? 1.0 : -1.0;
  KktResiduals r;
  const Eigen::VectorXd ax = program.apply(cand.blocks, cand.free_vars);
  r.primal = (ax - program.rhs).norm() / (1.0 + program.rhs.norm());

  double cnorm2 = program.free_cost.squaredNorm();
  for (const auto& c : program.cost) cnorm2 += c.squaredNorm();
  const auto aty = program.adjoint_blocks(cand.eq_multipliers);
  const bool explicit_slacks = !cand.dual_slacks.empty();
  if (explicit_slacks && cand.dual_slacks.size() != cand.blocks.size())
    throw std::invalid_argument("candidate dual slack count mismatch");
  double violation = 0.0;
  double mismatch2 = 0.0;
  for (int k = 0; k < program.num_blocks(); ++k) {
    const Eigen::MatrixXd s = sign * (program.cost[k] - aty[k]);
    if (explicit_slacks) {
      const Eigen::MatrixXd& sk = cand.dual_slacks[k];
      if (sk.rows() != s.rows() || sk.cols() != s.cols())
        throw std::invalid_argument("candidate dual slack " + std::to_string(k) + " has wrong shape");
      mismatch2 += (s - sk).squaredNorm();
      violation += std::max(0.0, -min_eigenvalue(0.5 * (sk + sk.transpose())));
    } else {
      violation += std::max(0.0, -min_eigenvalue(0.5 * (s + s.transpose())));
    }
    r.primal_cone = std::max(r.primal_cone, -min_eigenvalue(0.5 * (cand.blocks[k] + cand.blocks[k].transpose())));
  }
  if (program.num_free() > 0)
    violation += (program.free_cost - program.free_coeff.transpose() * cand.eq_multipliers).norm();
  r.dual = (violation + std::sqrt(mismatch2)) / (1.0 + std::sqrt(cnorm2));

  const double pobj = program.objective(cand.blocks, cand.free_vars);
  const double dobj = program.rhs.dot(cand.eq_multipliers);
  r.gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
  r.primal_cone = std::max(0.0, r.primal_cone);
  return r;
}

KktResiduals kkt_residuals(const ConicProgram& program, const Solution& s) {
  return kkt_residuals(program, Candidate{s.psd_blocks, s.free_vars, s.eq_multipliers});
}

Solution solve(const ConicProgram& program, const SolverConfig& config) {
  if (config.mode == SolverMode::Consensus) return solve_consensus(program, config);
  return solve_interior_point(program, config);
}

Solution solve(const SdpProblem& problem, const SolverConfig& config) {
  return solve(ConicProgram::from_problem(problem), config);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iteration,primal,dual,gap,mu,tau,kappa,step,sigma,penalty\n";
  for (const auto& t : trace) {
    out << t.iteration << ',' << t.primal << ',' << t.dual << ',' << t.gap << ',' << t.mu << ','
        << t.tau << ',' << t.kappa << ',' << t.step << ',' << t.sigma << ',' << t.penalty << '\n';
  }
}

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  const int c = n > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(n, c);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json solution_to_json(const Solution& s) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  j["objective"] = number_or_inf(s.objective);
  j["iterations"] = s.iterations;
  j["kkt"] = {{"primal", s.kkt.primal},
              {"dual", s.kkt.dual},
              {"gap", s.kkt.gap},
              {"primal_cone", s.kkt.primal_cone}};
  j["psd_blocks"] = nlohmann::json::array();
  for (const auto& b : s.psd_blocks) j["psd_blocks"].push_back(matrix_to_json(b));
  j["free_vars"] = vector_to_json(s.free_vars);
  j["eq_multipliers"] = vector_to_json(s.eq_multipliers);
  if (s.certificate) {
    nlohmann::json c;
    c["multipliers"] = vector_to_json(s.certificate->multipliers);
    c["blocks"] = nlohmann::json::array();
    for (const auto& b : s.certificate->blocks) c["blocks"].push_back(matrix_to_json(b));
    c["free"] = vector_to_json(s.certificate->free);
    j["certificate"] = std::move(c);
  }
  return j;
}

Solution solution_from_json(const nlohmann::json& j) {
  Solution s;
  s.status = status_from_string(j.at("status").get<std::string>());
  s.objective = number_from_json(j.at("objective"));
  s.iterations = j.value("iterations", 0);
  if (j.contains("kkt")) {
    const auto& k = j["kkt"];
    s.kkt = {k.value("primal", 0.0), k.value("dual", 0.0), k.value("gap", 0.0),
             k.value("primal_cone", 0.0)};
  }
  for (const auto& b : j.at("psd_blocks")) s.psd_blocks.push_back(matrix_from_json(b));
  s.free_vars = vector_from_json(j.at("free_vars"));
  s.eq_multipliers = vector_from_json(j.at("eq_multipliers"));
  if (j.contains("certificate")) {
    Certificate c;
    const auto& jc = j["certificate"];
    c.multipliers = vector_from_json(jc.at("multipliers"));
    for (const auto& b : jc.at("blocks")) c.blocks.push_back(matrix_from_json(b));
    c.free = vector_from_json(jc.at("free"));
    s.certificate = std::move(c);
  }
  return s;
}

}  // namespace sketchsdp
