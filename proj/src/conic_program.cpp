#include "sketchsdp/conic_program.hpp"

#include <algorithm>
#include <numeric>

namespace sketchsdp {

int ConicProgram::cone_order() const {
  return std::accumulate(block_dims.begin(), block_dims.end(), 0);
}

int ConicProgram::max_block_dim() const {
  return block_dims.empty() ? 0 : *std::max_element(block_dims.begin(), block_dims.end());
}

Eigen::VectorXd ConicProgram::apply(const std::vector<Eigen::MatrixXd>& blocks,
                                    const Eigen::VectorXd& free) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_rows());
  for (int k = 0; k < num_blocks(); ++k) {
    for (const auto& br : rows[k]) out[br.row] += br.coeff.cwiseProduct(blocks[k]).sum();
  }
  if (num_free() > 0) out.noalias() += free_coeff * free;
  return out;
}

std::vector<Eigen::MatrixXd> ConicProgram::adjoint_blocks(const Eigen::VectorXd& y) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(num_blocks());
  for (int k = 0; k < num_blocks(); ++k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(block_dims[k], block_dims[k]);
    for (const auto& br : rows[k]) m.noalias() += y[br.row] * br.coeff;
    out.push_back(std::move(m));
  }
  return out;
}

double ConicProgram::objective(const std::vector<Eigen::MatrixXd>& blocks,
                               const Eigen::VectorXd& free) const {
  double v = num_free() > 0 ? free_cost.dot(free) : 0.0;
  for (int k = 0; k < num_blocks(); ++k) v += cost[k].cwiseProduct(blocks[k]).sum();
  return v;
}

Eigen::MatrixXd dense_symmetric(const std::vector<SymEntry>& entries, int dim) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& e : entries) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

std::vector<SymEntry> sparse_upper(const Eigen::MatrixXd& m) {
  std::vector<SymEntry> out;
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i <= j; ++i) {
      if (m(i, j) != 0.0) out.push_back({i, j, m(i, j)});
    }
  }
  return out;
}

ConicProgram ConicProgram::from_problem(const SdpProblem& problem) {
  problem.validate();
  ConicProgram cp;
  cp.sense = problem.sense;
  cp.block_dims = problem.block_dims;
  const int m = problem.num_constraints();
  cp.rows.resize(problem.num_blocks());
  for (int k = 0; k < problem.num_blocks(); ++k)
    cp.cost.push_back(dense_symmetric(problem.block_objective[k], problem.block_dims[k]));
  cp.free_cost = Eigen::Map<const Eigen::VectorXd>(problem.free_objective.data(), problem.num_free);
  cp.free_coeff = Eigen::MatrixXd::Zero(m, problem.num_free);
  cp.rhs.resize(m);
  cp.labels.reserve(m);
  for (int j = 0; j < m; ++j) {
    const auto& c = problem.constraints[j];
    cp.rhs[j] = c.rhs;
    cp.labels.push_back(c.label);
    // A row may list the same block more than once; merge.
    std::vector<int> slot(problem.num_blocks(), -1);
    for (const auto& bt : c.blocks) {
      const int k = bt.block;
      Eigen::MatrixXd a = dense_symmetric(bt.entries, problem.block_dims[k]);
      if (slot[k] >= 0) {
        cp.rows[k][slot[k]].coeff += a;
      } else {
        slot[k] = static_cast<int>(cp.rows[k].size());
        cp.rows[k].push_back({j, std::move(a)});
      }
    }
    for (const auto& [idx, v] : c.free) cp.free_coeff(j, idx) += v;
  }
  return cp;
}

}  // namespace sketchsdp
