#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sketchsdp/sdp_problem.hpp"

namespace sketchsdp {

/// Dense solver-side form of an SdpProblem. Constraint matrices are stored
/// per block, only for the rows that actually touch the block.
struct ConicProgram {
  struct BlockRow {
    int row = 0;
    Eigen::MatrixXd coeff;
  };

  Sense sense = Sense::Minimize;
  std::vector<int> block_dims;
  std::vector<Eigen::MatrixXd> cost;
  std::vector<std::vector<BlockRow>> rows;
  Eigen::MatrixXd free_coeff;  // num_rows x num_free
  Eigen::VectorXd free_cost;
  Eigen::VectorXd rhs;
  std::vector<RowLabel> labels;

  int num_blocks() const { return static_cast<int>(block_dims.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  int num_free() const { return static_cast<int>(free_cost.size()); }
  /// Sum of PSD block dimensions (the barrier parameter).
  int cone_order() const;
  int max_block_dim() const;

  /// sum_k <A_jk, X_k> + a_j' x_f for every row j.
  Eigen::VectorXd apply(const std::vector<Eigen::MatrixXd>& blocks,
                        const Eigen::VectorXd& free) const;
  /// Block part of A'y.
  std::vector<Eigen::MatrixXd> adjoint_blocks(const Eigen::VectorXd& y) const;
  double objective(const std::vector<Eigen::MatrixXd>& blocks, const Eigen::VectorXd& free) const;

  static ConicProgram from_problem(const SdpProblem& problem);
};

Eigen::MatrixXd dense_symmetric(const std::vector<SymEntry>& entries, int dim);

/// Upper-triangle entries of a symmetric matrix with |value| > 0.
std::vector<SymEntry> sparse_upper(const Eigen::MatrixXd& m);

}  // namespace sketchsdp
