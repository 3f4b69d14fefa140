#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sketchsdp {

enum class Sense { Minimize, Maximize };

/// One upper-triangle coordinate (row <= col) of a symmetric matrix. An
/// off-diagonal entry stands for both (row, col) and (col, row), so it
/// contributes 2 * value * X(row, col) to the trace inner product.
struct SymEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct BlockTerm {
  int block = 0;
  std::vector<SymEntry> entries;
};

/// Optional provenance of a constraint row, e.g. the monomial whose
/// coefficient the row matches.
struct RowLabel {
  std::string family;
  std::vector<int> monomial;

  bool empty() const { return family.empty(); }
};

/// sum_k <A_k, X_k> + sum_f a_f * x_f = rhs
struct Constraint {
  std::vector<BlockTerm> blocks;
  std::vector<std::pair<int, double>> free;
  double rhs = 0.0;
  RowLabel label;
};

/// Sparse symbolic conic program over a direct sum of PSD blocks and free
/// scalars:
///
///   min/max  sum_k <C_k, X_k> + c_f' x_f
///   s.t.     sum_k <A_jk, X_k> + a_j' x_f = b_j,   X_k >= 0.
///
/// A problem whose PSD variable plays the role of the slack S in
/// "A*(y) + S = C" is written in the same form with y as free variables.
struct SdpProblem {
  Sense sense = Sense::Minimize;
  std::vector<int> block_dims;
  std::vector<std::string> block_names;
  int num_free = 0;
  std::vector<std::vector<SymEntry>> block_objective;
  std::vector<double> free_objective;
  std::vector<Constraint> constraints;

  int num_blocks() const { return static_cast<int>(block_dims.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
  /// Largest PSD block dimension.
  int cone_dim() const;

  int add_block(int dim, std::string name = {});
  int add_free(int count = 1);

  /// Throws std::invalid_argument describing the first malformed item.
  void validate() const;
};

void to_json(nlohmann::json& j, const SdpProblem& p);
void from_json(const nlohmann::json& j, SdpProblem& p);

/// Parse a problem document, reporting JSON syntax errors with line and
/// column.
SdpProblem parse_sdp_problem(const std::string& text);
nlohmann::json parse_json_with_position(const std::string& text);

}  // namespace sketchsdp
