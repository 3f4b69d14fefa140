#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sketchsdp/conic_program.hpp"
#include "sketchsdp/sdp_problem.hpp"
#include "sketchsdp/solver.hpp"

namespace sketchsdp {

/// N random n x r matrices. Column j of sample i is drawn from a generator
/// seeded by (seed, i, j) alone, so the ensemble is a pure function of its
/// descriptor and a rank-r ensemble is a prefix of every higher-rank one with
/// the same seed.
struct SubspaceEnsemble {
  int n = 0;
  int r = 0;
  int count = 0;
  std::uint64_t seed = 0;
  bool orthonormal = true;
  /// Rank of the ensemble this one was extended from.
  std::optional<int> nested_of;
  std::vector<Eigen::MatrixXd> matrices;

  /// Entries in one projected PSD block, r(r+1)/2.
  int cone_size() const { return r * (r + 1) / 2; }
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Throws std::invalid_argument unless 1 <= r <= n and count >= 1.
SubspaceEnsemble sample_ensemble(int n, int r, int count, std::uint64_t seed,
                                 bool orthonormal = true);

/// Appends r_new - r fresh columns to every sample; the leading r columns are
/// unchanged.
SubspaceEnsemble extend_ensemble(const SubspaceEnsemble& parent, int r_new);

/// Descriptor only (matrices are regenerated on load).
void to_json(nlohmann::json& j, const SubspaceEnsemble& e);
void from_json(const nlohmann::json& j, SubspaceEnsemble& e);

/// sum_i U_i S_i U_i'
Eigen::MatrixXd lift_dual_certificate(const std::vector<Eigen::MatrixXd>& blocks,
                                      const SubspaceEnsemble& ens);

enum class SketchKind { RestrictedDual, ProjectedPrimal };

struct BlockOrigin {
  int base_block = 0;
  int sample = 0;
};

/// A base problem with its PSD constraint replaced by N small ones.
///
/// RestrictedDual substitutes X_k = sum_i U_i S_i U_i' with S_i >= 0; every
/// feasible point lifts to a base-feasible one, so the value is a bound from
/// inside. ProjectedPrimal keeps X_k as free symmetric variables and imposes
/// only U_i' X_k U_i >= 0, which relaxes the base problem; the upper triangle
/// of each X_k is appended to the base free variables.
struct BlockSdp {
  SketchKind kind = SketchKind::RestrictedDual;
  std::shared_ptr<const SdpProblem> base;
  /// One per base PSD block; blocks of equal dimension share one ensemble.
  std::vector<SubspaceEnsemble> ensembles;
  /// Origin of each PSD block of `program`.
  std::vector<BlockOrigin> origin;
  ConicProgram program;

  /// r(r+1)/2 for the first base block.
  int cone_size() const;
  int rank() const;
};

/// Per-block ensembles used when sketching `base` with `ens`: blocks of
/// dimension ens.n reuse `ens`, others get an independent ensemble of rank
/// min(ens.r, dim) seeded from (ens.seed, dim).
std::vector<SubspaceEnsemble> ensembles_for(const SdpProblem& base, const SubspaceEnsemble& ens);

BlockSdp restrict_dual(const SdpProblem& base, const SubspaceEnsemble& ens);
BlockSdp restrict_dual(std::shared_ptr<const SdpProblem> base,
                       std::vector<SubspaceEnsemble> per_block);

BlockSdp project_primal(const SdpProblem& base, const SubspaceEnsemble& ens);
BlockSdp project_primal(std::shared_ptr<const SdpProblem> base,
                        std::vector<SubspaceEnsemble> per_block);

/// Base-space PSD blocks implied by a solution of the sketched program: the
/// lifted sums for RestrictedDual, the recovered X_k for ProjectedPrimal.
std::vector<Eigen::MatrixXd> base_blocks(const BlockSdp& sketch, const Solution& solution);

/// Free variables of the base problem (drops the appended X entries).
Eigen::VectorXd base_free(const BlockSdp& sketch, const Solution& solution);

/// Rebuilt from base + ensemble descriptors, so documents stay small.
nlohmann::json block_sdp_to_json(const BlockSdp& sketch);
BlockSdp block_sdp_from_json(const nlohmann::json& j);

/// Dual-form SDP  max b'y  s.t.  sum_j y_j A_j + S = C,  S >= 0,  written as an
/// SdpProblem with y free and S the single PSD block. Off-diagonal rows are
/// scaled by sqrt(2), so the row residual norm equals the Frobenius norm of
/// A*(y) + S - C.
SdpProblem dual_form_problem(const Eigen::MatrixXd& c, const std::vector<Eigen::MatrixXd>& a,
                             const Eigen::VectorXd& b);

}  // namespace sketchsdp
