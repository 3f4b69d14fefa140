#include "sketchsdp/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace sketchsdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd gaussian_column(int n, std::uint64_t seed, int sample, int column) {
  std::mt19937_64 gen(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(sample)),
                               static_cast<std::uint64_t>(column)));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(gen);
  return v;
}

// Fill columns [from, r) of u. Orthonormal mode runs classical Gram-Schmidt
// twice against the columns already present.
void fill_columns(Eigen::MatrixXd& u, int from, std::uint64_t seed, int sample, bool orthonormal) {
  for (int j = from; j < u.cols(); ++j) {
    Eigen::VectorXd v = gaussian_column(static_cast<int>(u.rows()), seed, sample, j);
    if (orthonormal) {
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (j > 0) v -= u.leftCols(j) * (u.leftCols(j).transpose() * v);
      }
      const double after = v.norm();
      if (!(after > 1e-10 * before))
        throw std::runtime_error("sampled subspace is rank deficient (sample " +
                                 std::to_string(sample) + ")");
      v /= after;
    }
    u.col(j) = v;
  }
}

void check_rank(const SubspaceEnsemble& e) {
  if (e.orthonormal) return;  // enforced during construction
  for (int i = 0; i < e.count; ++i) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e.matrices[i]);
    if (!(svd.singularValues()[e.r - 1] > 1e-10))
      throw std::runtime_error("sampled subspace is rank deficient (sample " + std::to_string(i) +
                               ")");
  }
}

void check_shape(int n, int r, int count) {
  if (n < 1) throw std::invalid_argument("ensemble dimension must be positive");
  if (count < 1) throw std::invalid_argument("ensemble needs at least one sample");
  if (r < 1 || r > n)
    throw std::invalid_argument("projection rank " + std::to_string(r) + " outside [1, " +
                                std::to_string(n) + "]");
}

void check_ensembles(const SdpProblem& base, const std::vector<SubspaceEnsemble>& per_block) {
  if (static_cast<int>(per_block.size()) != base.num_blocks())
    throw std::invalid_argument("need one ensemble per PSD block");
  for (int k = 0; k < base.num_blocks(); ++k) {
    if (per_block[k].n != base.block_dims[k])
      throw std::invalid_argument("ensemble dimension " + std::to_string(per_block[k].n) +
                                  " does not match block " + std::to_string(k) + " of size " +
                                  std::to_string(base.block_dims[k]));
  }
}

// Position of X_k(p, q), p <= q, among the appended free variables.
int tri_index(int p, int q) { return q * (q + 1) / 2 + p; }

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(a) ^ (b + 0x632be59bd9b4e019ULL));
}

SubspaceEnsemble sample_ensemble(int n, int r, int count, std::uint64_t seed, bool orthonormal) {
  check_shape(n, r, count);
  SubspaceEnsemble e;
  e.n = n;
  e.r = r;
  e.count = count;
  e.seed = seed;
  e.orthonormal = orthonormal;
  e.matrices.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::MatrixXd u(n, r);
    fill_columns(u, 0, seed, i, orthonormal);
    e.matrices.push_back(std::move(u));
  }
  check_rank(e);
  return e;
}

SubspaceEnsemble extend_ensemble(const SubspaceEnsemble& parent, int r_new) {
  check_shape(parent.n, r_new, parent.count);
  if (r_new <= parent.r)
    throw std::invalid_argument("extended rank must exceed the parent rank " +
                                std::to_string(parent.r));
  SubspaceEnsemble e = parent;
  e.r = r_new;
  e.nested_of = parent.r;
  for (int i = 0; i < e.count; ++i) {
    Eigen::MatrixXd u(e.n, r_new);
    u.leftCols(parent.r) = parent.matrices[i];
    fill_columns(u, parent.r, e.seed, i, e.orthonormal);
    e.matrices[i] = std::move(u);
  }
  check_rank(e);
  return e;
}

void to_json(nlohmann::json& j, const SubspaceEnsemble& e) {
  j = {{"n", e.n}, {"r", e.r}, {"count", e.count}, {"seed", e.seed}, {"orthonormal", e.orthonormal}};
  if (e.nested_of) j["nested_of"] = *e.nested_of;
}

void from_json(const nlohmann::json& j, SubspaceEnsemble& e) {
  const int n = j.at("n").get<int>();
  const int r = j.at("r").get<int>();
  const int count = j.at("count").get<int>();
  const auto seed = j.at("seed").get<std::uint64_t>();
  const bool ortho = j.value("orthonormal", true);
  if (j.contains("nested_of")) {
    e = extend_ensemble(sample_ensemble(n, j["nested_of"].get<int>(), count, seed, ortho), r);
  } else {
    e = sample_ensemble(n, r, count, seed, ortho);
  }
}

Eigen::MatrixXd lift_dual_certificate(const std::vector<Eigen::MatrixXd>& blocks,
                                      const SubspaceEnsemble& ens) {
  if (static_cast<int>(blocks.size()) != ens.count)
    throw std::invalid_argument("block count does not match ensemble size");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ens.n, ens.n);
  for (int i = 0; i < ens.count; ++i) {
    if (blocks[i].rows() != ens.r || blocks[i].cols() != ens.r)
      throw std::invalid_argument("block " + std::to_string(i) + " is not " +
                                  std::to_string(ens.r) + "x" + std::to_string(ens.r));
    out.noalias() += ens.matrices[i] * blocks[i] * ens.matrices[i].transpose();
  }
  return 0.5 * (out + out.transpose());
}

int BlockSdp::cone_size() const { return ensembles.empty() ? 0 : ensembles.front().cone_size(); }

int BlockSdp::rank() const { return ensembles.empty() ? 0 : ensembles.front().r; }

std::vector<SubspaceEnsemble> ensembles_for(const SdpProblem& base, const SubspaceEnsemble& ens) {
  if (base.num_blocks() > 0 &&
      std::find(base.block_dims.begin(), base.block_dims.end(), ens.n) == base.block_dims.end())
    throw std::invalid_argument("ensemble dimension " + std::to_string(ens.n) +
                                " matches no PSD block");
  std::vector<SubspaceEnsemble> out;
  for (int k = 0; k < base.num_blocks(); ++k) {
    const int d = base.block_dims[k];
    bool found = false;
    for (int q = 0; q < k && !found; ++q) {
      if (base.block_dims[q] == d) {
        out.push_back(out[q]);
        found = true;
      }
    }
    if (found) continue;
    if (d == ens.n) {
      out.push_back(ens);
      continue;
    }
    const std::uint64_t seed = mix_seed(ens.seed, static_cast<std::uint64_t>(d));
    const int r = std::min(ens.r, d);
    if (ens.nested_of && std::min(*ens.nested_of, d) < r) {
      out.push_back(extend_ensemble(
          sample_ensemble(d, std::min(*ens.nested_of, d), ens.count, seed, ens.orthonormal), r));
    } else {
      out.push_back(sample_ensemble(d, r, ens.count, seed, ens.orthonormal));
    }
  }
  return out;
}

BlockSdp restrict_dual(const SdpProblem& base, const SubspaceEnsemble& ens) {
  return restrict_dual(std::make_shared<const SdpProblem>(base), ensembles_for(base, ens));
}

BlockSdp restrict_dual(std::shared_ptr<const SdpProblem> base,
                       std::vector<SubspaceEnsemble> per_block) {
  check_ensembles(*base, per_block);
  const ConicProgram full = ConicProgram::from_problem(*base);
  BlockSdp out;
  out.kind = SketchKind::RestrictedDual;
  ConicProgram& cp = out.program;
  cp.sense = full.sense;
  cp.free_coeff = full.free_coeff;
  cp.free_cost = full.free_cost;
  cp.rhs = full.rhs;
  cp.labels = full.labels;
  for (int k = 0; k < full.num_blocks(); ++k) {
    const auto& e = per_block[k];
    for (int i = 0; i < e.count; ++i) {
      const Eigen::MatrixXd& u = e.matrices[i];
      const Eigen::MatrixXd ut = u.transpose();
      cp.block_dims.push_back(e.r);
      cp.cost.push_back(ut * full.cost[k] * u);
      std::vector<ConicProgram::BlockRow> rows;
      rows.reserve(full.rows[k].size());
      for (const auto& br : full.rows[k]) rows.push_back({br.row, ut * br.coeff * u});
      cp.rows.push_back(std::move(rows));
      out.origin.push_back({k, i});
    }
  }
  out.base = std::move(base);
  out.ensembles = std::move(per_block);
  return out;
}

BlockSdp project_primal(const SdpProblem& base, const SubspaceEnsemble& ens) {
  return project_primal(std::make_shared<const SdpProblem>(base), ensembles_for(base, ens));
}

BlockSdp project_primal(std::shared_ptr<const SdpProblem> base,
                        std::vector<SubspaceEnsemble> per_block) {
  check_ensembles(*base, per_block);
  const ConicProgram full = ConicProgram::from_problem(*base);
  const int m0 = full.num_rows();
  const int f0 = full.num_free();

  std::vector<int> x_offset;
  int nfree = f0;
  int nlink = 0;
  for (int k = 0; k < full.num_blocks(); ++k) {
    const int d = full.block_dims[k];
    x_offset.push_back(nfree);
    nfree += d * (d + 1) / 2;
    nlink += per_block[k].count * per_block[k].cone_size();
  }
  const int m = m0 + nlink;

  BlockSdp out;
  out.kind = SketchKind::ProjectedPrimal;
  ConicProgram& cp = out.program;
  cp.sense = full.sense;
  cp.free_coeff = Eigen::MatrixXd::Zero(m, nfree);
  cp.free_coeff.topLeftCorner(m0, f0) = full.free_coeff;
  cp.free_cost = Eigen::VectorXd::Zero(nfree);
  cp.free_cost.head(f0) = full.free_cost;
  cp.rhs = Eigen::VectorXd::Zero(m);
  cp.rhs.head(m0) = full.rhs;
  cp.labels = full.labels;
  cp.labels.resize(m);

  // <M, X> over the upper-triangle free coordinates of X.
  auto tri_coeffs = [](const Eigen::MatrixXd& mat, Eigen::Ref<Eigen::RowVectorXd> dst) {
    const int d = static_cast<int>(mat.rows());
    for (int q = 0; q < d; ++q) {
      for (int p = 0; p <= q; ++p) dst[tri_index(p, q)] = p == q ? mat(p, p) : mat(p, q) + mat(q, p);
    }
  };

  for (int k = 0; k < full.num_blocks(); ++k) {
    const int d = full.block_dims[k];
    const int len = d * (d + 1) / 2;
    Eigen::RowVectorXd tmp(len);
    tri_coeffs(full.cost[k], tmp);
    cp.free_cost.segment(x_offset[k], len) = tmp.transpose();
    for (const auto& br : full.rows[k]) {
      tri_coeffs(br.coeff, tmp);
      cp.free_coeff.row(br.row).segment(x_offset[k], len) += tmp;
    }
  }

  // Linking rows Z_i(a, b) - (U_i' X U_i)(a, b) = 0.
  int row = m0;
  for (int k = 0; k < full.num_blocks(); ++k) {
    const auto& e = per_block[k];
    const int d = full.block_dims[k];
    const int len = d * (d + 1) / 2;
    for (int i = 0; i < e.count; ++i) {
      const Eigen::MatrixXd& u = e.matrices[i];
      const int blk = cp.num_blocks();
      cp.block_dims.push_back(e.r);
      cp.cost.push_back(Eigen::MatrixXd::Zero(e.r, e.r));
      cp.rows.emplace_back();
      out.origin.push_back({k, i});
      for (int b = 0; b < e.r; ++b) {
        for (int a = 0; a <= b; ++a) {
          Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(e.r, e.r);
          if (a == b) {
            sel(a, a) = 1.0;
          } else {
            sel(a, b) = sel(b, a) = 0.5;
          }
          cp.rows[blk].push_back({row, std::move(sel)});
          // (U'XU)(a,b) = <sym(u_a u_b'), X>
          const Eigen::MatrixXd outer = 0.5 * (u.col(a) * u.col(b).transpose() +
                                               u.col(b) * u.col(a).transpose());
          Eigen::RowVectorXd coeffs(len);
          tri_coeffs(outer, coeffs);
          cp.free_coeff.row(row).segment(x_offset[k], len) = -coeffs;
          cp.labels[row] = RowLabel{"link", {k, i, a, b}};
          ++row;
        }
      }
    }
  }
  out.base = std::move(base);
  out.ensembles = std::move(per_block);
  return out;
}

std::vector<Eigen::MatrixXd> base_blocks(const BlockSdp& sketch, const Solution& solution) {
  std::vector<Eigen::MatrixXd> out;
  const SdpProblem& base = *sketch.base;
  if (sketch.kind == SketchKind::RestrictedDual) {
    if (solution.psd_blocks.size() != sketch.origin.size())
      throw std::invalid_argument("solution does not match the sketched program");
    for (int k = 0; k < base.num_blocks(); ++k) {
      std::vector<Eigen::MatrixXd> blocks;
      for (std::size_t b = 0; b < sketch.origin.size(); ++b) {
        if (sketch.origin[b].base_block == k) blocks.push_back(solution.psd_blocks[b]);
      }
      out.push_back(lift_dual_certificate(blocks, sketch.ensembles[k]));
    }
    return out;
  }
  int off = base.num_free;
  for (int k = 0; k < base.num_blocks(); ++k) {
    const int d = base.block_dims[k];
    Eigen::MatrixXd x(d, d);
    for (int q = 0; q < d; ++q) {
      for (int p = 0; p <= q; ++p) x(p, q) = x(q, p) = solution.free_vars[off + tri_index(p, q)];
    }
    off += d * (d + 1) / 2;
    out.push_back(std::move(x));
  }
  return out;
}

Eigen::VectorXd base_free(const BlockSdp& sketch, const Solution& solution) {
  return solution.free_vars.head(sketch.base->num_free);
}

nlohmann::json block_sdp_to_json(const BlockSdp& sketch) {
  nlohmann::json j;
  j["format"] = "sketchsdp-sketch-1";
  j["kind"] = sketch.kind == SketchKind::RestrictedDual ? "restricted_dual" : "projected_primal";
  j["base"] = *sketch.base;
  j["ensembles"] = sketch.ensembles;
  return j;
}

BlockSdp block_sdp_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "sketchsdp-sketch-1")
    throw std::invalid_argument("not a sketch document (format must be sketchsdp-sketch-1)");
  auto base = std::make_shared<const SdpProblem>(j.at("base").get<SdpProblem>());
  auto ens = j.at("ensembles").get<std::vector<SubspaceEnsemble>>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "restricted_dual") return restrict_dual(std::move(base), std::move(ens));
  if (kind == "projected_primal") return project_primal(std::move(base), std::move(ens));
  throw std::invalid_argument("unknown sketch kind '" + kind + "'");
}

SdpProblem dual_form_problem(const Eigen::MatrixXd& c, const std::vector<Eigen::MatrixXd>& a,
                             const Eigen::VectorXd& b) {
  const int n = static_cast<int>(c.rows());
  const int m = static_cast<int>(a.size());
  if (c.cols() != n || b.size() != m)
    throw std::invalid_argument("dual-form data has inconsistent shapes");
  for (const auto& ai : a) {
    if (ai.rows() != n || ai.cols() != n)
      throw std::invalid_argument("constraint matrix has the wrong shape");
  }
  SdpProblem p;
  p.sense = Sense::Maximize;
  p.add_block(n, "slack");
  p.add_free(m);
  for (int j = 0; j < m; ++j) p.free_objective[j] = b[j];
  for (int q = 0; q < n; ++q) {
    for (int r = 0; r <= q; ++r) {
      const double w = r == q ? 1.0 : kSqrt2;
      Constraint con;
      // An off-diagonal entry value v contributes 2v * S(r, q).
      con.blocks.push_back({0, {{r, q, r == q ? 1.0 : kSqrt2 / 2.0}}});
      for (int j = 0; j < m; ++j) {
        const double v = 0.5 * (a[j](r, q) + a[j](q, r));
        if (v != 0.0) con.free.emplace_back(j, w * v);
      }
      con.rhs = w * 0.5 * (c(r, q) + c(q, r));
      con.label = RowLabel{"entry", {r, q}};
      p.constraints.push_back(std::move(con));
    }
  }
  return p;
}

}  // namespace sketchsdp
