#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sketchsdp/solver.hpp"
#include "sketchsdp/thread_pool.hpp"

namespace sketchsdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Scaled half-vectorization: <A, B> = svec(A)' svec(B).
void svec_into(const Eigen::MatrixXd& m, Eigen::Ref<Eigen::VectorXd> out) {
  const int d = static_cast<int>(m.rows());
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i <= j; ++i) out[idx++] = i == j ? m(i, j) : kSqrt2 * m(i, j);
  }
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v, int d) {
  Eigen::MatrixXd m(d, d);
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double x = i == j ? v[idx] : v[idx] / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
      ++idx;
    }
  }
  return m;
}

class Consensus {
 public:
  Consensus(const ConicProgram& p, const SolverConfig& cfg) : p_(p), cfg_(cfg), pool_(cfg.workers) {
    const double sign = p.sense == Sense::Minimize ? 1.0 : -1.0;
    int off = 0;
    for (int d : p.block_dims) {
      offsets_.push_back(off);
      off += d * (d + 1) / 2;
    }
    cone_len_ = off;
    n_ = off + p.num_free();
    const int m = p.num_rows();
    a_ = Eigen::MatrixXd::Zero(m, n_);
    c_ = Eigen::VectorXd::Zero(n_);
    for (int k = 0; k < p.num_blocks(); ++k) {
      const int d = p.block_dims[k];
      const int len = d * (d + 1) / 2;
      Eigen::VectorXd tmp(len);
      for (const auto& br : p.rows[k]) {
        svec_into(br.coeff, tmp);
        a_.row(br.row).segment(offsets_[k], len) += tmp.transpose();
      }
      svec_into(sign * p.cost[k], c_.segment(offsets_[k], len));
    }
    if (p.num_free() > 0) {
      a_.rightCols(p.num_free()) = p.free_coeff;
      c_.tail(p.num_free()) = sign * p.free_cost;
    }
  }

  Solution run() {
    const auto start = std::chrono::steady_clock::now();
    Solution sol;
    const int m = p_.num_rows();
    Eigen::MatrixXd aat = a_ * a_.transpose();
    const double reg = 1e-12 * (1.0 + (m > 0 ? aat.diagonal().maxCoeff() : 0.0));
    aat.diagonal().array() += reg;
    Eigen::LLT<Eigen::MatrixXd> llt(aat);
    if (llt.info() != Eigen::Success) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    const Eigen::VectorXd ac = a_ * c_;
    const Eigen::VectorXd& b = p_.rhs;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    double rho = cfg_.penalty;
    const double alpha = cfg_.relaxation;
    const double eps = cfg_.consensus_tolerance;
    const double sqrt_n = std::sqrt(static_cast<double>(n_));
    double best_residual = std::numeric_limits<double>::infinity();
    const int window = 500;
    int window_start = 0;

    sol.status = SolveStatus::MaxIterations;
    int iter = 0;
    for (; iter < cfg_.consensus_max_iterations; ++iter) {
      // Affine step: minimize c'x + rho/2 ||x - v||^2 subject to Ax = b.
      const Eigen::VectorXd v = z - u;
      w = llt.solve(rho * (b - a_ * v) + ac);
      x = v + (a_.transpose() * w - c_) / rho;

      const Eigen::VectorXd xr = alpha * x + (1.0 - alpha) * z;
      const Eigen::VectorXd z_old = z;
      z = xr + u;
      project(z);
      const Eigen::VectorXd u_old = u;
      u += xr - z;

      const double r_prim = (x - z).norm();
      const double r_dual = rho * (z - z_old).norm();
      const double fixed_point = std::sqrt(rho * ((z - z_old).squaredNorm() + (u - u_old).squaredNorm()));
      const double pobj = c_.dot(z);
      const double dobj = b.dot(w);
      const double gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
      const double eps_p = eps * sqrt_n + eps * std::max(x.norm(), z.norm());
      const double eps_d = eps * sqrt_n + eps * rho * u.norm();
      if (cfg_.record_trace) {
        sol.trace.push_back({iter, r_prim, r_dual, gap, fixed_point, 0.0, 0.0, alpha, 0.0, rho});
      }

      if (!std::isfinite(r_prim) || !std::isfinite(r_dual)) {
        sol.status = SolveStatus::NumericalFailure;
        break;
      }
      if (r_prim <= eps_p && r_dual <= eps_d && gap <= eps) {
        sol.status = SolveStatus::Optimal;
        break;
      }
      // Divergence: residual blow-up relative to the best seen in this window.
      const double res = r_prim + r_dual;
      best_residual = std::min(best_residual, res);
      if (res > 1e8 * best_residual) {
        sol.status = SolveStatus::NumericalFailure;
        break;
      }
      if (iter - window_start >= window) {
        window_start = iter;
        best_residual = res;
      }

      if (cfg_.adaptive_penalty && iter % 10 == 9) {
        const double rp_rel = r_prim / std::max(eps_p, 1e-300);
        const double rd_rel = r_dual / std::max(eps_d, 1e-300);
        if (rp_rel > 10.0 * rd_rel) {
          rho *= 2.0;
          u /= 2.0;
        } else if (rd_rel > 10.0 * rp_rel) {
          rho /= 2.0;
          u *= 2.0;
        }
      }
    }
    sol.iterations = iter;

    const double user_sign = p_.sense == Sense::Minimize ? 1.0 : -1.0;
    for (int k = 0; k < p_.num_blocks(); ++k) {
      const int d = p_.block_dims[k];
      const int len = d * (d + 1) / 2;
      sol.psd_blocks.push_back(smat(z.segment(offsets_[k], len), d));
      sol.dual_slacks.push_back(smat(-rho * u.segment(offsets_[k], len), d));
    }
    sol.free_vars = z.tail(p_.num_free());
    sol.eq_multipliers = user_sign * w;
    sol.objective = user_sign * c_.dot(z);
    sol.kkt = kkt_residuals(p_, sol);
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
  }

 private:
  // Per-block PSD projections are independent; free coordinates pass through.
  void project(Eigen::VectorXd& z) {
    pool_.parallel_for(p_.block_dims.size(), [&](std::size_t k) {
      const int d = p_.block_dims[k];
      const int len = d * (d + 1) / 2;
      auto seg = z.segment(offsets_[k], len);
      if (d == 1) {
        seg[0] = std::max(seg[0], 0.0);
        return;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(seg, d));
      const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
      const Eigen::MatrixXd proj = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      svec_into(proj, seg);
    });
  }

  const ConicProgram& p_;
  const SolverConfig& cfg_;
  ThreadPool pool_;
  std::vector<int> offsets_;
  int cone_len_ = 0;
  int n_ = 0;
  Eigen::MatrixXd a_;
  Eigen::VectorXd c_;
};

}  // namespace

Solution solve_consensus(const ConicProgram& program, const SolverConfig& config) {
  config.validate();
  return Consensus(program, config).run();
}

}  // namespace sketchsdp
