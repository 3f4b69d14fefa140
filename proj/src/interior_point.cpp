#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "sketchsdp/solver.hpp"

namespace sketchsdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Blocks = std::vector<Eigen::MatrixXd>;

double frob2(const Blocks& b) {
  double s = 0.0;
  for (const auto& m : b) s += m.squaredNorm();
  return s;
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with L^{-1}(M + alpha D)L^{-T} >= 0 given M = L L'.
double max_step(const Eigen::MatrixXd& chol_lower, const Eigen::MatrixXd& d) {
  Eigen::MatrixXd t = chol_lower.triangularView<Eigen::Lower>().solve(d);
  t = chol_lower.triangularView<Eigen::Lower>().solve(t.transpose().eval());
  const double lmin = min_eigenvalue(sym(t));
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

// Saddle-point system [M F; F' 0] with diagonal regularization that escalates
// when a factorization fails.
class NewtonSystem {
 public:
  bool factor(const Eigen::MatrixXd& m, const Eigen::MatrixXd& f) {
    m_ = &m;
    f_ = &f;
    const double scale = 1.0 + (m.rows() > 0 ? m.diagonal().cwiseAbs().maxCoeff() : 0.0);
    for (double rel = 0.0; rel <= 1e-2; rel = rel == 0.0 ? 1e-12 : rel * 100.0) {
      rel_ = rel;
      delta_ = rel * scale;
      if (factor_elimination()) {
        use_lu_ = false;
        return true;
      }
      if (factor_lu()) {
        use_lu_ = true;
        return true;
      }
    }
    return false;
  }

  // Iterative refinement against the unregularized system, continued while
  // the residual keeps shrinking.
  void solve(const Eigen::VectorXd& h, const Eigen::VectorXd& r, Eigen::VectorXd& u,
             Eigen::VectorXd& v) const {
    raw_solve(h, r, u, v);
    auto residual = [&](Eigen::VectorXd& rh, Eigen::VectorXd& rr) {
      rh = h - *m_ * u;
      rr = r;
      if (f_->cols() > 0) {
        rh.noalias() -= *f_ * v;
        rr.noalias() -= f_->transpose() * u;
      }
      return std::sqrt(rh.squaredNorm() + rr.squaredNorm());
    };
    Eigen::VectorXd rh, rr, du, dv;
    double res = residual(rh, rr);
    for (int it = 0; it < 20 && res > 0.0; ++it) {
      raw_solve(rh, rr, du, dv);
      const Eigen::VectorXd u_old = u;
      const Eigen::VectorXd v_old = v;
      u += du;
      v += dv;
      const double next = residual(rh, rr);
      if (!(next < res)) {
        u = u_old;
        v = v_old;
        break;
      }
      const bool slow = next > 0.5 * res;
      res = next;
      if (slow) break;
    }
  }

 private:
  bool factor_elimination() {
    const auto& m = *m_;
    const auto& f = *f_;
    Eigen::MatrixXd mreg = m;
    mreg.diagonal().array() += delta_;
    llt_m_.compute(mreg);
    if (llt_m_.info() != Eigen::Success || !llt_m_.isPositive()) return false;
    const Eigen::VectorXd dm = llt_m_.vectorD();
    if (!(dm.minCoeff() > 0.0) || !std::isfinite(dm.maxCoeff())) return false;
    if (f.cols() == 0) return true;
    z_ = llt_m_.solve(f);
    Eigen::MatrixXd sf = f.transpose() * z_;
    const double sscale = 1.0 + sf.diagonal().cwiseAbs().maxCoeff();
    sf.diagonal().array() += rel_ * sscale;
    llt_f_.compute(sf);
    if (llt_f_.info() != Eigen::Success) return false;
    // Reject badly conditioned eliminations; LU on the full system is safer.
    const Eigen::VectorXd d = llt_f_.matrixLLT().diagonal();
    return d.minCoeff() > 1e-7 * d.maxCoeff();
  }

  bool factor_lu() {
    const auto& m = *m_;
    const auto& f = *f_;
    const int nm = static_cast<int>(m.rows());
    const int nf = static_cast<int>(f.cols());
    Eigen::MatrixXd k(nm + nf, nm + nf);
    k.topLeftCorner(nm, nm) = m;
    k.topLeftCorner(nm, nm).diagonal().array() += delta_;
    if (nf > 0) {
      k.topRightCorner(nm, nf) = f;
      k.bottomLeftCorner(nf, nm) = f.transpose();
      k.bottomRightCorner(nf, nf) = -delta_ * Eigen::MatrixXd::Identity(nf, nf);
    }
    lu_.compute(k);
    const double rcond = lu_.rcond();
    return std::isfinite(rcond) && rcond > 1e-15;
  }

  void raw_solve(const Eigen::VectorXd& h, const Eigen::VectorXd& r, Eigen::VectorXd& u,
                 Eigen::VectorXd& v) const {
    const int nm = static_cast<int>(m_->rows());
    const int nf = static_cast<int>(f_->cols());
    if (use_lu_) {
      Eigen::VectorXd rhs(nm + nf);
      rhs << h, r;
      const Eigen::VectorXd sol = lu_.solve(rhs);
      u = sol.head(nm);
      v = sol.tail(nf);
      return;
    }
    const Eigen::VectorXd u0 = llt_m_.solve(h);
    if (nf == 0) {
      u = u0;
      v.resize(0);
      return;
    }
    v = llt_f_.solve(f_->transpose() * u0 - r);
    u = u0 - z_ * v;
  }

  const Eigen::MatrixXd* m_ = nullptr;
  const Eigen::MatrixXd* f_ = nullptr;
  double delta_ = 0.0;
  double rel_ = 0.0;
  bool use_lu_ = false;
  Eigen::LDLT<Eigen::MatrixXd> llt_m_;
  Eigen::LLT<Eigen::MatrixXd> llt_f_;
  Eigen::MatrixXd z_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct Direction {
  Blocks dx;
  Blocks ds;
  Eigen::VectorXd dxf;
  Eigen::VectorXd dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

struct Iterate {
  Blocks x, s;
  Eigen::VectorXd xf, y;
  double tau = 0.0;
  double kappa = 0.0;
};

class InteriorPoint {
 public:
  InteriorPoint(const ConicProgram& p, const SolverConfig& cfg) : p_(p), cfg_(cfg) {
    const double sign = p.sense == Sense::Minimize ? 1.0 : -1.0;
    for (const auto& c : p.cost) c_.push_back(sign * c);
    cf_ = sign * p.free_cost;
    nu_ = p.cone_order();
    for (int d : p.block_dims) {
      x_.push_back(Eigen::MatrixXd::Identity(d, d));
      s_.push_back(Eigen::MatrixXd::Identity(d, d));
    }
    xf_ = Eigen::VectorXd::Zero(p.num_free());
    y_ = Eigen::VectorXd::Zero(p.num_rows());
    bnorm_ = p.rhs.norm();
    cnorm_ = std::sqrt(frob2(c_) + cf_.squaredNorm());
  }

  Solution run() {
    const auto start = std::chrono::steady_clock::now();
    Solution sol;
    int stalls = 0;
    int since_best = 0;
    double best = kInf;
    Iterate best_point;
    double ref_merit = kInf;  // last point of substantial progress
    double ref_tau = 0.0;
    for (int iter = 0;; ++iter) {
      compute_residuals();
      const double mu = (inner(x_, s_) + tau_ * kappa_) / (nu_ + 1);
      const double pres = rp_.norm() / tau_ / (1.0 + bnorm_);
      const double dres = std::sqrt(frob2(rd_) + rdf_.squaredNorm()) / tau_ / (1.0 + cnorm_);
      const double pobj = cx_ / tau_;
      const double dobj = by_ / tau_;
      const double gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
      if (cfg_.record_trace) {
        sol.trace.push_back({iter, pres, dres, gap, mu, tau_, kappa_, last_step_, last_sigma_, 0.0});
      }
      sol.iterations = iter;
      if (!std::isfinite(mu) || !std::isfinite(pres) || !std::isfinite(dres)) {
        sol.status = SolveStatus::NumericalFailure;
        break;
      }
      if (pres <= cfg_.tolerance && dres <= cfg_.tolerance && gap <= cfg_.tolerance) {
        sol.status = SolveStatus::Optimal;
        break;
      }
      if (kappa_ > tau_ && detect_infeasibility(sol)) break;

      // Remember the iterate with the smallest residuals; on degenerate
      // problems the Newton systems lose accuracy long before mu reaches
      // zero and later iterates can be worse.
      const double merit = std::max({pres, dres, gap});
      if (merit < best) {
        best = merit;
        best_point = snapshot();
      }
      if (merit < 0.5 * ref_merit) {
        ref_merit = merit;
        ref_tau = tau_;
        since_best = 0;
      } else {
        ++since_best;
      }
      // A collapsing tau means the embedding is heading for a certificate;
      // only a run whose tau holds steady counts as stalled.
      const bool stalled = since_best >= 10 && tau_ > 0.1 * ref_tau;
      if (iter >= cfg_.max_iterations || stalled) {
        sol.status = SolveStatus::MaxIterations;
        break;
      }
      if (!step(mu)) {
        sol.status = SolveStatus::NumericalFailure;
        break;
      }
      stalls = last_step_ < 1e-8 ? stalls + 1 : 0;
      if (stalls >= 5) {
        sol.status = SolveStatus::MaxIterations;
        break;
      }
    }
    const bool ray = sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded;
    if (sol.status != SolveStatus::Optimal && !ray && best_point.tau > 0.0) {
      restore(best_point);
      compute_residuals();
    }
    finish(sol);
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
  }

 private:
  Iterate snapshot() const { return {x_, s_, xf_, y_, tau_, kappa_}; }

  void restore(const Iterate& it) {
    x_ = it.x;
    s_ = it.s;
    xf_ = it.xf;
    y_ = it.y;
    tau_ = it.tau;
    kappa_ = it.kappa;
  }

  void compute_residuals() {
    rp_ = p_.apply(x_, xf_) - tau_ * p_.rhs;
    Blocks aty = p_.adjoint_blocks(y_);
    rd_.resize(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) rd_[k] = aty[k] + s_[k] - tau_ * c_[k];
    rdf_ = p_.num_free() > 0 ? Eigen::VectorXd(p_.free_coeff.transpose() * y_ - tau_ * cf_)
                             : Eigen::VectorXd(0);
    cx_ = inner(c_, x_) + (p_.num_free() > 0 ? cf_.dot(xf_) : 0.0);
    by_ = p_.rhs.dot(y_);
    rg_ = cx_ - by_ + kappa_;
  }

  bool detect_infeasibility(Solution& sol) {
    const double tol = cfg_.infeasibility_tolerance;
    if (by_ > 0.0) {
      Blocks aty = p_.adjoint_blocks(y_);
      double r2 = 0.0;
      for (std::size_t k = 0; k < aty.size(); ++k) r2 += (aty[k] + s_[k]).squaredNorm();
      if (p_.num_free() > 0) r2 += (p_.free_coeff.transpose() * y_).squaredNorm();
      if (std::sqrt(r2) / by_ <= tol) {
        sol.status = SolveStatus::Infeasible;
        return true;
      }
    }
    if (cx_ < 0.0) {
      const double r = p_.apply(x_, xf_).norm();
      if (r / -cx_ <= tol) {
        sol.status = SolveStatus::Unbounded;
        return true;
      }
    }
    return false;
  }

  bool factor_blocks() {
    const std::size_t nb = x_.size();
    lx_.resize(nb);
    ls_.resize(nb);
    sinv_.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<Eigen::MatrixXd> lx(x_[k]);
      Eigen::LLT<Eigen::MatrixXd> ls(s_[k]);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
      lx_[k] = lx.matrixL();
      ls_[k] = ls.matrixL();
      const int d = static_cast<int>(x_[k].rows());
      // r = L_s^{-T}, so S^{-1} = r r'.
      Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
      ls_[k].transpose().triangularView<Eigen::Upper>().solveInPlace(r);
      sinv_[k] = r * r.transpose();
      r_.resize(nb);
      r_[k] = std::move(r);
    }
    return true;
  }

  Eigen::MatrixXd schur() const {
    const int m = p_.num_rows();
    Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < x_.size(); ++k) {
      const auto& rows = p_.rows[k];
      if (rows.empty()) continue;
      const int d = static_cast<int>(x_[k].rows());
      const Eigen::MatrixXd lt = lx_[k].transpose();
      Eigen::MatrixXd g(d * d, rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        Eigen::MatrixXd gi = lt * rows[i].coeff * r_[k];
        g.col(i) = Eigen::Map<const Eigen::VectorXd>(gi.data(), d * d);
      }
      Eigen::MatrixXd local(rows.size(), rows.size());
      local.setZero();
      local.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          mm(rows[i].row, rows[j].row) += local(i, j);
          if (i != j) mm(rows[j].row, rows[i].row) += local(i, j);
        }
      }
    }
    return mm;
  }

  // W(V) = sym(X V S^{-1})
  Eigen::MatrixXd scale_op(std::size_t k, const Eigen::MatrixXd& v) const {
    return sym(x_[k] * v * sinv_[k]);
  }

  Eigen::VectorXd apply_blocks(const Blocks& b) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p_.num_rows());
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (const auto& br : p_.rows[k]) out[br.row] += br.coeff.cwiseProduct(b[k]).sum();
    }
    return out;
  }

  Direction direction(double sigma, double mu, const Direction* predictor) const {
    const double eta = 1.0 - sigma;
    const std::size_t nb = x_.size();
    Blocks r2(nb), rc(nb), v(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      r2[k] = -eta * rd_[k];
      rc[k] = sigma * mu * sinv_[k] - x_[k];
      if (predictor) rc[k] -= sym(predictor->dx[k] * predictor->ds[k] * sinv_[k]);
      v[k] = rc[k] - scale_op(k, r2[k]);
    }
    const Eigen::VectorXd r1 = -eta * rp_;
    const Eigen::VectorXd r2f = -eta * rdf_;
    const double r3 = -eta * rg_;
    double rtau = sigma * mu - tau_ * kappa_;
    if (predictor) rtau -= predictor->dtau * predictor->dkappa;

    const Eigen::VectorXd h1 = r1 - apply_blocks(v);
    const double h3 = r3 - inner(c_, v) - rtau / tau_;

    Eigen::VectorXd p1y, p1f;
    newton_.solve(h1, r2f, p1y, p1f);

    const Eigen::VectorXd gb = g_ - p_.rhs;
    const double cfp1 = p_.num_free() > 0 ? cf_.dot(p1f) : 0.0;
    const double cfp2 = p_.num_free() > 0 ? cf_.dot(p2f_) : 0.0;
    const double denom = gb.dot(p2y_) + cfp2 - cwc_ - kappa_ / tau_;
    Direction d;
    d.dtau = (h3 - gb.dot(p1y) - cfp1) / denom;
    d.dy = p1y + d.dtau * p2y_;
    d.dxf = p1f + d.dtau * p2f_;
    const Blocks atdy = p_.adjoint_blocks(d.dy);
    d.ds.resize(nb);
    d.dx.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      d.ds[k] = r2[k] - atdy[k] + d.dtau * c_[k];
      d.dx[k] = rc[k] - scale_op(k, d.ds[k]);
    }
    d.dkappa = (rtau - kappa_ * d.dtau) / tau_;
    return d;
  }

  double step_length(const Direction& d) const {
    double a = kInf;
    for (std::size_t k = 0; k < x_.size(); ++k) {
      a = std::min(a, max_step(lx_[k], d.dx[k]));
      a = std::min(a, max_step(ls_[k], d.ds[k]));
    }
    if (d.dtau < 0.0) a = std::min(a, -tau_ / d.dtau);
    if (d.dkappa < 0.0) a = std::min(a, -kappa_ / d.dkappa);
    return a;
  }

  bool step(double mu) {
    if (!factor_blocks()) return false;
    const Eigen::MatrixXd m = schur();
    if (!newton_.factor(m, p_.free_coeff)) return false;

    const std::size_t nb = x_.size();
    Blocks wc(nb);
    for (std::size_t k = 0; k < nb; ++k) wc[k] = scale_op(k, c_[k]);
    g_ = apply_blocks(wc);
    cwc_ = inner(c_, wc);
    const Eigen::VectorXd bg = p_.rhs + g_;
    newton_.solve(bg, cf_, p2y_, p2f_);

    const Direction pred = direction(0.0, mu, nullptr);
    const double a_aff = std::min(1.0, step_length(pred));
    double gap_aff = (tau_ + a_aff * pred.dtau) * (kappa_ + a_aff * pred.dkappa);
    for (std::size_t k = 0; k < nb; ++k) {
      gap_aff += (x_[k] + a_aff * pred.dx[k]).cwiseProduct(s_[k] + a_aff * pred.ds[k]).sum();
    }
    const double mu_aff = gap_aff / (nu_ + 1);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    const Direction d = direction(sigma, mu, &pred);
    const double alpha = std::min(1.0, cfg_.step_fraction * step_length(d));
    if (!std::isfinite(alpha) || !std::isfinite(d.dtau)) return false;

    for (std::size_t k = 0; k < nb; ++k) {
      x_[k] = sym(x_[k] + alpha * d.dx[k]);
      s_[k] = sym(s_[k] + alpha * d.ds[k]);
    }
    xf_ += alpha * d.dxf;
    y_ += alpha * d.dy;
    tau_ += alpha * d.dtau;
    kappa_ += alpha * d.dkappa;
    last_step_ = alpha;
    last_sigma_ = sigma;
    return tau_ > 0.0 && kappa_ > 0.0;
  }

  void finish(Solution& sol) const {
    const double user_sign = p_.sense == Sense::Minimize ? 1.0 : -1.0;
    const bool ray = sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded;
    const double scale = ray ? 1.0 : 1.0 / tau_;
    sol.psd_blocks.clear();
    sol.dual_slacks.clear();
    for (std::size_t k = 0; k < x_.size(); ++k) {
      sol.psd_blocks.push_back(x_[k] * scale);
      sol.dual_slacks.push_back(s_[k] * scale);
    }
    sol.free_vars = xf_ * scale;
    sol.eq_multipliers = user_sign * y_ * scale;
    switch (sol.status) {
      case SolveStatus::Infeasible: {
        Certificate cert;
        cert.multipliers = user_sign * y_ / by_;
        sol.certificate = cert;
        sol.objective = user_sign * kInf;
        break;
      }
      case SolveStatus::Unbounded: {
        Certificate cert;
        for (const auto& x : x_) cert.blocks.push_back(x / -cx_);
        cert.free = xf_ / -cx_;
        sol.certificate = cert;
        sol.objective = -user_sign * kInf;
        break;
      }
      default:
        sol.objective = user_sign * cx_ / tau_;
        break;
    }
    if (!ray) sol.kkt = kkt_residuals(p_, sol);
  }

  const ConicProgram& p_;
  const SolverConfig& cfg_;
  Blocks c_;
  Eigen::VectorXd cf_;
  int nu_ = 0;
  double bnorm_ = 0.0;
  double cnorm_ = 0.0;

  Blocks x_, s_;
  Eigen::VectorXd xf_, y_;
  double tau_ = 1.0;
  double kappa_ = 1.0;

  Eigen::VectorXd rp_, rdf_;
  Blocks rd_;
  double cx_ = 0.0, by_ = 0.0, rg_ = 0.0;

  Blocks lx_, ls_, r_, sinv_;
  NewtonSystem newton_;
  Eigen::VectorXd g_, p2y_, p2f_;
  double cwc_ = 0.0;
  double last_step_ = 0.0;
  double last_sigma_ = 0.0;
};

// y with A'y = 0 and b'y = 1, i.e. equality rows that contradict each other
// before any cone enters. Such systems leave the Newton matrix singular, so
// the embedding cannot produce the usual certificate.
std::optional<Eigen::VectorXd> inconsistent_rows(const ConicProgram& p, double tol) {
  const int m = p.num_rows();
  if (m == 0) return std::nullopt;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < p.num_blocks(); ++k) {
    const auto& rows = p.rows[k];
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = a; b < rows.size(); ++b) {
        const double v = rows[a].coeff.cwiseProduct(rows[b].coeff).sum();
        g(rows[a].row, rows[b].row) += v;
        if (a != b) g(rows[b].row, rows[a].row) += v;
      }
    }
  }
  if (p.num_free() > 0) g += p.free_coeff * p.free_coeff.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const double cutoff = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m && es.eigenvalues()[i] <= cutoff; ++i) {
    const auto v = es.eigenvectors().col(i);
    y += v.dot(p.rhs) * v;
  }
  const double by = p.rhs.dot(y);
  if (!(by > 0.0)) return std::nullopt;
  y /= by;
  double r2 = 0.0;
  for (const auto& a : p.adjoint_blocks(y)) r2 += a.squaredNorm();
  if (p.num_free() > 0) r2 += (p.free_coeff.transpose() * y).squaredNorm();
  if (std::sqrt(r2) > tol) return std::nullopt;
  return y;
}

// Free-variable direction d with A_f d = 0 along which the (minimization
// form) cost decreases, scaled so that c_f'd = -1.
std::optional<Eigen::VectorXd> free_cost_ray(const ConicProgram& p, double tol) {
  const int nf = p.num_free();
  if (nf == 0) return std::nullopt;
  const double sign = p.sense == Sense::Minimize ? 1.0 : -1.0;
  const Eigen::VectorXd cf = sign * p.free_cost;
  const Eigen::MatrixXd g = p.free_coeff.transpose() * p.free_coeff;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const double cutoff = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(nf);
  for (int i = 0; i < nf && es.eigenvalues()[i] <= cutoff; ++i) {
    const auto v = es.eigenvectors().col(i);
    d -= v.dot(cf) * v;
  }
  const double cd = cf.dot(d);
  if (!(cd < 0.0)) return std::nullopt;
  d /= -cd;
  if ((p.free_coeff * d).norm() > tol) return std::nullopt;
  return d;
}

// Columns of a rank-deficient free block that can be dropped without
// changing the optimal value: only when the cost vanishes on the null space,
// so that every free solution has an equivalent one on the kept columns.
std::optional<std::vector<int>> independent_free_columns(const ConicProgram& p) {
  const int nf = p.num_free();
  if (nf == 0) return std::nullopt;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.free_coeff);
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  if (rank == nf) return std::nullopt;
  std::vector<int> keep;
  for (int i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()[i]);
  std::sort(keep.begin(), keep.end());
  // c_f must lie in the row space of A_f.
  Eigen::MatrixXd basis(p.free_coeff.rows(), rank);
  for (int i = 0; i < rank; ++i) basis.col(i) = p.free_coeff.col(keep[i]);
  const Eigen::VectorXd w = basis.transpose().colPivHouseholderQr().solve(
      Eigen::VectorXd(p.free_cost(keep)));
  const Eigen::VectorXd mismatch = p.free_coeff.transpose() * w - p.free_cost;
  if (mismatch.norm() > 1e-10 * (1.0 + p.free_cost.norm())) return std::nullopt;
  return keep;
}

Solution solve_reduced(const ConicProgram& program, const SolverConfig& config) {
  const auto keep = independent_free_columns(program);
  if (!keep) return InteriorPoint(program, config).run();
  ConicProgram reduced = program;
  reduced.free_coeff = program.free_coeff(Eigen::placeholders::all, *keep);
  reduced.free_cost = program.free_cost(*keep);
  Solution sol = InteriorPoint(reduced, config).run();
  auto expand = [&](Eigen::VectorXd& v) {
    if (v.size() != static_cast<Eigen::Index>(keep->size())) return;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(program.num_free());
    for (std::size_t i = 0; i < keep->size(); ++i) full[(*keep)[i]] = v[static_cast<Eigen::Index>(i)];
    v = full;
  };
  expand(sol.free_vars);
  if (sol.certificate) expand(sol.certificate->free);
  return sol;
}

}  // namespace

Solution solve_interior_point(const ConicProgram& program, const SolverConfig& config) {
  config.validate();
  Solution sol = solve_reduced(program, config);
  if (sol.status == SolveStatus::NumericalFailure || sol.status == SolveStatus::MaxIterations) {
    if (auto y = inconsistent_rows(program, config.infeasibility_tolerance)) {
      const double user_sign = program.sense == Sense::Minimize ? 1.0 : -1.0;
      sol.status = SolveStatus::Infeasible;
      sol.objective = user_sign * kInf;
      Certificate cert;
      cert.multipliers = user_sign * *y;
      sol.certificate = cert;
    } else if (auto d = free_cost_ray(program, config.infeasibility_tolerance)) {
      const double user_sign = program.sense == Sense::Minimize ? 1.0 : -1.0;
      sol.status = SolveStatus::Unbounded;
      sol.objective = -user_sign * kInf;
      Certificate cert;
      for (int dim : program.block_dims) cert.blocks.push_back(Eigen::MatrixXd::Zero(dim, dim));
      cert.free = *d;
      sol.certificate = cert;
    }
  }
  return sol;
}

}  // namespace sketchsdp
