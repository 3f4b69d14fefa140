#include "sketchsdp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <Eigen/Cholesky>

namespace sketchsdp {

double MomentVector::at(const Monomial& m) const {
  auto it = moments.find(m);
  if (it == moments.end()) throw RecoveryError("no moment for monomial " + m.to_string());
  return it->second;
}

int MomentVector::max_degree() const {
  int d = 0;
  for (const auto& [m, _] : moments) d = std::max(d, m.degree());
  return d;
}

double MomentVector::integrate(const Polynomial& p) const {
  double s = 0.0;
  for (const auto& [m, c] : p.terms()) s += c * at(m);
  return s;
}

MomentVector extract_moments(const Solution& sol, const SdpProblem& compiled,
                             const std::string& family) {
  if (sol.status != SolveStatus::Optimal)
    throw RecoveryError("moment recovery needs an optimal solution, got " + to_string(sol.status));
  if (sol.eq_multipliers.size() != compiled.num_constraints())
    throw RecoveryError("solution does not belong to this problem");
  MomentVector mv;
  bool first = true;
  for (int j = 0; j < compiled.num_constraints(); ++j) {
    const RowLabel& label = compiled.constraints[j].label;
    if (label.family != family) continue;
    const Monomial m(label.monomial);
    if (first) {
      mv.num_vars = m.num_vars();
      first = false;
    }
    mv.moments[m] = sol.eq_multipliers[j];
  }
  if (first) throw RecoveryError("problem has no rows of family '" + family + "'");
  const Monomial one = Monomial::one(mv.num_vars);
  const auto it = mv.moments.find(one);
  if (it == mv.moments.end()) throw RecoveryError("no constant-monomial row to normalize by");
  const double y0 = it->second;
  if (!(y0 > 0.0)) throw RecoveryError("degenerate multiplier on the constant row (y0 <= 0)");
  for (auto& [m, v] : mv.moments) v /= y0;
  mv.mass = y0;
  return mv;
}

Eigen::MatrixXd moment_matrix(const MomentVector& mv, const Basis& sub_basis) {
  const int n = static_cast<int>(sub_basis.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = mv.at(sub_basis[i] * sub_basis[j]);
  }
  return m;
}

MomentVector atomic_moments(const std::vector<std::vector<double>>& points,
                            const std::vector<double>& weights, int max_degree) {
  if (points.empty() || points.size() != weights.size())
    throw std::invalid_argument("need one weight per atom");
  MomentVector mv;
  mv.num_vars = static_cast<int>(points.front().size());
  const Basis b = monomial_basis(mv.num_vars, max_degree);
  double total = 0.0;
  for (double w : weights) total += w;
  for (const auto& m : b.elements) {
    double s = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) s += weights[k] * m.eval(points[k]);
    mv.moments[m] = s / total;
  }
  mv.mass = total;
  return mv;
}

MomentVector marginal(const MomentVector& mv, const std::vector<int>& keep) {
  MomentVector out;
  out.num_vars = static_cast<int>(keep.size());
  out.mass = mv.mass;
  for (const auto& [m, v] : mv.moments) {
    int kept = 0;
    std::vector<int> e;
    for (int i : keep) {
      e.push_back(m[i]);
      kept += m[i];
    }
    if (kept == m.degree()) out.moments[Monomial(e)] = v;
  }
  return out;
}

std::vector<double> DensityGrid::point(std::size_t index) const {
  const auto i = static_cast<int>(index % nx());
  std::vector<double> p{axes[0].at(i)};
  if (axes.size() > 1) p.push_back(axes[1].at(static_cast<int>(index / nx())));
  return p;
}

std::size_t DensityGrid::argmax() const {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

DensityGrid density_grid(const MomentVector& mv, const Basis& sub_basis,
                         const std::vector<GridAxis>& axes) {
  if (axes.empty() || axes.size() > 2) throw std::invalid_argument("grids are 1-D or 2-D");
  if (static_cast<int>(axes.size()) != sub_basis.num_vars)
    throw DimensionError("grid dimension must match the basis variable count");
  for (const auto& a : axes) {
    if (a.count < 1) throw std::invalid_argument("grid is empty");
  }
  Eigen::MatrixXd m = moment_matrix(mv, sub_basis);
  const double eps = 1e-8 * m.trace() / static_cast<double>(m.rows());
  m.diagonal().array() += eps;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw RecoveryError("moment matrix is indefinite beyond the ridge regularization");

  DensityGrid g;
  g.axes = axes;
  const std::size_t total = static_cast<std::size_t>(g.nx()) * g.ny();
  g.values.resize(total);
  Eigen::VectorXd phi(sub_basis.size());
  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto p = g.point(idx);
    for (std::size_t k = 0; k < sub_basis.size(); ++k) phi[k] = sub_basis[k].eval(p);
    g.values[idx] = 1.0 / phi.dot(llt.solve(phi));
  }
  const double sum = std::accumulate(g.values.begin(), g.values.end(), 0.0);
  for (double& v : g.values) v /= sum;
  return g;
}

std::vector<std::size_t> local_maxima(const DensityGrid& grid, std::size_t count) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  std::vector<std::size_t> found;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * nx + i;
      const double v = grid.values[idx];
      bool peak = true;
      for (int dj = -1; dj <= 1 && peak; ++dj) {
        for (int di = -1; di <= 1 && peak; ++di) {
          if (di == 0 && dj == 0) continue;
          const int a = i + di;
          const int b = j + dj;
          if (a < 0 || a >= nx || b < 0 || b >= ny) continue;
          const std::size_t n = static_cast<std::size_t>(b) * nx + a;
          // Ties go to the lower index so a flat top yields one peak.
          if (grid.values[n] > v || (grid.values[n] == v && n < idx)) peak = false;
        }
      }
      if (peak) found.push_back(idx);
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [&](std::size_t a, std::size_t b) { return grid.values[a] > grid.values[b]; });
  if (found.size() > count) found.resize(count);
  return found;
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  out << (grid.axes.size() > 1 ? "x,y,value\n" : "x,value\n");
  for (std::size_t idx = 0; idx < grid.values.size(); ++idx) {
    for (double c : grid.point(idx)) out << format_double(c) << ',';
    out << format_double(grid.values[idx]) << '\n';
  }
}

void write_grid_pgm(std::ostream& out, const DensityGrid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double vmax = *std::max_element(grid.values.begin(), grid.values.end());
  out << "P5\n" << nx << ' ' << ny << "\n65535\n";
  for (int j = ny - 1; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const double v = grid.values[static_cast<std::size_t>(j) * nx + i];
      const auto q = static_cast<std::uint16_t>(
          std::lround(vmax > 0.0 ? std::clamp(v / vmax, 0.0, 1.0) * 65535.0 : 0.0));
      out.put(static_cast<char>(q >> 8));
      out.put(static_cast<char>(q & 0xff));
    }
  }
}

double continuity_defect(const ControlProblem& cp, const MomentVector& occupation,
                         const Polynomial& v) {
  const auto grad = v.gradient();
  std::vector<int> mapping(cp.num_states);
  std::iota(mapping.begin(), mapping.end(), 0);
  Polynomial flow(cp.num_vars());
  for (int i = 0; i < cp.num_states; ++i)
    flow = flow + grad[i].embed(cp.num_vars(), mapping) * cp.dynamics[i];
  return occupation.mass * occupation.integrate(flow) - (v.eval(cp.xT) - v.eval(cp.x0));
}

}  // namespace sketchsdp
