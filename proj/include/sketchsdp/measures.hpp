#pragma once

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sketchsdp/control.hpp"
#include "sketchsdp/polynomial.hpp"
#include "sketchsdp/sdp_problem.hpp"
#include "sketchsdp/solver.hpp"

namespace sketchsdp {

class RecoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated moment sequence y_alpha = int x^alpha dmu, normalized so that
/// y_0 = 1. `mass` keeps the raw y_0 before normalization.
struct MomentVector {
  int num_vars = 1;
  std::map<Monomial, double> moments;
  double mass = 1.0;

  double at(const Monomial& m) const;
  bool has(const Monomial& m) const { return moments.count(m) > 0; }
  int max_degree() const;
  /// <p, y> = sum_alpha p_alpha y_alpha. Throws if a moment is missing.
  double integrate(const Polynomial& p) const;
};

/// Read the equality multipliers of the coefficient-matching rows of
/// `family` as moments. Requires an Optimal solution and a positive multiplier
/// on the constant row.
MomentVector extract_moments(const Solution& sol, const SdpProblem& compiled,
                             const std::string& family = "sos");

/// M(beta, gamma) = y_{beta + gamma} over `sub_basis`.
Eigen::MatrixXd moment_matrix(const MomentVector& mv, const Basis& sub_basis);

/// Moments of a finite atomic measure sum_k w_k delta_{p_k}, for every
/// monomial of degree <= max_degree.
MomentVector atomic_moments(const std::vector<std::vector<double>>& points,
                            const std::vector<double>& weights, int max_degree);

/// Moments of the variables listed in `keep` (in that order) only.
MomentVector marginal(const MomentVector& mv, const std::vector<int>& keep);

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 1;

  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
  double spacing() const { return count == 1 ? 0.0 : (hi - lo) / (count - 1); }
};

/// Scalar field on a 1-D or 2-D tensor grid. values[j * nx + i] belongs to
/// (axes[0].at(i), axes[1].at(j)).
struct DensityGrid {
  std::vector<GridAxis> axes;
  std::vector<double> values;

  int nx() const { return axes[0].count; }
  int ny() const { return axes.size() > 1 ? axes[1].count : 1; }
  std::vector<double> point(std::size_t index) const;
  std::size_t argmax() const;
};

/// Inverse Christoffel score 1 / (phi' (M + eps I)^{-1} phi) with
/// eps = 1e-8 tr(M) / dim, normalized to sum 1.
DensityGrid density_grid(const MomentVector& mv, const Basis& sub_basis,
                         const std::vector<GridAxis>& axes);

/// Indices of up to `count` local maxima (8-neighbourhood in 2-D), largest
/// first.
std::vector<std::size_t> local_maxima(const DensityGrid& grid, std::size_t count);

void write_grid_csv(std::ostream& out, const DensityGrid& grid);
/// Binary 16-bit PGM scaled so the maximum maps to 65535; the first image row
/// is the largest y.
void write_grid_pgm(std::ostream& out, const DensityGrid& grid);

/// <grad v . f, mu> - (v(xT) - v(x0)) for the unnormalized moments of an
/// occupation measure over (x, u).
double continuity_defect(const ControlProblem& cp, const MomentVector& occupation,
                         const Polynomial& v);

}  // namespace sketchsdp
