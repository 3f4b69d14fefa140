#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sketchsdp/polynomial.hpp"
#include "sketchsdp/sdp_problem.hpp"

namespace sketchsdp {

class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gram index pair (i, j), i <= j, with the number of times Q(i,j) appears in
/// phi' Q phi (1 on the diagonal, 2 off it).
struct GramPair {
  int i = 0;
  int j = 0;
  int multiplicity = 1;
};

/// Coefficient-matching structure of phi(x)' Q phi(x): one row per monomial
/// reachable as a product of two basis elements.
struct GramMap {
  Basis basis;
  std::vector<Monomial> monomials;
  std::vector<std::vector<GramPair>> rows;

  int row_of(const Monomial& m) const;
};

GramMap gram_map(const Basis& basis);

/// Polynomial coefficients that are affine in a set of free decision
/// variables: coeff(alpha) = constant + sum_f linear[f] * x_f.
struct AffineCoeff {
  double constant = 0.0;
  std::map<int, double> linear;
};

class AffinePolynomial {
 public:
  explicit AffinePolynomial(int num_vars) : num_vars_(num_vars) {}
  explicit AffinePolynomial(const Polynomial& constant_part);

  int num_vars() const { return num_vars_; }
  const std::map<Monomial, AffineCoeff>& terms() const { return terms_; }

  /// Add `p` (times free variable `free_index`, or as a constant when
  /// `free_index` is negative).
  void add(const Polynomial& p, int free_index = -1, double scale = 1.0);

  Polynomial evaluate(const std::vector<double>& free_values) const;

 private:
  int num_vars_;
  std::map<Monomial, AffineCoeff> terms_;
};

/// Localizing certificate on the ball ||x|| <= radius: expr = s0 + s1 * g with
/// g = radius^2 - ||x||^2 and s1 Gram-parameterized over multiplier_basis.
struct BallCertificate {
  double radius = 1.0;
  Basis multiplier_basis;
};

struct SosConstraintInfo {
  int gram_block = -1;
  int multiplier_block = -1;
  std::string family;
  std::vector<int> rows;
  std::vector<Monomial> row_monomials;
};

/// Append "expr is SOS" (or SOS on a ball) to `problem`: adds the Gram
/// block(s) and one equality row per matched monomial, zero rows included.
SosConstraintInfo add_sos_constraint(SdpProblem& problem, const AffinePolynomial& expr,
                                     const Basis& basis, const std::string& family,
                                     const std::optional<BallCertificate>& ball = std::nullopt);

/// Feasibility SDP: Q >= 0 with phi' Q phi = p.
SdpProblem compile_sos(const Polynomial& p, const Basis& basis);

/// max lambda  s.t.  p - lambda is SOS over `basis`. Free variable 0 is lambda.
SdpProblem compile_pop(const Polynomial& p, const Basis& basis);

/// Feasibility SDP for p = s0 + s1 * (radius^2 - ||x||^2) with s0, s1 SOS.
SdpProblem compile_sos_on_ball(const Polynomial& p, const Basis& basis, double radius,
                               const Basis& multiplier_basis);

/// Lower bound of p over the ball; free variable 0 is lambda.
SdpProblem compile_pop_on_ball(const Polynomial& p, const Basis& basis, double radius,
                               const Basis& multiplier_basis);

/// Smallest Gram degree able to represent p, i.e. ceil(deg p / 2).
int default_gram_degree(const Polynomial& p);

/// The default test instance: prod_i ((x - a_i)^2 + (y - b_i)^2) over the four
/// points (+-1, +-1). Degree 8, two variables, global minimum 0.
Polynomial four_double_zero_polynomial();

inline constexpr const char* kSosFamily = "sos";

}  // namespace sketchsdp
