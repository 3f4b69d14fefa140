#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sketchsdp {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent vector x1^e1 * ... * xn^en.
///
/// Ordering is graded lexicographic: lower total degree first, and within a
/// degree the monomial with the larger leading exponent comes first, so the
/// degree-1 monomials of two variables list as x1, x2.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);
  static Monomial one(int num_vars) { return Monomial(std::vector<int>(num_vars, 0)); }
  static Monomial variable(int num_vars, int index);

  int num_vars() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const { return exponents_; }

  Monomial operator*(const Monomial& other) const;
  double eval(std::span<const double> point) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exponents_ == b.exponents_;
  }
  friend bool operator<(const Monomial& a, const Monomial& b);

  std::string to_string(std::span<const std::string> names = {}) const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Default variable names x1..xn.
std::vector<std::string> default_variable_names(int num_vars);

/// Sparse real polynomial in canonical form (no stored exact zeros).
class Polynomial {
 public:
  using Terms = std::map<Monomial, double>;

  explicit Polynomial(int num_vars = 1);
  Polynomial(int num_vars, Terms terms);

  static Polynomial constant(int num_vars, double value);
  static Polynomial variable(int num_vars, int index);
  static Polynomial monomial(const Monomial& m, double coeff = 1.0);

  int num_vars() const { return num_vars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; the zero polynomial reports 0.
  int degree() const;
  double coeff(const Monomial& m) const;

  double eval(std::span<const double> point) const;

  Polynomial operator+(const Polynomial& q) const;
  Polynomial operator-(const Polynomial& q) const;
  Polynomial operator*(const Polynomial& q) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial pow(int e) const;

  /// Partial derivative in variable `index`.
  Polynomial derivative(int index) const;
  std::vector<Polynomial> gradient() const;

  /// Embed into a larger variable space; variable i maps to `mapping[i]`.
  Polynomial embed(int new_num_vars, std::span<const int> mapping) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  /// Human-readable form, e.g. "2*x1^2*x2 - 3.5". Coefficients are printed in
  /// shortest round-trip form so `parse(to_string())` is lossless.
  std::string to_string(std::span<const std::string> names = {}) const;
  static Polynomial parse(const std::string& text, int num_vars);
  static Polynomial parse(const std::string& text, std::span<const std::string> names);

 private:
  void add_term(const Monomial& m, double c);
  void check_same_space(const Polynomial& q) const;

  int num_vars_;
  Terms terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
Polynomial scale(const Polynomial& p, double s);
double eval(const Polynomial& p, std::span<const double> point);
std::vector<Polynomial> gradient(const Polynomial& p);

/// All monomials of total degree <= max_degree, graded-lex ordered.
struct Basis {
  int num_vars = 1;
  int max_degree = 0;
  std::vector<Monomial> elements;

  std::size_t size() const { return elements.size(); }
  const Monomial& operator[](std::size_t i) const { return elements[i]; }
  /// Index of `m` in the basis, or -1.
  int index_of(const Monomial& m) const;
  /// Evaluate every basis element at `point`.
  std::vector<double> eval(std::span<const double> point) const;
};

Basis monomial_basis(int num_vars, int max_degree);

/// Binomial coefficient C(n, k) as an integer.
std::size_t binomial(int n, int k);

void to_json(nlohmann::json& j, const Polynomial& p);
void from_json(const nlohmann::json& j, Polynomial& p);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace sketchsdp
