#include "sketchsdp/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace sketchsdp {

Monomial::Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("negative exponent in monomial");
    degree_ += e;
  }
}

Monomial Monomial::variable(int num_vars, int index) {
  std::vector<int> e(num_vars, 0);
  e.at(index) = 1;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.num_vars() != num_vars()) throw DimensionError("monomial variable count mismatch");
  std::vector<int> e(exponents_);
  for (int i = 0; i < num_vars(); ++i) e[i] += other.exponents_[i];
  return Monomial(std::move(e));
}

double Monomial::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != num_vars())
    throw DimensionError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(num_vars()));
  double v = 1.0;
  for (int i = 0; i < num_vars(); ++i) {
    for (int k = 0; k < exponents_[i]; ++k) v *= point[i];
  }
  return v;
}

bool operator<(const Monomial& a, const Monomial& b) {
  if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
  // Same degree: larger leading exponent sorts first.
  return std::lexicographical_compare(b.exponents_.begin(), b.exponents_.end(),
                                      a.exponents_.begin(), a.exponents_.end());
}

std::vector<std::string> default_variable_names(int num_vars) {
  std::vector<std::string> names;
  names.reserve(num_vars);
  for (int i = 0; i < num_vars; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::string Monomial::to_string(std::span<const std::string> names) const {
  std::vector<std::string> fallback;
  if (names.empty()) {
    fallback = default_variable_names(num_vars());
    names = fallback;
  }
  std::string out;
  for (int i = 0; i < num_vars(); ++i) {
    if (exponents_[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += names[i];
    if (exponents_[i] > 1) out += "^" + std::to_string(exponents_[i]);
  }
  return out.empty() ? "1" : out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Polynomial::Polynomial(int num_vars) : num_vars_(num_vars) {
  if (num_vars < 1) throw DimensionError("polynomial needs at least one variable");
}

Polynomial::Polynomial(int num_vars, Terms terms) : Polynomial(num_vars) {
  for (const auto& [m, c] : terms) add_term(m, c);
}

Polynomial Polynomial::constant(int num_vars, double value) {
  Polynomial p(num_vars);
  p.add_term(Monomial::one(num_vars), value);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int index) {
  Polynomial p(num_vars);
  p.add_term(Monomial::variable(num_vars, index), 1.0);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double coeff) {
  Polynomial p(m.num_vars());
  p.add_term(m, coeff);
  return p;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.num_vars() != num_vars_) throw DimensionError("monomial variable count mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::check_same_space(const Polynomial& q) const {
  if (q.num_vars_ != num_vars_)
    throw DimensionError("polynomials in " + std::to_string(num_vars_) + " and " +
                         std::to_string(q.num_vars_) + " variables");
}

int Polynomial::degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != num_vars_)
    throw DimensionError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(num_vars_));
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(point);
  return v;
}

Polynomial Polynomial::operator+(const Polynomial& q) const {
  check_same_space(q);
  Polynomial r(*this);
  for (const auto& [m, c] : q.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& q) const { return *this + q * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& q) const {
  check_same_space(q);
  Polynomial r(num_vars_);
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : q.terms_) r.add_term(m1 * m2, c1 * c2);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(num_vars_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.add_term(m, c * s);
  return r;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial r = constant(num_vars_, 1.0);
  for (int k = 0; k < e; ++k) r = r * *this;
  return r;
}

Polynomial Polynomial::derivative(int index) const {
  if (index < 0 || index >= num_vars_) throw DimensionError("derivative index out of range");
  Polynomial r(num_vars_);
  for (const auto& [m, c] : terms_) {
    const int e = m[index];
    if (e == 0) continue;
    std::vector<int> ex = m.exponents();
    ex[index] -= 1;
    r.add_term(Monomial(std::move(ex)), c * e);
  }
  return r;
}

std::vector<Polynomial> Polynomial::gradient() const {
  std::vector<Polynomial> g;
  g.reserve(num_vars_);
  for (int i = 0; i < num_vars_; ++i) g.push_back(derivative(i));
  return g;
}

Polynomial Polynomial::embed(int new_num_vars, std::span<const int> mapping) const {
  if (static_cast<int>(mapping.size()) != num_vars_) throw DimensionError("embedding map size");
  Polynomial r(new_num_vars);
  for (const auto& [m, c] : terms_) {
    std::vector<int> ex(new_num_vars, 0);
    for (int i = 0; i < num_vars_; ++i) ex.at(mapping[i]) += m[i];
    r.add_term(Monomial(std::move(ex)), c);
  }
  return r;
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    const bool neg = std::signbit(c);
    const double mag = std::fabs(c);
    if (first) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    if (m.degree() == 0) {
      out += format_double(mag);
    } else if (mag == 1.0) {
      out += m.to_string(names);
    } else {
      out += format_double(mag) + "*" + m.to_string(names);
    }
  }
  return out;
}

namespace {

class PolyParser {
 public:
  PolyParser(const std::string& text, std::span<const std::string> names)
      : text_(text), names_(names) {}

  Polynomial parse() {
    const int nv = static_cast<int>(names_.size());
    Polynomial result(nv);
    skip_ws();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      result = result + parse_term() * sign;
      skip_ws();
    }
    return result;
  }

 private:
  Polynomial parse_term() {
    const int nv = static_cast<int>(names_.size());
    double coeff = 1.0;
    std::vector<int> ex(nv, 0);
    while (true) {
      skip_ws();
      if (at_end()) fail("unexpected end of input");
      const char ch = peek();
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        coeff *= parse_number();
      } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        const std::size_t start = pos_;
        std::string name = parse_name();
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) fail("unknown variable '" + name + "'", start);
        int e = 1;
        skip_ws();
        if (!at_end() && peek() == '^') {
          ++pos_;
          skip_ws();
          e = parse_int();
        }
        ex[it - names_.begin()] += e;
      } else {
        fail(std::string("unexpected character '") + ch + "'");
      }
      skip_ws();
      if (!at_end() && peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    return Polynomial::monomial(Monomial(std::move(ex)), coeff);
  }

  double parse_number() {
    double v = 0.0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ = res.ptr - text_.data();
    return v;
  }

  int parse_int() {
    int v = 0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc() || v < 0) fail("malformed exponent");
    pos_ = res.ptr - text_.data();
    return v;
  }

  std::string parse_name() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const { fail(what, pos_); }
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw ParseError("polynomial parse error at column " + std::to_string(at + 1) + ": " + what +
                     " in \"" + text_ + "\"");
  }

  const std::string& text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int num_vars) {
  const auto names = default_variable_names(num_vars);
  return parse(text, names);
}

Polynomial Polynomial::parse(const std::string& text, std::span<const std::string> names) {
  if (names.empty()) throw DimensionError("polynomial needs at least one variable");
  return PolyParser(text, names).parse();
}

Polynomial add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial mul(const Polynomial& p, const Polynomial& q) { return p * q; }
Polynomial scale(const Polynomial& p, double s) { return p * s; }
double eval(const Polynomial& p, std::span<const double> point) { return p.eval(point); }
std::vector<Polynomial> gradient(const Polynomial& p) { return p.gradient(); }

int Basis::index_of(const Monomial& m) const {
  auto it = std::lower_bound(elements.begin(), elements.end(), m);
  if (it == elements.end() || !(*it == m)) return -1;
  return static_cast<int>(it - elements.begin());
}

std::vector<double> Basis::eval(std::span<const double> point) const {
  std::vector<double> v;
  v.reserve(elements.size());
  for (const auto& m : elements) v.push_back(m.eval(point));
  return v;
}

Basis monomial_basis(int num_vars, int max_degree) {
  if (num_vars < 1) throw DimensionError("basis needs at least one variable");
  if (max_degree < 0) throw std::invalid_argument("negative basis degree");
  Basis b{num_vars, max_degree, {}};
  std::vector<int> ex(num_vars, 0);
  // Enumerate exponent vectors of each degree with the leading exponent
  // decreasing, which is exactly graded-lex order.
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == num_vars - 1) {
      ex[var] = remaining;
      b.elements.emplace_back(ex);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      ex[var] = e;
      rec(var + 1, remaining - e);
    }
    ex[var] = 0;
  };
  for (int d = 0; d <= max_degree; ++d) rec(0, d);
  return b;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void to_json(nlohmann::json& j, const Polynomial& p) {
  j = nlohmann::json{{"num_vars", p.num_vars()}, {"terms", nlohmann::json::array()}};
  for (const auto& [m, c] : p.terms()) {
    j["terms"].push_back({{"exponents", m.exponents()}, {"coeff", c}});
  }
}

void from_json(const nlohmann::json& j, Polynomial& p) {
  const int nv = j.at("num_vars").get<int>();
  Polynomial r(nv);
  for (const auto& t : j.at("terms")) {
    auto ex = t.at("exponents").get<std::vector<int>>();
    if (static_cast<int>(ex.size()) != nv) throw DimensionError("term exponent length mismatch");
    r = r + Polynomial::monomial(Monomial(std::move(ex)), t.at("coeff").get<double>());
  }
  p = std::move(r);
}

}  // namespace sketchsdp
