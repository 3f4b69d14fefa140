#include "sketchsdp/sos.hpp"

#include <algorithm>
#include <set>

namespace sketchsdp {

int GramMap::row_of(const Monomial& m) const {
  auto it = std::lower_bound(monomials.begin(), monomials.end(), m);
  if (it == monomials.end() || !(*it == m)) return -1;
  return static_cast<int>(it - monomials.begin());
}

GramMap gram_map(const Basis& basis) {
  std::map<Monomial, std::vector<GramPair>> rows;
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      rows[basis[i] * basis[j]].push_back({i, j, i == j ? 1 : 2});
    }
  }
  GramMap g{basis, {}, {}};
  for (auto& [m, pairs] : rows) {
    g.monomials.push_back(m);
    g.rows.push_back(std::move(pairs));
  }
  return g;
}

AffinePolynomial::AffinePolynomial(const Polynomial& constant_part)
    : num_vars_(constant_part.num_vars()) {
  add(constant_part);
}

void AffinePolynomial::add(const Polynomial& p, int free_index, double scale) {
  if (p.num_vars() != num_vars_) throw DimensionError("affine polynomial variable count mismatch");
  for (const auto& [m, c] : p.terms()) {
    auto& coeff = terms_[m];
    if (free_index < 0) {
      coeff.constant += scale * c;
    } else {
      coeff.linear[free_index] += scale * c;
    }
  }
}

Polynomial AffinePolynomial::evaluate(const std::vector<double>& free_values) const {
  Polynomial::Terms t;
  for (const auto& [m, c] : terms_) {
    double v = c.constant;
    for (const auto& [f, a] : c.linear) v += a * free_values.at(f);
    t[m] = v;
  }
  return Polynomial(num_vars_, std::move(t));
}

namespace {

using EntryMap = std::map<std::pair<int, int>, double>;

std::vector<SymEntry> to_entries(const EntryMap& m) {
  std::vector<SymEntry> out;
  out.reserve(m.size());
  for (const auto& [ij, v] : m) {
    if (v != 0.0) out.push_back({ij.first, ij.second, v});
  }
  return out;
}

}  // namespace

SosConstraintInfo add_sos_constraint(SdpProblem& problem, const AffinePolynomial& expr,
                                     const Basis& basis, const std::string& family,
                                     const std::optional<BallCertificate>& ball) {
  if (basis.num_vars != expr.num_vars())
    throw DimensionError("basis has " + std::to_string(basis.num_vars) +
                         " variables, polynomial has " + std::to_string(expr.num_vars()));
  SosConstraintInfo info;
  info.family = family;

  // Per monomial: Gram contributions of each block.
  std::map<Monomial, EntryMap> gram_terms;
  std::map<Monomial, EntryMap> mult_terms;
  const GramMap gm = gram_map(basis);
  for (std::size_t r = 0; r < gm.monomials.size(); ++r) {
    auto& em = gram_terms[gm.monomials[r]];
    for (const auto& pr : gm.rows[r]) em[{pr.i, pr.j}] += 1.0;
  }
  if (ball) {
    const Basis& mb = ball->multiplier_basis;
    if (mb.num_vars != basis.num_vars) throw DimensionError("multiplier basis variable count");
    if (2 * mb.max_degree + 2 > 2 * basis.max_degree)
      throw DegreeError("multiplier term of degree " + std::to_string(2 * mb.max_degree + 2) +
                        " exceeds Gram degree " + std::to_string(2 * basis.max_degree));
    if (!(ball->radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    const int nv = basis.num_vars;
    Polynomial g = Polynomial::constant(nv, ball->radius * ball->radius);
    for (int i = 0; i < nv; ++i) g = g - Polynomial::variable(nv, i).pow(2);
    const GramMap mm = gram_map(mb);
    for (std::size_t r = 0; r < mm.monomials.size(); ++r) {
      for (const auto& [gm_mono, gc] : g.terms()) {
        auto& em = mult_terms[mm.monomials[r] * gm_mono];
        for (const auto& pr : mm.rows[r]) em[{pr.i, pr.j}] += gc;
      }
    }
  }

  std::set<Monomial> support;
  for (const auto& [m, _] : gram_terms) support.insert(m);
  for (const auto& [m, _] : mult_terms) support.insert(m);
  for (const auto& [m, c] : expr.terms()) {
    const bool reachable = support.count(m) > 0;
    if (!reachable && c.constant != 0.0) {
      throw DegreeError("monomial " + m.to_string() + " (degree " + std::to_string(m.degree()) +
                        ") is not representable by a Gram matrix over the degree-" +
                        std::to_string(basis.max_degree) + " basis");
    }
    // Unreachable monomials with only variable coefficients get an explicit
    // row forcing that coefficient to zero.
    if (!c.linear.empty()) support.insert(m);
  }

  info.gram_block = problem.add_block(static_cast<int>(basis.size()), family + ".gram");
  if (ball) {
    info.multiplier_block =
        problem.add_block(static_cast<int>(ball->multiplier_basis.size()), family + ".multiplier");
  }

  for (const auto& m : support) {
    Constraint c;
    c.label = {family, m.exponents()};
    if (auto it = gram_terms.find(m); it != gram_terms.end()) {
      c.blocks.push_back({info.gram_block, to_entries(it->second)});
    }
    if (auto it = mult_terms.find(m); it != mult_terms.end()) {
      auto entries = to_entries(it->second);
      if (!entries.empty()) c.blocks.push_back({info.multiplier_block, std::move(entries)});
    }
    if (auto it = expr.terms().find(m); it != expr.terms().end()) {
      c.rhs = it->second.constant;
      for (const auto& [f, a] : it->second.linear) {
        if (a != 0.0) c.free.emplace_back(f, -a);
      }
    }
    info.rows.push_back(problem.num_constraints());
    info.row_monomials.push_back(m);
    problem.constraints.push_back(std::move(c));
  }
  return info;
}

SdpProblem compile_sos(const Polynomial& p, const Basis& basis) {
  SdpProblem prob;
  prob.sense = Sense::Minimize;
  add_sos_constraint(prob, AffinePolynomial(p), basis, kSosFamily);
  return prob;
}

SdpProblem compile_pop(const Polynomial& p, const Basis& basis) {
  SdpProblem prob;
  prob.sense = Sense::Maximize;
  const int lambda = prob.add_free();
  prob.free_objective[lambda] = 1.0;
  AffinePolynomial expr(p);
  expr.add(Polynomial::constant(p.num_vars(), 1.0), lambda, -1.0);
  add_sos_constraint(prob, expr, basis, kSosFamily);
  return prob;
}

SdpProblem compile_sos_on_ball(const Polynomial& p, const Basis& basis, double radius,
                               const Basis& multiplier_basis) {
  SdpProblem prob;
  prob.sense = Sense::Minimize;
  add_sos_constraint(prob, AffinePolynomial(p), basis, kSosFamily,
                     BallCertificate{radius, multiplier_basis});
  return prob;
}

SdpProblem compile_pop_on_ball(const Polynomial& p, const Basis& basis, double radius,
                               const Basis& multiplier_basis) {
  SdpProblem prob;
  prob.sense = Sense::Maximize;
  const int lambda = prob.add_free();
  prob.free_objective[lambda] = 1.0;
  AffinePolynomial expr(p);
  expr.add(Polynomial::constant(p.num_vars(), 1.0), lambda, -1.0);
  add_sos_constraint(prob, expr, basis, kSosFamily, BallCertificate{radius, multiplier_basis});
  return prob;
}

int default_gram_degree(const Polynomial& p) { return (p.degree() + 1) / 2; }

Polynomial four_double_zero_polynomial() {
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial y = Polynomial::variable(2, 1);
  Polynomial p = Polynomial::constant(2, 1.0);
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      const Polynomial dx = x - Polynomial::constant(2, a);
      const Polynomial dy = y - Polynomial::constant(2, b);
      p = p * (dx * dx + dy * dy);
    }
  }
  return p;
}

}  // namespace sketchsdp
