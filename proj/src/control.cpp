#include "sketchsdp/control.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sketchsdp {

namespace {

std::vector<int> state_mapping(int num_states) {
  std::vector<int> m(num_states);
  std::iota(m.begin(), m.end(), 0);
  return m;
}

std::optional<BallCertificate> ball_for(const std::optional<double>& radius, const Basis& basis) {
  if (!radius) return std::nullopt;
  if (basis.max_degree < 1)
    throw DegreeError("a ball certificate needs a Gram basis of degree at least 1");
  return BallCertificate{*radius, monomial_basis(basis.num_vars, basis.max_degree - 1)};
}

}  // namespace

void ControlProblem::validate() const {
  if (num_states < 1 || num_inputs < 0) throw std::invalid_argument("bad state/input counts");
  if (static_cast<int>(dynamics.size()) != num_states)
    throw std::invalid_argument("need one dynamics component per state");
  for (const auto& f : dynamics) {
    if (f.num_vars() != num_vars()) throw DimensionError("dynamics must be polynomials in (x, u)");
  }
  if (cost.num_vars() != num_vars()) throw DimensionError("cost must be a polynomial in (x, u)");
  if (static_cast<int>(x0.size()) != num_states || static_cast<int>(xT.size()) != num_states)
    throw DimensionError("endpoints must have one entry per state");
  if (value_basis.num_vars != num_states) throw DimensionError("value basis must be over x");
  if (certificate_basis.num_vars != num_vars())
    throw DimensionError("certificate basis must be over (x, u)");
}

SdpProblem compile_poc(const ControlProblem& cp) {
  cp.validate();
  SdpProblem prob;
  prob.sense = Sense::Maximize;
  const int nv = static_cast<int>(cp.value_basis.size());
  const int first = prob.add_free(nv);
  const auto mapping = state_mapping(cp.num_states);

  AffinePolynomial bellman(cp.cost);
  AffinePolynomial value(cp.num_states);
  for (int k = 0; k < nv; ++k) {
    const Monomial& m = cp.value_basis[k];
    prob.free_objective[first + k] = m.eval(cp.x0) - m.eval(cp.xT);
    const Polynomial phi = Polynomial::monomial(m);
    value.add(phi, first + k);
    const auto grad = phi.gradient();
    Polynomial flow(cp.num_vars());
    for (int i = 0; i < cp.num_states; ++i) {
      flow = flow + grad[i].embed(cp.num_vars(), mapping) * cp.dynamics[i];
    }
    if (!flow.is_zero()) bellman.add(flow, first + k);
  }

  add_sos_constraint(prob, bellman, cp.certificate_basis, kBellmanFamily,
                     ball_for(cp.joint_radius, cp.certificate_basis));
  const Basis value_gram = monomial_basis(cp.num_states, cp.value_basis.max_degree / 2);
  add_sos_constraint(prob, value, value_gram, kValueFamily, ball_for(cp.state_radius, value_gram));
  return prob;
}

Polynomial value_function(const ControlProblem& cp, const std::vector<double>& coeffs) {
  if (coeffs.size() < cp.value_basis.size())
    throw DimensionError("need one coefficient per value basis element");
  Polynomial v(cp.num_states);
  for (std::size_t k = 0; k < cp.value_basis.size(); ++k) {
    if (coeffs[k] != 0.0) v = v + Polynomial::monomial(cp.value_basis[k], coeffs[k]);
  }
  return v;
}

Polynomial bellman_expression(const ControlProblem& cp, const Polynomial& v) {
  if (v.num_vars() != cp.num_states) throw DimensionError("V must be a polynomial in x");
  const auto grad = v.gradient();
  const auto mapping = state_mapping(cp.num_states);
  Polynomial out = cp.cost;
  for (int i = 0; i < cp.num_states; ++i)
    out = out + grad[i].embed(cp.num_vars(), mapping) * cp.dynamics[i];
  return out;
}

double bellman_residual(const ControlProblem& cp, const Polynomial& v,
                        const std::vector<std::vector<double>>& samples) {
  const Polynomial expr = bellman_expression(cp, v);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (static_cast<int>(s.size()) != cp.num_vars())
      throw DimensionError("sample must have one entry per state and input");
    best = std::min(best, expr.eval(s));
  }
  return best;
}

ControlProblem default_control_problem() {
  ControlProblem cp;
  cp.num_states = 1;
  cp.num_inputs = 1;
  cp.names = {"x", "u"};
  const Polynomial x = Polynomial::variable(2, 0);
  const Polynomial u = Polynomial::variable(2, 1);
  cp.dynamics = {u};
  cp.cost = x * x + u * u;
  cp.x0 = {1.0};
  cp.xT = {0.0};
  cp.value_basis = monomial_basis(1, 2);
  cp.certificate_basis = monomial_basis(2, 1);
  return cp;
}

ControlProblem control_problem_from_json(const nlohmann::json& j) {
  ControlProblem cp;
  const auto states = j.at("states").get<std::vector<std::string>>();
  const auto inputs = j.value("inputs", std::vector<std::string>{});
  cp.num_states = static_cast<int>(states.size());
  cp.num_inputs = static_cast<int>(inputs.size());
  cp.names = states;
  cp.names.insert(cp.names.end(), inputs.begin(), inputs.end());
  for (const auto& f : j.at("dynamics")) cp.dynamics.push_back(Polynomial::parse(f.get<std::string>(), cp.names));
  cp.cost = Polynomial::parse(j.at("cost").get<std::string>(), cp.names);
  cp.x0 = j.at("x0").get<std::vector<double>>();
  cp.xT = j.at("xT").get<std::vector<double>>();
  cp.value_basis = monomial_basis(cp.num_states, j.value("value_degree", 2));
  if (j.contains("certificate_degree")) {
    cp.certificate_basis = monomial_basis(cp.num_vars(), j["certificate_degree"].get<int>());
  } else {
    // Smallest Gram degree covering grad V . f + c.
    int deg = cp.cost.degree();
    for (const auto& f : cp.dynamics) deg = std::max(deg, cp.value_basis.max_degree - 1 + f.degree());
    cp.certificate_basis = monomial_basis(cp.num_vars(), (deg + 1) / 2);
  }
  if (j.contains("state_radius")) cp.state_radius = j["state_radius"].get<double>();
  if (j.contains("joint_radius")) cp.joint_radius = j["joint_radius"].get<double>();
  cp.validate();
  return cp;
}

}  // namespace sketchsdp
