#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sketchsdp/polynomial.hpp"
#include "sketchsdp/sdp_problem.hpp"
#include "sketchsdp/sos.hpp"

namespace sketchsdp {

/// Polynomial optimal control on (x, u): states occupy variables
/// 0..num_states-1 and inputs the rest.
struct ControlProblem {
  int num_states = 1;
  int num_inputs = 1;
  std::vector<Polynomial> dynamics;  // dx_i/dt, over (x, u)
  Polynomial cost;                   // running cost, over (x, u)
  std::vector<double> x0;
  std::vector<double> xT;
  Basis value_basis;        // over x
  Basis certificate_basis;  // over (x, u)
  /// Ball certificates for the state set and the state-input set; nullopt
  /// means unconstrained SOS.
  std::optional<double> state_radius;
  std::optional<double> joint_radius;
  std::vector<std::string> names;  // optional, states first

  int num_vars() const { return num_states + num_inputs; }
  /// Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
};

inline constexpr const char* kBellmanFamily = "bellman";
inline constexpr const char* kValueFamily = "value";

/// maximize V(x0) - V(xT)  s.t.  grad V . f + c in SOS(X x U),  V in SOS(X).
/// Free variable k is the coefficient of value_basis[k].
SdpProblem compile_poc(const ControlProblem& cp);

/// V as a polynomial over x from the free variables of a compile_poc solution.
Polynomial value_function(const ControlProblem& cp, const std::vector<double>& coeffs);

/// grad V . f + c, as a polynomial over (x, u).
Polynomial bellman_expression(const ControlProblem& cp, const Polynomial& v);

/// min over samples (x, u) of (grad V . f + c).
double bellman_residual(const ControlProblem& cp, const Polynomial& v,
                        const std::vector<std::vector<double>>& samples);

/// xdot = u, c = x^2 + u^2, x0 = 1, xT = 0, deg V = 2 (optimal value 1).
ControlProblem default_control_problem();

/// JSON document: {"states": ["x"], "inputs": ["u"], "dynamics": ["u"],
/// "cost": "x^2 + u^2", "x0": [1], "xT": [0], "value_degree": 2,
/// "certificate_degree": 1, "state_radius": r?, "joint_radius": r?}
ControlProblem control_problem_from_json(const nlohmann::json& j);

}  // namespace sketchsdp
