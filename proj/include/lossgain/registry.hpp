#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lossgain/analysis.hpp"
#include "lossgain/core/errors.hpp"
#include "lossgain/models.hpp"
#include "lossgain/system_model.hpp"

namespace lossgain {

/// A zoo model with defaults applied, ready to integrate and analyse.
struct ModelInstance {
  std::string name;
  ParameterMap params;
  std::size_t state_dim = 0;
  VectorField field;
  std::optional<SystemSpec> spec;  ///< present for models with a Hamiltonian representation
  std::map<std::string, InvariantFn> invariants;
  RealVector default_state;
};

struct ParameterInfo {
  std::string name;
  double default_value = 0.0;
  std::string description;
};

struct ModelDescriptor {
  std::string name;
  std::string description;
  std::string equations;
  std::vector<ParameterInfo> parameters;
  std::function<ModelInstance(const ParameterMap&)> build;
};

/// Looks up a named invariant; unknown names are a contract violation.
inline const InvariantFn& find_invariant(const ModelInstance& model, const std::string& name) {
  auto it = model.invariants.find(name);
  if (it == model.invariants.end()) {
    std::string known;
    for (const auto& [k, _] : model.invariants) known += (known.empty() ? "" : ", ") + k;
    throw ContractViolation("unknown invariant '" + name + "' for model " + model.name + " (known: " + known + ")");
  }
  return it->second;
}

inline double conserved_drift(const Trajectory& traj, const ModelInstance& model, const std::string& name) {
  return conserved_drift(traj, find_invariant(model, name));
}

namespace detail {

inline std::size_t as_count(const ParameterMap& p, const std::string& key, std::size_t min) {
  const double v = p.at(key);
  if (!(v >= static_cast<double>(min)) || v != std::floor(v) || v > 1e6)
    throw ContractViolation("parameter " + key + " must be an integer >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

inline void add_hamiltonian(ModelInstance& m) {
  const SystemSpec spec = *m.spec;
  m.invariants["H"] = [spec](std::span<const double> s) {
    return hamiltonian_value(spec, StateVector(RealVector(s.begin(), s.end()), 0.0));
  };
}

inline ModelInstance with_spec(std::string name, const ParameterMap& p, SystemSpec spec, VectorField fast,
                               RealVector state) {
  ModelInstance m;
  m.name = std::move(name);
  m.params = p;
  m.state_dim = 2 * spec.n();
  m.field = fast ? std::move(fast) : system_field(spec);
  m.spec = std::move(spec);
  m.default_state = std::move(state);
  add_hamiltonian(m);
  return m;
}

inline ModelInstance field_only(std::string name, const ParameterMap& p, std::size_t dim, VectorField f,
                                RealVector state) {
  ModelInstance m;
  m.name = std::move(name);
  m.params = p;
  m.state_dim = dim;
  m.field = std::move(f);
  m.default_state = std::move(state);
  return m;
}

inline OligomerParams oligomer_params(const ParameterMap& p) {
  OligomerParams o;
  o.Gamma = p.at("Gamma");
  o.beta = std::polar(p.at("beta_abs"), p.at("beta_phase"));
  o.alpha0 = p.at("alpha0");
  o.alpha = std::polar(p.at("alpha_abs"), p.at("alpha_phase"));
  o.delta = p.at("delta");
  o.power = static_cast<int>(as_count(p, "power", 0));
  return o;
}

inline std::vector<ModelDescriptor> build_registry() {
  std::vector<ModelDescriptor> r;

  r.push_back({"bateman", "damped oscillator x paired with its anti-damped mirror y",
               "x'' + 2 gamma x' + omega^2 x = 0; y'' - 2 gamma y' + omega^2 y = 0",
               {{"gamma", 0.1, "loss rate of x, gain rate of y"}, {"omega", 1.0, "natural frequency"}},
               [](const ParameterMap& p) {
                 const BatemanParams bp{p.at("gamma"), p.at("omega")};
                 ModelInstance m = with_spec("bateman", p, make_bateman(bp), bateman_field(bp), {1.0, 0.5, 0.0, 0.2});
                 m.invariants["L_B"] = [bp](std::span<const double> s) { return bateman_lb(bp, s); };
                 return m;
               }});

  r.push_back({"resonators", "linearly coupled loss and gain resonators",
               "x'' + 2 gamma x' + omega^2 x + eps y = 0; y'' - 2 gamma y' + omega^2 y + eps x = 0",
               {{"gamma", 0.1, "loss-gain rate"}, {"omega", 1.0, "natural frequency"}, {"epsilon", 0.5, "coupling"}},
               [](const ParameterMap& p) {
                 const ResonatorParams rp{p.at("gamma"), p.at("omega"), p.at("epsilon")};
                 return with_spec("resonators", p, make_resonators(rp), resonator_field(rp), {1.0, 0.5, 0.0, 0.2});
               }});

  r.push_back({"vdp_duffing", "Van der Pol-Duffing pair with Lorentz coupling alpha",
               "x'' = 2 M R x' - 2 M grad V with M = sigma1 + alpha^2 I, F_i = a_i x_i + b_i x_i^3",
               {{"gamma", 0.1, "loss-gain strength"},
                {"alpha", 0.0, "Lorentz strength"},
                {"beta", 0.0, "linear coupling"},
                {"omega", 1.0, "frequency"},
                {"a1", 1.0, "linear part of F_1"},
                {"a2", 1.0, "linear part of F_2"},
                {"b1", 0.0, "cubic part of F_1"},
                {"b2", 0.0, "cubic part of F_2"},
                {"g", 0.0, "x1^3 x2 coupling"}},
               [](const ParameterMap& p) {
                 const VdpDuffingParams vp{p.at("gamma"), p.at("alpha"), p.at("beta"), p.at("omega"), p.at("a1"),
                                           p.at("a2"),    p.at("b1"),    p.at("b2"),   p.at("g")};
                 return with_spec("vdp_duffing", p, make_vdp_duffing(vp), {}, {0.1, 0.2, 0.0, 0.0});
               }});

  r.push_back({"duffing_triplet", "Van der Pol-Duffing pair coupled to an undamped Duffing oscillator x3",
               "M = [[alpha^2,1,0],[1,alpha^2,0],[0,0,1]], F = (a1 x1 + b1 x1^3, a2 x2 + b2 x2^3, 0)",
               {{"gamma", 0.1, "loss-gain strength"},
                {"alpha", 0.5, "Lorentz strength and x1^3 x2 coupling"},
                {"beta", 0.2, "linear coupling"},
                {"omega", 1.0, "frequency"},
                {"a1", 1.0, "linear part of F_1"},
                {"a2", 1.0, "linear part of F_2"},
                {"b1", 0.0, "cubic part of F_1"},
                {"b2", 0.0, "cubic part of F_2"},
                {"delta", 0.1, "quartic self-interaction of x3"}},
               [](const ParameterMap& p) {
                 const TripletParams tp{p.at("gamma"), p.at("alpha"), p.at("beta"), p.at("omega"), p.at("a1"),
                                        p.at("a2"),    p.at("b1"),    p.at("b2"),   p.at("delta")};
                 return with_spec("duffing_triplet", p, make_duffing_triplet(tp), {},
                                  {0.1, 0.05, 0.1, 0.0, 0.0, 0.0});
               }});

  r.push_back({"duffing", "scaled coupled Duffing pair with positional curl force",
               "x'' + 2 Gamma x' + x + s1 beta y + alpha x^3 = 0; y'' - 2 Gamma y' + y + s2 beta x + 3 alpha x^2 y = 0",
               {{"Gamma", 0.01, "loss-gain rate"},
                {"beta", 1.5, "linear coupling"},
                {"alpha", 0.5, "cubic coupling"},
                {"sign1", 1.0, "sign of beta in the x equation"},
                {"sign2", 1.0, "sign of beta in the y equation"}},
               [](const ParameterMap& p) {
                 const DuffingParams dp{p.at("Gamma"), p.at("beta"), p.at("alpha"), p.at("sign1"), p.at("sign2")};
                 ModelInstance m = with_spec("duffing", p, make_duffing_hamiltonian(dp), duffing_field(dp),
                                             {0.01, 0.02, 0.03, 0.04});
                 return m;
               }});

  r.push_back({"duffing_unscaled", "coupled Duffing pair before time and amplitude rescaling",
               "x'' + 2 gamma x' + omega^2 x + beta1 y + g x^3 = 0; y'' - 2 gamma y' + omega^2 y + beta2 x + 3 g x^2 y = 0",
               {{"gamma", 0.1, "loss-gain rate"},
                {"omega", 1.0, "frequency"},
                {"beta1", 1.0, "coupling in the x equation"},
                {"beta2", 1.0, "coupling in the y equation"},
                {"g", 1.0, "cubic coupling"}},
               [](const ParameterMap& p) {
                 const DuffingRawParams dp{p.at("gamma"), p.at("omega"), p.at("beta1"), p.at("beta2"), p.at("g")};
                 return field_only("duffing_unscaled", p, 4, duffing_raw_field(dp), {0.01, 0.02, 0.03, 0.04});
               }});

  r.push_back({"duffing_nh", "damped and anti-damped Duffing pair with unequal cubic strengths (no Hamiltonian)",
               "x'' + 2 Gamma x' + omega^2 x + beta y + alpha1 x^3 = 0; y'' - 2 Gamma y' + omega^2 y + beta x + alpha2 y^3 = 0",
               {{"Gamma", 0.1, "loss-gain rate"},
                {"beta", 0.5, "linear coupling"},
                {"alpha1", 0.5, "cubic strength of x"},
                {"alpha2", 1.0, "cubic strength of y"},
                {"omega", 1.0, "frequency"}},
               [](const ParameterMap& p) {
                 const DuffingNhParams dp{p.at("Gamma"), p.at("beta"), p.at("alpha1"), p.at("alpha2"), p.at("omega")};
                 return field_only("duffing_nh", p, 4, make_duffing_nonhamiltonian(dp), {0.01, 0.02, 0.03, 0.04});
               }});

  r.push_back({"landau", "charged particle in a magnetic field with balanced loss-gain and anisotropic coupling",
               "x1'' = -gamma x1' + (B + C) x2'; x2'' = -(B - C) x1' + gamma x2'",
               {{"B", 2.0, "magnetic field"}, {"C", 0.8, "non-Lorentzian coupling"}, {"gamma", 0.6, "loss-gain rate"}},
               [](const ParameterMap& p) {
                 const LandauParams lp{p.at("B"), p.at("C"), p.at("gamma")};
                 return with_spec("landau", p, make_landau(lp), landau_field(lp), {0.1, 0.2, 0.3, -0.1});
               }});

  r.push_back({"translational_cubic", "m pairs with translation invariance and a cubic restoring force",
               "z+'' - 2 gamma z-' = 0; z-'' - 2 gamma z+' - 2 omega0^2 z- - (alpha/2) z-^3 = 0 per pair",
               {{"m", 1.0, "number of pairs"},
                {"gamma", 0.3, "loss-gain rate"},
                {"omega0", 1.0, "frequency"},
                {"alpha", 1.0, "cubic strength"},
                {"amplitude", 0.5, "default initial amplitude A of z1-"}},
               [](const ParameterMap& p) {
                 const TranslationalCubicParams tp{as_count(p, "m", 1), p.at("gamma"), p.at("omega0"), p.at("alpha")};
                 ModelInstance m = with_spec("translational_cubic", p, make_translational_cubic(tp), {},
                                             cubic_initial_state(tp, p.at("amplitude")));
                 for (std::size_t i = 0; i < tp.m; ++i)
                   m.invariants["Pi_" + std::to_string(i + 1)] = [tp, i](std::span<const double> s) {
                     return translational_pi(tp, s, i);
                   };
                 return m;
               }});

  r.push_back({"rotational_quartic", "m pairs with a hyperbolic rotation invariance and quartic potential",
               "q'' + (omega^2 - gamma^2) q + alpha q^2 q = 0 with z+ = q cosh(gamma t), z- = q sinh(gamma t)",
               {{"m", 1.0, "number of pairs"},
                {"gamma", 0.4, "loss-gain rate"},
                {"omega", 1.0, "frequency"},
                {"alpha", 1.0, "quartic strength"}},
               [](const ParameterMap& p) {
                 const RotationalQuarticParams rp{as_count(p, "m", 1), p.at("gamma"), p.at("omega"), p.at("alpha")};
                 RealVector s(4 * rp.m, 0.0);
                 set_pair_coordinates(s, 0, {0.5, 0.0, 0.0, 0.5 * rp.gamma});
                 ModelInstance m = with_spec("rotational_quartic", p, make_rotational_quartic(rp), {}, s);
                 for (std::size_t i = 0; i < rp.m; ++i)
                   m.invariants["L_" + std::to_string(i + 1)] = [rp, i](std::span<const double> st) {
                     return rotational_l(rp, st, i);
                   };
                 return m;
               }});

  r.push_back({"dimer", "nonlinear optical dimer with balanced loss and gain (state: Re/Im interleaved)",
               "psi' = -Gamma0 sigma3 psi + i beta sigma1 psi + i alpha N(psi)",
               {{"Gamma0", 0.1, "loss-gain rate"}, {"beta", 1.0, "linear coupling"}, {"alpha", 0.5, "nonlinearity"}},
               [](const ParameterMap& p) {
                 const DimerParams dp{p.at("Gamma0"), p.at("beta"), p.at("alpha")};
                 ModelInstance m = field_only("dimer", p, 4, make_dimer(dp), {1.0, 0.0, 0.0, 0.0});
                 m.invariants["R"] = [](std::span<const double> s) { return stokes_variables(s).r; };
                 m.invariants["Z1"] = [](std::span<const double> s) { return stokes_variables(s).z1; };
                 m.invariants["Z2"] = [](std::span<const double> s) { return stokes_variables(s).z2; };
                 m.invariants["Z3"] = [](std::span<const double> s) { return stokes_variables(s).z3; };
                 return m;
               }});

  r.push_back({"oligomer", "two-site oligomer with pseudo-hermitian linear part (state: Re/Im interleaved)",
               "i psi' = A psi - delta (psi^dagger M psi)^n psi",
               {{"Gamma", 0.6, "loss-gain rate"},
                {"beta_abs", 1.0, "|beta|"},
                {"beta_phase", 0.0, "arg beta"},
                {"alpha0", 1.0, "diagonal of M"},
                {"alpha_abs", 0.6, "|alpha|"},
                {"alpha_phase", std::numbers::pi / 2.0, "arg alpha"},
                {"delta", 1.0, "nonlinear strength"},
                {"power", 1.0, "exponent n"}},
               [](const ParameterMap& p) {
                 const OligomerParams op = oligomer_params(p);
                 ModelInstance m = field_only("oligomer", p, 4, make_oligomer_field(op), {0.6, 0.1, -0.2, 0.3});
                 const ComplexMatrix metric = oligomer_m(op);
                 m.invariants["Phi_M_Phi"] = [metric](std::span<const double> s) {
                   return quadratic_form(metric, from_interleaved(s)).real();
                 };
                 m.invariants["norm"] = [](std::span<const double> s) {
                   double n = 0.0;
                   for (double v : s) n += v * v;
                   return n;
                 };
                 return m;
               }});
  return r;
}

}  // namespace detail

inline const std::vector<ModelDescriptor>& model_registry() {
  static const std::vector<ModelDescriptor> registry = detail::build_registry();
  return registry;
}

inline const ModelDescriptor& find_model(const std::string& name) {
  for (const auto& d : model_registry())
    if (d.name == name) return d;
  std::string known;
  for (const auto& d : model_registry()) known += (known.empty() ? "" : ", ") + d.name;
  throw ContractViolation("unknown model '" + name + "' (known: " + known + ")");
}

/// Builds a model from overrides; unknown parameter names are rejected.
inline ModelInstance make_model(const std::string& name, const ParameterMap& overrides = {}) {
  const ModelDescriptor& d = find_model(name);
  ParameterMap p;
  for (const auto& info : d.parameters) p[info.name] = info.default_value;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw ContractViolation("model " + name + " has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw ContractViolation("parameter " + k + " must be finite");
    p[k] = v;
  }
  return d.build(p);
}

}  // namespace lossgain
