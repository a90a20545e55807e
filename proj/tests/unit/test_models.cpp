#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "catch_amalgamated.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/models.hpp"
#include "lossgain/numeric/mat_exp.hpp"
#include "lossgain/numeric/nonsym_eig.hpp"
#include "lossgain/registry.hpp"
#include "support.hpp"

using namespace lossgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

IntegratorConfig tight(double t1, double interval = 0.5) {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  c.t1 = t1;
  c.output_interval = interval;
  return c;
}

RealVector eval(const VectorField& f, const RealVector& s) {
  RealVector d(s.size());
  f(s, d);
  return d;
}

}  // namespace

TEST_CASE("reductions: Van der Pol-Duffing without nonlinearity is the resonator pair") {
  // With F = x and alpha = 0 the gain sits on x1; the resonator convention puts loss on x.
  const VdpDuffingParams v{0.15, 0.0, 0.4, 1.2, 1.0, 1.0, 0.0, 0.0, 0.0};
  const SystemSpec s = make_vdp_duffing(v);
  const VectorField res = resonator_field({-v.gamma, v.omega, v.beta});
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const RealVector st = test_support::random_vector(4, rng, 2.0);
    CHECK(test_support::max_diff(eom_rhs(s, StateVector(st)), eval(res, st)) < 1e-12);
  }
}

TEST_CASE("reductions: resonators with epsilon = 0 and rotational quartic with alpha = 0 are Bateman pairs") {
  const SystemSpec bateman = make_bateman({0.2, 1.3});
  const SystemSpec resonators = make_resonators({0.2, 1.3, 0.0});
  const SystemSpec rotational = make_rotational_quartic({1, 0.2, 1.3, 0.0});
  const VectorField mirrored = bateman_field({-0.2, 1.3});
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) {
    const StateVector st(test_support::random_vector(4, rng, 2.0));
    CHECK(test_support::max_diff(eom_rhs(bateman, st), eom_rhs(resonators, st)) < 1e-14);
    CHECK(test_support::max_diff(eom_rhs(bateman, st), eval(bateman_field({0.2, 1.3}), st.xi)) < 1e-12);
    // The pairwise representation places the gain on the first coordinate of each pair.
    CHECK(test_support::max_diff(eom_rhs(rotational, st), eval(mirrored, st.xi)) < 1e-12);
  }
}

TEST_CASE("reductions: dimer without nonlinearity is linear evolution") {
  const DimerParams p{0.3, 1.0, 0.0};
  const Complex i1(0.0, 1.0);
  const ComplexMatrix l{{-p.Gamma0, i1 * p.beta}, {i1 * p.beta, p.Gamma0}};
  const ComplexVector psi0{Complex(0.7, 0.1), Complex(-0.2, 0.4)};
  const Trajectory t = integrate(make_dimer(p), StateVector(to_interleaved(psi0)), tight(10.0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const ComplexVector exact = expm(l * Complex(t.times[i], 0.0)) * std::span<const Complex>(psi0);
    CHECK(test_support::max_diff(t.states[i], to_interleaved(exact)) < 1e-9);
  }
}

TEST_CASE("Duffing scale map: round trip and equivalence of the dynamics") {
  for (const DuffingRawParams raw : {DuffingRawParams{0.07, 1.3, 0.8, 1.9, 0.6}, DuffingRawParams{0.1, 0.7, -0.5, -1.2, 0.3},
                                     DuffingRawParams{0.05, 1.0, 2.0, -0.4, -0.9}}) {
    const DuffingScaleMap m = duffing_scale_map(raw);
    const VectorField raw_f = duffing_raw_field(raw);
    std::mt19937_64 rng(13);
    for (int k = 0; k < 10; ++k) {
      const RealVector s = test_support::random_vector(4, rng, 1.0);
      CHECK(test_support::max_diff(m.to_raw(m.to_scaled(s)), s) < 1e-14);
      if (m.scaled.sign1 != m.scaled.sign2) continue;
      // d/dtau of the scaled state equals the raw derivative pushed through the scaling.
      const RealVector d = eval(raw_f, s);
      const double w = m.time_factor;
      const RealVector expected{m.x_factor * d[0] / w, m.y_factor * d[1] / w, m.x_factor * d[2] / (w * w),
                                m.y_factor * d[3] / (w * w)};
      CHECK(test_support::max_diff(eval(duffing_field(m.scaled), m.to_scaled(s)), expected) < 1e-12);
    }
  }
  CHECK_THROWS_AS(duffing_scale_map({0.1, 1.0, 0.0, 1.0, 1.0}), ContractViolation);
}

TEST_CASE("Duffing equilibria are zeros of the vector field") {
  for (const DuffingParams p : {DuffingParams{0.1, 1.01, 1.0}, DuffingParams{0.2, 0.5, -0.8}, DuffingParams{0.0, 1.5, 0.5},
                                DuffingParams{0.1, 0.7, 0.4, -1.0, -1.0}}) {
    const auto eq = duffing_equilibria(p);
    const VectorField f = duffing_field(p);
    int existing = 0;
    for (const auto& e : eq) {
      if (!e.exists) continue;
      ++existing;
      INFO(e.name);
      CHECK(norm_inf(std::span<const double>(eval(f, e.state))) < 1e-12);
    }
    CHECK(existing % 2 == 1);  // P0 plus symmetric pairs
  }
  // P1 needs 1 + 3 beta^2 > 4 when alpha > 0.
  const auto below = duffing_equilibria({0.1, 0.9, 1.0});
  CHECK_FALSE(below[1].exists);
  const auto above = duffing_equilibria({0.1, 1.01, 1.0});
  CHECK(above[1].exists);
  CHECK_FALSE(above[3].exists);
  CHECK(duffing_equilibria({0.1, 0.5, -1.0})[3].exists);
}

TEST_CASE("translational cubic: cn solution matches direct integration") {
  const TranslationalCubicParams p{1, 0.3, 1.0, 1.0};
  for (double amplitude : {0.3, 1.2}) {
    const double c = 0.25;
    const SystemSpec s = make_translational_cubic(p);
    const Trajectory t = integrate(system_field(s), StateVector(cubic_initial_state(p, amplitude, c)), tight(20.0));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const CubicCnSolution e = cubic_cn_solution(amplitude, p, t.times[i], c);
      const PairCoordinates z = pair_coordinates(t.states[i], 0);
      CHECK_THAT(z.z_minus, WithinAbs(e.z1, 1e-8));
      CHECK_THAT(z.z_minus_dot, WithinAbs(e.z1_dot, 1e-8));
      CHECK_THAT(z.z_plus, WithinAbs(e.z_plus, 1e-8));
      CHECK_THAT(translational_pi(p, t.states[i], 0), WithinAbs(0.0, 1e-9));
    }
    // The period from K(k) is where cn returns to its start.
    const CubicCnSolution e = cubic_cn_solution(amplitude, p, 0.0, c);
    CHECK_THAT(cubic_cn_solution(amplitude, p, e.period, c).z1, WithinAbs(amplitude, 1e-10));
  }
}

TEST_CASE("translational cubic: small alpha reduces to a cosine") {
  const TranslationalCubicParams p{1, 0.3, 1.0, 0.0};
  const double omega = 2.0 * std::sqrt(1.0 - 0.09);
  for (double t : {0.0, 0.4, 3.3, 11.0}) {
    const CubicCnSolution e = cubic_cn_solution(0.7, p, t);
    CHECK_THAT(e.z1, WithinAbs(0.7 * std::cos(omega * t), 1e-12));
    CHECK_THAT(e.z_plus, WithinAbs(2.0 * 0.3 * 0.7 / omega * std::sin(omega * t), 1e-12));
  }
  CHECK_THAT(cubic_cn_solution(0.7, p, 0.0).period, WithinRel(2.0 * std::numbers::pi / omega, 1e-12));
  CHECK_THROWS_AS(cubic_cn_solution(0.7, {1, 1.2, 1.0, 1.0}, 0.0), DomainError);
}

TEST_CASE("rotational quartic: reconstruction from q solves the full system") {
  const RotationalQuarticParams p{2, 0.4, 1.0, 1.0};
  IntegratorConfig c = tight(6.0, 0.25);
  const Trajectory q = integrate(rotational_q_field(p), StateVector(RealVector{0.5, -0.3, 0.2, 0.4}), c);
  const Trajectory rec = rotational_reconstruct(q, p.gamma);
  const SystemSpec s = make_rotational_quartic(p);
  const VectorField f = system_field(s);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const RealVector d = eval(f, rec.states[i]);
    const double scale = std::max(1.0, norm_inf(std::span<const double>(d)));
    CHECK(test_support::max_diff(d, rec.derivatives[i]) < 1e-8 * scale);
    for (std::size_t pair = 0; pair < p.m; ++pair) CHECK_THAT(rotational_l(p, rec.states[i], pair), WithinAbs(0.0, 1e-9 * scale));
  }
  const Trajectory direct = integrate(f, StateVector(rec.states.front()), c);
  REQUIRE(direct.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double scale = std::max(1.0, norm_inf(std::span<const double>(rec.states[i])));
    CHECK(test_support::max_diff(direct.states[i], rec.states[i]) < 1e-8 * scale);
  }
}

TEST_CASE("oligomer: two-site closed form, general form and integration agree") {
  const OligomerParams p;
  const ComplexVector w{Complex(0.6, 0.1), Complex(-0.2, 0.3)};
  const OligomerSolution sol = make_oligomer(p, w);
  CHECK_THAT(sol.theta_sq, WithinAbs(0.64, 1e-15));
  CHECK(sol.positive_definite_metric);
  const auto general = oligomer_exact_general(oligomer_a(p), oligomer_m(p), p.delta, p.power, w);
  const Trajectory t = integrate(make_oligomer_field(p), StateVector(to_interleaved(w)), tight(30.0));
  const ComplexMatrix m = oligomer_m(p);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const ComplexVector closed = sol.evaluate(t.times[i]);
    CHECK(test_support::max_diff(to_interleaved(closed), to_interleaved(general(t.times[i]))) < 1e-10);
    CHECK(test_support::max_diff(t.states[i], to_interleaved(closed)) < 1e-8);
    CHECK_THAT(quadratic_form(m, closed).real(), WithinAbs(sol.c, 1e-12));
  }
  // theta = 0.8 makes the linear part periodic with period 2 pi / 0.8 up to the nonlinear phase.
  const double period = 2.0 * std::numbers::pi / 0.8;
  const ComplexVector back = sol.evaluate(period);
  const Complex phase = std::exp(Complex(0.0, p.delta * sol.c * period));
  CHECK(std::abs(back[0] - phase * w[0]) < 1e-12);
  CHECK(std::abs(back[1] - phase * w[1]) < 1e-12);
}

TEST_CASE("oligomer: hermitian case conserves the norm, non-pseudo-hermitian case is rejected") {
  OligomerParams h;
  h.Gamma = 0.0;
  h.alpha = Complex(0.0, 0.0);
  h.power = 2;
  const ComplexVector w{Complex(0.3, -0.4), Complex(0.5, 0.2)};
  const Trajectory t = integrate(make_oligomer_field(h), StateVector(to_interleaved(w)), tight(20.0));
  const double n0 = std::norm(w[0]) + std::norm(w[1]);
  for (const auto& s : t.states) {
    double n = 0.0;
    for (double v : s) n += v * v;
    CHECK_THAT(n, WithinAbs(n0, 1e-10));
  }
  OligomerParams bad;
  bad.alpha = Complex(0.0, 0.0);  // M = I while A has gain and loss
  CHECK_THROWS_AS(make_oligomer(bad, w), ContractViolation);
  CHECK_THROWS_AS(make_oligomer(OligomerParams{}, ComplexVector(3)), ContractViolation);
}

TEST_CASE("Landau: regions, frequency and velocity rotation") {
  const LandauParams unit{2.0, 0.6, 0.8};  // Delta = 1
  CHECK_THAT(landau_delta(unit), WithinAbs(1.0, 1e-15));
  CHECK(landau_region(unit) == LandauRegion::I);
  CHECK_THAT(landau_frequency(unit), WithinAbs(std::sqrt(3.0), 1e-15));
  CHECK(landau_region({0.5, 0.6, 0.8}) == LandauRegion::II);
  CHECK(landau_region({-2.0, 0.6, 0.8}) == LandauRegion::III);
  CHECK_THROWS_AS(landau_frequency({0.5, 0.6, 0.8}), DomainError);
  CHECK_THROWS_AS(make_landau({1.0, 0.6, 0.8}), SingularMatrixError);
  for (double b : {0.7, -1.9}) CHECK_THAT(landau_frequency({b, 0.0, 0.0}), WithinAbs(std::abs(b), 1e-15));

  // The velocity obeys v' = K v; K has eigenvalues +-i omega.
  const RealMatrix k{{-unit.gamma, unit.B + unit.C}, {-(unit.B - unit.C), unit.gamma}};
  for (const Complex& e : eigenvalues(k)) {
    CHECK_THAT(e.real(), WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(e.imag()), WithinAbs(std::sqrt(3.0), 1e-12));
  }
  const SystemSpec s = make_landau(unit);
  std::mt19937_64 rng(14);
  for (int i = 0; i < 10; ++i) {
    const RealVector st = test_support::random_vector(4, rng, 1.0);
    CHECK(test_support::max_diff(eom_rhs(s, StateVector(st)), eval(landau_field(unit), st)) < 1e-12);
  }
}

TEST_CASE("Duffing pair without a Hamiltonian stays bounded") {
  IntegratorConfig c;
  c.step = 0.01;
  c.t1 = 500.0;
  c.record_stride = 10;
  const Trajectory t = integrate(make_duffing_nonhamiltonian({}), StateVector(RealVector{0.01, 0.02, 0.03, 0.04}), c);
  CHECK_FALSE(t.diverged);
  double peak = 0.0;
  for (const auto& s : t.states) peak = std::max(peak, norm_inf(std::span<const double>(s)));
  INFO("peak " << peak);
  CHECK(peak < 10.0);
}

TEST_CASE("registry invariants are conserved along default trajectories") {
  const std::set<std::string> observables{"R", "Z1", "Z2", "Z3", "norm"};
  for (const auto& d : model_registry()) {
    const ModelInstance m = make_model(d.name);
    const Trajectory t = integrate(m.field, StateVector(m.default_state), tight(10.0));
    for (const auto& [name, fn] : m.invariants) {
      if (observables.count(name)) continue;
      INFO(d.name << " " << name);
      const double i0 = fn(t.states.front());
      double drift = 0.0;
      for (const auto& s : t.states) drift = std::max(drift, std::abs(fn(s) - i0));
      CHECK(drift <= 1e-8 * std::max(1.0, std::abs(i0)));
    }
  }
}

TEST_CASE("registry builds every model with defaults and rejects bad parameters") {
  for (const auto& d : model_registry()) {
    const ModelInstance m = make_model(d.name);
    CHECK(m.state_dim == m.default_state.size());
    CHECK(static_cast<bool>(m.field));
  }
  CHECK_THROWS_AS(make_model("lorenz"), ContractViolation);
  CHECK_THROWS_AS(make_model("translational_cubic", {{"m", 1.5}}), ContractViolation);
  CHECK_THROWS_AS(make_model("bateman", {{"not_a_parameter", 1.0}}), ContractViolation);
}
