#include <cmath>
#include <numbers>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/models.hpp"
#include "lossgain/numeric/linear_solve.hpp"
#include "lossgain/registry.hpp"
#include "support.hpp"

using namespace lossgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const VectorField kOscillator = [](std::span<const double> y, std::span<double> d) {
  d[0] = y[1];
  d[1] = -y[0];
};

IntegratorConfig fixed(Scheme s, double h, double t1) {
  IntegratorConfig c;
  c.scheme = s;
  c.step = h;
  c.t1 = t1;
  return c;
}

double oscillator_error(Scheme s, double h) {
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), fixed(s, h, 2.0));
  return std::hypot(t.back()[0] - std::cos(2.0), t.back()[1] + std::sin(2.0));
}

}  // namespace

TEST_CASE("rk4: harmonic oscillator keeps amplitude and period") {
  IntegratorConfig c = fixed(Scheme::rk4, 0.001, 4.0 * 2.0 * std::numbers::pi);
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK_THAT(std::hypot(t.states[i][0], t.states[i][1]), WithinAbs(1.0, 1e-8));
    CHECK_THAT(t.states[i][0], WithinAbs(std::cos(t.times[i]), 1e-8));
  }
  const auto p = period_estimate(t, 0);
  REQUIRE(p);
  CHECK_THAT(*p, WithinAbs(2.0 * std::numbers::pi, 1e-4));
}

TEST_CASE("convergence order measured by step halving") {
  const double rk4 = std::log2(oscillator_error(Scheme::rk4, 0.1) / oscillator_error(Scheme::rk4, 0.05));
  const double mid = std::log2(oscillator_error(Scheme::implicit_midpoint, 0.1) /
                               oscillator_error(Scheme::implicit_midpoint, 0.05));
  CHECK(rk4 >= 3.9);
  CHECK(mid >= 1.9);
}

TEST_CASE("implicit midpoint: Cayley transform on linear systems") {
  const RealMatrix j{{0.1, 1.0, 0.0}, {-2.0, -0.3, 0.5}, {0.0, 0.4, -0.2}};
  const VectorField f = [j](std::span<const double> y, std::span<double> d) {
    const RealVector v = j * y;
    std::copy(v.begin(), v.end(), d.begin());
  };
  const RealVector y0{0.3, -0.7, 1.1};
  const double h = 0.2;
  RealMatrix lhs = RealMatrix::identity(3) - j * (h / 2.0);
  const RealMatrix rhs = RealMatrix::identity(3) + j * (h / 2.0);
  const RealVector expected = linear_solve(lhs, rhs * y0);
  CHECK(test_support::max_diff(implicit_midpoint_step(f, y0, h), expected) < 1e-12);
  // h -> 0 leaves the state unchanged.
  CHECK(test_support::max_diff(implicit_midpoint_step(f, y0, 1e-13), y0) < 1e-12);
  CHECK_THROWS_AS(implicit_midpoint_step(f, y0, 0.0), ContractViolation);
}

TEST_CASE("implicit midpoint is time reversible") {
  const VectorField f = duffing_field({0.2, 0.5, 1.0, 1.0, 1.0});
  const RealVector y0{0.1, 0.2, 0.03, 0.04};
  for (double h : {0.01, 0.1, 0.3}) {
    const RealVector back = implicit_midpoint_step(f, implicit_midpoint_step(f, y0, h), -h);
    CHECK(test_support::max_diff(back, y0) < 1e-10);
  }
}

TEST_CASE("Duffing energy: midpoint error stays bounded while rk4 error keeps growing") {
  const DuffingParams p{0.2, 0.5, 1.0, 1.0, 1.0};
  const SystemSpec s = make_duffing_hamiltonian(p);
  const VectorField f = duffing_field(p);
  const StateVector s0(RealVector{0.1, 0.2, 0.03, 0.04});
  const double h0 = hamiltonian_value(s, s0);
  const auto drift_profile = [&](Scheme scheme) {
    IntegratorConfig c = fixed(scheme, 0.1, 10000.0);
    c.record_stride = 10;
    const Trajectory t = integrate(f, s0, c);
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::abs(hamiltonian_value(s, t.at(i)) - h0);
      (t.times[i] < 5000.0 ? first : second) = std::max(t.times[i] < 5000.0 ? first : second, e);
    }
    return std::pair{first, second};
  };
  const auto [mid_first, mid_second] = drift_profile(Scheme::implicit_midpoint);
  const auto [rk_first, rk_second] = drift_profile(Scheme::rk4);
  INFO("midpoint " << mid_first << " -> " << mid_second << ", rk4 " << rk_first << " -> " << rk_second);
  CHECK(mid_second <= 1.5 * mid_first);
  CHECK(rk_second >= 1.5 * rk_first);
}

TEST_CASE("adaptive scheme reproduces fine fixed-step results on the zoo") {
  for (const auto& d : model_registry()) {
    INFO(d.name);
    const ModelInstance m = make_model(d.name);
    IntegratorConfig a;
    a.scheme = Scheme::adaptive;
    a.abs_tol = 1e-11;
    a.rel_tol = 1e-11;
    a.t1 = 5.0;
    a.output_interval = 0.5;
    const Trajectory ta = integrate(m.field, StateVector(m.default_state), a);
    IntegratorConfig r = fixed(Scheme::rk4, 1e-3, 5.0);
    r.record_stride = 500;
    const Trajectory tr = integrate(m.field, StateVector(m.default_state), r);
    REQUIRE(ta.size() == tr.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      CHECK_THAT(ta.times[i], WithinAbs(tr.times[i], 1e-12));
      CHECK(test_support::max_diff(ta.states[i], tr.states[i]) < 1e-6 * std::max(1.0, norm_inf(std::span<const double>(tr.states[i]))));
    }
  }
}

TEST_CASE("adaptive output grid and recorded times") {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.t1 = 3.0;
  c.output_interval = 0.1;
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  REQUIRE(t.size() == 31);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK_THAT(t.times[i], WithinAbs(0.1 * static_cast<double>(i), 1e-12));
  c.output_interval = 0.0;
  const Trajectory free_steps = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  for (std::size_t i = 1; i < free_steps.size(); ++i) CHECK(free_steps.times[i] > free_steps.times[i - 1]);
  CHECK(free_steps.times.back() == 3.0);
}

TEST_CASE("fixed-step record stride") {
  IntegratorConfig c = fixed(Scheme::rk4, 0.01, 1.0);
  c.record_stride = 10;
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  REQUIRE(t.size() == 11);
  CHECK_THAT(t.times[3], WithinAbs(0.3, 1e-12));
  CHECK(t.times.back() == 1.0);
}

TEST_CASE("Bateman pair: x decays and y grows at rate gamma") {
  const BatemanParams p{0.3, 1.0};
  IntegratorConfig c = fixed(Scheme::rk4, 0.001, 20.0);
  const Trajectory t = integrate(bateman_field(p), StateVector(RealVector{1.0, 1.0, 0.0, 0.0}), c);
  // Envelope via the oscillator energy of each mode, which scales as e^{-+2 gamma t}.
  const double big_omega_sq = 1.0 - p.gamma * p.gamma;
  auto energy = [&](std::size_t k, std::size_t pos, std::size_t vel) {
    const auto& s = t.states[k];
    const double v = s[vel] + (pos == 0 ? p.gamma : -p.gamma) * s[pos];
    return v * v + big_omega_sq * s[pos] * s[pos];
  };
  const std::size_t last = t.size() - 1;
  CHECK_THAT(std::log(energy(last, 0, 2) / energy(0, 0, 2)) / 20.0, WithinAbs(-2.0 * p.gamma, 1e-6));
  CHECK_THAT(std::log(energy(last, 1, 3) / energy(0, 1, 3)) / 20.0, WithinAbs(2.0 * p.gamma, 1e-6));
  CHECK_FALSE(t.diverged);
}

TEST_CASE("divergence is detected and reported with an escape time") {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.t1 = 200.0;
  const Trajectory t = integrate(landau_field({0.5, 0.8, 0.6}), StateVector(RealVector{0.1, 0.2, 0.3, -0.1}), c);
  CHECK(t.diverged);
  CHECK(t.escape_time < 200.0);
  CHECK(norm_inf(std::span<const double>(t.back())) <= c.blowup_threshold);

  const VectorField blowup = [](std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; };
  const Trajectory r = integrate(blowup, StateVector(RealVector{1.0}), fixed(Scheme::rk4, 1e-3, 2.0));
  CHECK(r.diverged);
  CHECK_THAT(r.escape_time, WithinAbs(1.0, 1e-2));
}

TEST_CASE("adaptive step budget turns a stalled run into an error") {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.t1 = 1000.0;
  c.max_steps = 50;
  CHECK_THROWS_AS(integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c), ConvergenceError);
}

TEST_CASE("configuration and initial state validation") {
  IntegratorConfig c;
  c.step = -1.0;
  CHECK_THROWS_AS(integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c), ContractViolation);
  c = IntegratorConfig{};
  c.t1 = c.t0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = IntegratorConfig{};
  c.record_stride = 0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  CHECK_THROWS_AS(integrate(kOscillator, StateVector(RealVector{NAN, 0.0}), IntegratorConfig{}), ContractViolation);
  CHECK_THROWS_AS(parse_scheme("euler"), ContractViolation);
  CHECK(parse_scheme(to_string(Scheme::implicit_midpoint)) == Scheme::implicit_midpoint);
}

TEST_CASE("period estimates: Landau cyclotron motion and chaotic Duffing") {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  c.t1 = 60.0;
  c.output_interval = 0.01;
  const Trajectory t = integrate(landau_field({2.0, 0.8, 0.6}), StateVector(RealVector{0.1, 0.2, 0.3, -0.1}), c);
  for (std::size_t comp : {2u, 3u}) {
    const auto p = period_estimate(t, comp);
    REQUIRE(p);
    CHECK_THAT(*p, WithinRel(2.0 * std::numbers::pi / std::sqrt(3.0), 1e-4));
  }

  IntegratorConfig d = fixed(Scheme::rk4, 0.01, 2000.0);
  d.record_stride = 5;
  const Trajectory chaos = integrate(duffing_field({0.01, 1.5, 0.5, 1.0, 1.0}),
                                     StateVector(RealVector{0.01, 0.02, 0.03, 0.04}), d);
  CHECK_FALSE(period_estimate(chaos, 0).has_value());
}

TEST_CASE("Hermite interpolation reproduces the oscillator between samples") {
  IntegratorConfig c = fixed(Scheme::rk4, 0.05, 3.0);
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  for (double s : {0.01, 0.77, 1.234, 2.999}) CHECK_THAT(interpolate(t, s)[0], WithinAbs(std::cos(s), 1e-6));
  CHECK_THROWS_AS(interpolate(t, 3.5), ContractViolation);
}

TEST_CASE("CSV output has metadata comments and a column header") {
  IntegratorConfig c = fixed(Scheme::rk4, 0.5, 1.0);
  const Trajectory t = integrate(bateman_field({0.1, 1.0}), StateVector(RealVector{1.0, 0.0, 0.0, 0.0}), c);
  std::ostringstream os;
  write_csv(os, t, {"model=bateman"});
  const std::string out = os.str();
  CHECK(out.rfind("# model=bateman\nt,x1,x2,v1,v2\n0,1,0,0,0\n", 0) == 0);
}
