#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "lossgain/analysis.hpp"
#include "lossgain/registry.hpp"
#include "support.hpp"

using namespace lossgain;
using Catch::Matchers::WithinAbs;

namespace {

const VectorField kOscillator = [](std::span<const double> y, std::span<double> d) {
  d[0] = y[1];
  d[1] = -y[0];
};

// Linear stability of P1 worked out by hand from the Jacobian at the equilibrium.
// With r = sqrt(1 + 3 beta^2), the characteristic polynomial is
// l^4 + 2(a - 2 G^2) l^2 + (a^2 - bc) with a = r - 1, bc = -(r - 3)(r + 1)/3, a^2 - bc = 4 r (r - 2)/3.
// All roots are purely imaginary and distinct iff G^2 < a/2 and the discriminant is positive.
bool p1_stable_oracle(double gamma, double beta) {
  const double r = std::sqrt(1.0 + 3.0 * beta * beta);
  if (!(r > 2.0)) return false;
  const double a = r - 1.0;
  const double det = 4.0 * r * (r - 2.0) / 3.0;
  const double g2 = gamma * gamma;
  return g2 < a / 2.0 && g2 <= (a - std::sqrt(det)) / 2.0;
}

double p1_oracle_margin(double gamma, double beta) {
  const double r = std::sqrt(1.0 + 3.0 * beta * beta);
  const double a = r - 1.0;
  const double g2 = gamma * gamma;
  return std::min(std::abs(g2 - a / 2.0), std::abs(g2 - (a - std::sqrt(4.0 * r * (r - 2.0) / 3.0)) / 2.0));
}

}  // namespace

TEST_CASE("P0 eigenvalues are roots of the closed-form quartic") {
  for (double gamma : {0.0, 0.1, 0.4, 0.75}) {
    for (double beta : {0.2, 0.9, 1.3}) {
      const StabilityReport rep = linear_stability(duffing_field({gamma, beta, 0.5}), RealVector(4, 0.0));
      REQUIRE(rep.eigenvalues.size() == 4);
      for (const Complex& l : rep.eigenvalues) {
        const Complex l2 = l * l;
        const Complex p = l2 * l2 + (2.0 - 4.0 * gamma * gamma) * l2 + (1.0 - beta * beta);
        CHECK(std::abs(p) < 1e-8);
      }
    }
  }
}

TEST_CASE("closed-form stability regions at sample points") {
  const auto a = stability_predicate_duffing(0.2, 0.5);
  CHECK(a.p0_stable);
  CHECK_FALSE(a.p1_stable);
  const auto b = stability_predicate_duffing(0.3, 1.01);
  CHECK_FALSE(b.p0_stable);
  CHECK(b.p1_stable);
  const auto c = stability_predicate_duffing(0.8, 0.5);
  CHECK_FALSE(c.p0_stable);
  CHECK_FALSE(c.p1_stable);

  CHECK(linear_stability(duffing_field({0.2, 0.5, 1.0}), RealVector(4, 0.0)).classification == Stability::stable);
  CHECK(linear_stability(duffing_field({0.8, 0.5, 1.0}), RealVector(4, 0.0)).classification == Stability::unstable);
}

TEST_CASE("P0 region agrees with the numerical classification away from boundaries") {
  const RealVector gammas = linspace(-0.9, 0.9, 19);
  const RealVector betas = linspace(-1.4, 1.4, 15);
  const auto map = duffing_stability_map(gammas, betas, 1.0);
  for (const auto& pt : map) {
    if (pt.boundary_distance < 1e-3) continue;
    INFO("Gamma " << pt.gamma << " beta " << pt.beta);
    CHECK(pt.p0_agrees());
  }
}

TEST_CASE("P1 classification matches an independent characteristic-polynomial oracle") {
  const RealVector gammas = linspace(0.0, 0.6, 25);
  const RealVector betas = linspace(1.02, 2.5, 25);
  const auto map = duffing_stability_map(gammas, betas, 0.7);
  std::size_t checked = 0;
  for (const auto& pt : map) {
    REQUIRE(pt.p1_exists);
    if (p1_oracle_margin(pt.gamma, pt.beta) < 1e-4) continue;
    INFO("Gamma " << pt.gamma << " beta " << pt.beta);
    CHECK((pt.p1 == Stability::stable) == p1_stable_oracle(pt.gamma, pt.beta));
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("equilibrium search") {
  const auto seeds = position_seed_grid(2, 3.0, 7);
  CHECK(seeds.size() == 49);

  SECTION("Duffing pair finds P0 and P1+-") {
    const DuffingParams p{0.1, 1.5, 0.5};
    const EquilibriumSearch s = find_equilibria(duffing_field(p), seeds);
    const auto exact = duffing_equilibria(p);
    REQUIRE(s.equilibria.size() == 3);
    for (const auto& e : s.equilibria) {
      CHECK(e.residual < 1e-10);
      double best = 1e9;
      for (const auto& x : exact)
        if (x.exists) best = std::min(best, test_support::max_diff(e.point.xi, x.state));
      CHECK(best < 1e-8);
    }
  }
  SECTION("resonators have only the origin") {
    const EquilibriumSearch s = find_equilibria(resonator_field({0.1, 1.0, 0.5}), seeds);
    REQUIRE(s.equilibria.size() == 1);
    CHECK(norm_inf(std::span<const double>(s.equilibria[0].point.xi)) < 1e-12);
    CHECK_FALSE(s.equilibria[0].degenerate);
  }
  SECTION("free Landau motion has a continuum of rest points") {
    const EquilibriumSearch s = find_equilibria(landau_field({2.0, 0.8, 0.6}), seeds);
    REQUIRE_FALSE(s.equilibria.empty());
    for (const auto& e : s.equilibria) CHECK(e.degenerate);
  }
  CHECK_THROWS_AS(linear_stability(kOscillator, RealVector{1.0, 0.0}), ContractViolation);
}

TEST_CASE("Lyapunov exponents of a harmonic oscillator vanish") {
  LyapunovConfig c;
  c.total_time = 2000.0;
  const LyapunovResult r = lyapunov_spectrum(kOscillator, RealVector{1.0, 0.0}, c);
  REQUIRE(r.exponents.size() == 2);
  for (double l : r.exponents) CHECK(std::abs(l) < 5e-3);
  CHECK(std::abs(r.sum) < 1e-10);
  CHECK_FALSE(r.diverged);
}

TEST_CASE("Lyapunov exponents of a linear saddle match its eigenvalues") {
  const VectorField saddle = [](std::span<const double> y, std::span<double> d) {
    d[0] = 0.3 * y[0];
    d[1] = -0.7 * y[1];
  };
  LyapunovConfig c;
  c.total_time = 20.0;
  c.renorm_dt = 0.1;
  c.blowup_threshold = 1e12;
  const LyapunovResult r = lyapunov_spectrum(saddle, RealVector{1e-3, 1.0}, c);
  REQUIRE(r.exponents.size() == 2);
  CHECK_THAT(r.exponents[0], WithinAbs(0.3, 1e-6));
  CHECK_THAT(r.exponents[1], WithinAbs(-0.7, 1e-6));
}

TEST_CASE("Poincare section of circular motion") {
  IntegratorConfig c;
  c.step = 0.01;
  c.t1 = 20.0;
  const Trajectory t = integrate(kOscillator, StateVector(RealVector{1.0, 0.0}), c);
  // v = -sin t crosses zero upward at t = pi, 3 pi, 5 pi, where x = -1.
  const auto hits = poincare_section(t, {1, 0.0, CrossingDirection::positive});
  REQUIRE(hits.size() == 3);
  for (std::size_t k = 0; k < hits.size(); ++k) {
    CHECK_THAT(hits[k].t, WithinAbs((2.0 * static_cast<double>(k) + 1.0) * std::numbers::pi, 1e-8));
    CHECK_THAT(hits[k].xi[0], WithinAbs(-1.0, 1e-8));
  }
  CHECK(poincare_section(t, {1, 0.0, CrossingDirection::both}).size() == 6);
  CHECK_THROWS_AS(poincare_section(t, {5, 0.0, CrossingDirection::positive}), ContractViolation);
}

TEST_CASE("spectral diagnostics of a cosine") {
  const double f0 = 0.3;
  Trajectory t;
  const double dt = 0.05;
  for (std::size_t i = 0; i < 4000; ++i) {
    const double s = dt * static_cast<double>(i);
    t.push(s, {std::cos(2.0 * std::numbers::pi * f0 * s)}, {0.0});
  }
  const SpectralResult r = spectral_diagnostics(t, 0, 200);
  const auto peak = std::max_element(r.power.begin(), r.power.end()) - r.power.begin();
  CHECK_THAT(r.frequencies[static_cast<std::size_t>(peak)], WithinAbs(f0, 1.0 / (4000.0 * dt)));
  CHECK_THAT(r.autocorrelation[0], WithinAbs(1.0, 1e-12));
  // Half a period later the signal is anticorrelated.
  CHECK(r.autocorrelation[static_cast<std::size_t>(std::lround(0.5 / f0 / dt))] < -0.95);
}

TEST_CASE("Landau reflection symmetry") {
  CHECK(landau_symmetry_check(LandauParams{2.0, 0.8, 0.6}));
  CHECK(landau_symmetry_check(LandauParams{0.3, 0.8, 0.6}));
  CHECK(landau_symmetry_check(LandauParams{1.5, 0.0, 0.0}));
  // A potential depending on x1 alone is not invariant under x1 -> x2.
  const auto with_potential = [](double b) {
    const LandauParams p{b, 0.8, 0.6};
    const SystemSpec base = make_landau(p);
    const Polynomial x1 = Polynomial::variable(2, 0);
    return system_field(SystemSpec(base.mass_matrix(), base.gauge_matrix(), base.field_map(),
                                   Potential::polynomial(0.4 * (x1 * x1)), "landau_broken"));
  };
  CHECK_FALSE(landau_symmetry_check(with_potential(2.0), with_potential(-2.0)));
}

TEST_CASE("PT scan finds the mirror angles of linear pairs and none for the Duffing pair") {
  for (const VectorField& f : {bateman_field({0.2, 1.0}), resonator_field({0.2, 1.0, 0.4})}) {
    const RealVector angles = pt_scan(f);
    REQUIRE(angles.size() == 2);
    CHECK_THAT(angles[0], WithinAbs(std::numbers::pi / 2.0, 1e-6));
    CHECK_THAT(angles[1], WithinAbs(3.0 * std::numbers::pi / 2.0, 1e-6));
  }
  CHECK(pt_scan(duffing_field({0.2, 0.5, 1.0})).empty());
}

TEST_CASE("parameter scans") {
  ScanConfig cfg;
  cfg.initial_state = {0.1, 0.2, 0.0, 0.0};
  cfg.lyapunov.total_time = 400.0;

  SECTION("conservative linear coupling has no positive exponent") {
    const RealVector grid = linspace(0.1, 0.5, 3);
    const ScanResult r = bifurcation_scan([](double e) { return resonator_field({0.0, 1.0, e}); }, "epsilon", grid, cfg, 2);
    REQUIRE(r.points.size() == 3);
    for (const auto& p : r.points) {
      CHECK(p.bounded);
      CHECK(p.largest_exponent < cfg.onset_threshold);
      CHECK_FALSE(p.samples.empty());
    }
    CHECK_FALSE(r.onset.has_value());
  }
  SECTION("Landau motion escapes when B leaves Region I") {
    const RealVector grid{0.5, 2.0};
    cfg.initial_state = {0.1, 0.2, 0.3, -0.1};
    const ScanResult r = bifurcation_scan([](double b) { return landau_field({b, 0.8, 0.6}); }, "B", grid, cfg, 1);
    CHECK_FALSE(r.points[0].bounded);
    CHECK(r.points[1].bounded);
  }
  SECTION("grids must be increasing") {
    const RealVector bad{0.2, 0.1};
    CHECK_THROWS_AS(bifurcation_scan([](double e) { return resonator_field({0.0, 1.0, e}); }, "epsilon", bad, cfg),
                    ContractViolation);
  }
}

TEST_CASE("worker count does not change scan results") {
  ScanConfig cfg;
  cfg.initial_state = {0.1, 0.2, 0.03, 0.04};
  cfg.lyapunov.total_time = 100.0;
  const RealVector grid = linspace(0.8, 1.2, 4);
  const FieldFamily fam = [](double beta) { return duffing_field({0.01, beta, 0.5}); };
  const ScanResult one = bifurcation_scan(fam, "beta", grid, cfg, 1);
  const ScanResult three = bifurcation_scan(fam, "beta", grid, cfg, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(one.points[i].largest_exponent == three.points[i].largest_exponent);
    CHECK(one.points[i].samples == three.points[i].samples);
  }
}

TEST_CASE("conserved quantities drift below 1e-8") {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  c.t1 = 50.0;
  c.output_interval = 0.5;

  const TranslationalCubicParams tp{2, 0.3, 1.0, 1.0};
  const Trajectory tt = integrate(system_field(make_translational_cubic(tp)),
                                  StateVector(RealVector{0.2, -0.1, 0.3, 0.05, 0.1, 0.0, -0.2, 0.3}), c);
  for (std::size_t pair = 0; pair < tp.m; ++pair)
    CHECK(conserved_drift(tt, [&](std::span<const double> s) { return translational_pi(tp, s, pair); }) <= 1e-8);

  const BatemanParams bp{0.1, 1.0};
  const Trajectory bt = integrate(bateman_field(bp), StateVector(RealVector{0.5, -0.2, 0.1, 0.3}), c);
  CHECK(conserved_drift(bt, [&](std::span<const double> s) { return bateman_lb(bp, s); }) <= 1e-8);

  // The drift is reported relative to the initial magnitude.
  Trajectory grow;
  grow.push(0.0, {2.0}, {0.0});
  grow.push(1.0, {3.0}, {0.0});
  CHECK_THAT(conserved_drift(grow, [](std::span<const double> s) { return s[0]; }), WithinAbs(0.5, 1e-15));
}
