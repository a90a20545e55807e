#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/models.hpp"
#include "lossgain/transforms.hpp"
#include "support.hpp"

using namespace lossgain;
using Catch::Matchers::WithinAbs;

namespace {

const VdpDuffingParams kVdpPseudo{0.3, 0.5, 0.2, 1.1, 1.0, 1.0, 0.5, 0.5, 0.3};     // alpha^2 < 1
const VdpDuffingParams kVdpEuclid{0.3, 1.5, 0.2, 1.1, 1.0, 1.0, 0.5, 0.5, 0.3};     // alpha^2 > 1

IntegratorConfig tight(double t1) {
  IntegratorConfig c;
  c.scheme = Scheme::adaptive;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  c.t1 = t1;
  c.output_interval = 0.25;
  return c;
}

}  // namespace

TEST_CASE("Bateman family: rotation is (sigma1 + sigma3)/sqrt2 and self-damping disappears") {
  const SystemSpec s = make_bateman({0.25, 1.0});
  const TransformReport r = hide_loss_gain(s);
  const RealMatrix expected = (pauli::sigma1() + pauli::sigma3()) * (1.0 / std::numbers::sqrt2);
  CHECK(max_abs(r.rotation - expected) < 1e-14);
  CHECK(r.region == 2);
  const RealVector x{0.3, -0.8};
  const RealMatrix h = hidden_coupling(r, x);
  CHECK(h(0, 0) == 0.0);
  CHECK(h(1, 1) == 0.0);
  CHECK(std::abs(h(0, 1)) > 0.1);
}

TEST_CASE("Van der Pol-Duffing hidden coupling entries") {
  for (const auto& p : {kVdpPseudo, kVdpEuclid}) {
    const SystemSpec s = make_vdp_duffing(p);
    const TransformReport r = hide_loss_gain(s);
    std::mt19937_64 rng(31);
    for (int k = 0; k < 20; ++k) {
      const RealVector x = test_support::random_vector(2, rng, 1.5);
      const double q = vdp_q(p, x[0], x[1]);
      const double a2 = p.alpha * p.alpha;
      const RealMatrix h = hidden_coupling(r, x);
      CHECK_THAT(h(0, 0), WithinAbs(0.0, 1e-14));
      CHECK_THAT(h(1, 1), WithinAbs(0.0, 1e-14));
      CHECK_THAT(h(0, 1), WithinAbs(p.gamma * q * (1.0 + a2) / 2.0, 1e-12));
      CHECK_THAT(h(1, 0), WithinAbs(p.gamma * q * (1.0 - a2) / 2.0, 1e-12));
    }
  }
}

TEST_CASE("hidden coupling has zero diagonal for arbitrary specs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    RealMatrix mass = test_support::random_symmetric(n, rng);
    for (std::size_t i = 0; i < n; ++i) mass(i, i) += (i % 2 ? -2.0 : 2.0);
    RealMatrix a = test_support::random_matrix(n, n, rng);
    a = (a - a.transpose()) * 0.5;
    std::vector<Polynomial> f;
    for (std::size_t i = 0; i < n; ++i) {
      Polynomial c = Polynomial::variable(n, i) + 0.3 * Polynomial::variable(n, (i + 1) % n).pow(2);
      f.push_back(c);
    }
    const SystemSpec s(mass, a, FieldMap::polynomial(f), Potential::zero(n));
    const TransformReport r = hide_loss_gain(s);
    const RealVector x = test_support::random_vector(n, rng);
    const RealMatrix h = hidden_coupling(r, x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(h(i, i)) < 1e-13);
    // O^T M O is the diagonal M_D = S eta S.
    CHECK(max_abs(r.rotation.transpose() * mass * r.rotation - r.mass_diagonal) < 1e-12);
    CHECK(max_abs(r.scale * r.eta * r.scale - r.mass_diagonal) < 1e-12);
  }
}

TEST_CASE("region classification and metric signature") {
  const TransformReport e = hide_loss_gain(make_vdp_duffing(kVdpEuclid));
  CHECK(e.region == 1);
  CHECK(max_abs(e.eta - RealMatrix::identity(2)) == 0.0);

  const TransformReport p = hide_loss_gain(make_vdp_duffing(kVdpPseudo));
  CHECK(p.region == 2);
  CHECK(max_abs(p.eta - pauli::sigma3()) == 0.0);

  const SystemSpec neg(RealMatrix::identity(3) * -1.0, RealMatrix(3, 3), FieldMap::identity(3), Potential::zero(3));
  const RegionInfo info = classify_region(neg);
  CHECK(info.a == 4);
  CHECK(max_abs(info.eta + RealMatrix::identity(3)) == 0.0);
}

TEST_CASE("no gauge field: the transform is a pure rotation of a conservative system") {
  const SystemSpec s(pauli::sigma1() * 0.5, RealMatrix(2, 2), FieldMap::identity(2),
                     Potential::polynomial(Polynomial::variable(2, 0) * Polynomial::variable(2, 1)));
  const TransformReport r = hide_loss_gain(s);
  const RealVector x{0.7, 0.1};
  CHECK(max_abs(r.r_rotated(x)) == 0.0);
  CHECK(max_abs(r.r_scaled(x)) == 0.0);
}

TEST_CASE("Van der Pol-Duffing transformed potential matches its closed form") {
  for (const auto& p : {kVdpPseudo, kVdpEuclid}) {
    const SystemSpec s = make_vdp_duffing(p);
    const TransformReport r = hide_loss_gain(s);
    const auto v = transformed_potential(s, r);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      const RealVector big_x = test_support::random_vector(2, rng, 1.5);
      CHECK_THAT(v(big_x), WithinAbs(vdp_transformed_potential(p, big_x[0], big_x[1]), 1e-12));
    }
  }
}

TEST_CASE("coordinate round trip is the identity") {
  const TransformReport r = hide_loss_gain(make_vdp_duffing(kVdpPseudo));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const RealVector xi = test_support::random_vector(4, rng, 3.0);
    CHECK(test_support::max_diff(to_original_state(r, to_scaled_state(r, xi)), xi) < 1e-12);
  }
  CHECK_THROWS_AS(to_scaled_state(r, RealVector(3, 0.0)), ContractViolation);
}

TEST_CASE("trajectories agree in original, rotated and scaled coordinates") {
  for (const auto& p : {kVdpPseudo, kVdpEuclid}) {
    const SystemSpec s = make_vdp_duffing(p);
    const TransformReport r = hide_loss_gain(s);
    const RealVector xi0{0.2, -0.1, 0.05, 0.1};
    // Beyond t ~ 5 the cubic field makes the lossy mode stiff for an explicit scheme.
    const IntegratorConfig cfg = tight(4.0);
    const Trajectory orig = integrate(system_field(s), StateVector(xi0), cfg);
    const Trajectory scaled = integrate(canonical_scale_dynamics(s, r), StateVector(to_scaled_state(r, xi0)), cfg);
    RealVector rot0 = r.rotation.transpose() * std::span<const double>(xi0).subspan(0, 2);
    const RealVector rv = r.rotation.transpose() * std::span<const double>(xi0).subspan(2, 2);
    rot0.insert(rot0.end(), rv.begin(), rv.end());
    const Trajectory rotated = integrate(rotated_dynamics(s, r), StateVector(rot0), cfg);
    REQUIRE(orig.size() == scaled.size());
    REQUIRE(orig.size() == rotated.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
      worst = std::max(worst, test_support::max_diff(to_original_state(r, scaled.states[i]), orig.states[i]));
      const RealVector xr = r.rotation * std::span<const double>(rotated.states[i]).subspan(0, 2);
      worst = std::max(worst, test_support::max_diff(xr, std::span<const double>(orig.states[i]).subspan(0, 2)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("gamma = 0: transformed system conserves the Hamiltonian") {
  VdpDuffingParams p = kVdpPseudo;
  p.gamma = 0.0;
  const SystemSpec s = make_vdp_duffing(p);
  const TransformReport r = hide_loss_gain(s);
  const RealVector xi0{0.2, -0.1, 0.05, 0.1};
  const Trajectory t = integrate(canonical_scale_dynamics(s, r), StateVector(to_scaled_state(r, xi0)), tight(50.0));
  const double h0 = hamiltonian_value(s, StateVector(xi0));
  double drift = 0.0;
  for (const auto& st : t.states) drift = std::max(drift, std::abs(hamiltonian_value(s, StateVector(to_original_state(r, st))) - h0));
  CHECK(drift < 1e-8);
}

TEST_CASE("mass matrix on a region boundary is rejected") {
  // alpha^2 = 1 makes M = sigma1 + I singular, which SystemSpec already refuses.
  CHECK_THROWS_AS(make_vdp_duffing({.alpha = 1.0}), SingularMatrixError);
}
