#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lossgain/analysis.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/models.hpp"
#include "lossgain/registry.hpp"
#include "lossgain/system_model.hpp"
#include "lossgain/transforms.hpp"

namespace lossgain::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

// Tolerances, pinned here and nowhere else.
inline constexpr double kLyapOuterTol = 0.02;
inline constexpr double kLyapMiddleTol = 0.01;
inline constexpr double kLyapSumTol = 5e-3;
inline constexpr double kOnsetLow = 1.00;
inline constexpr double kOnsetHigh = 1.10;
inline constexpr double kStabilityMargin = 0.02;
inline constexpr double kCnSupTol = 1e-6;
inline constexpr double kPiDriftTol = 1e-8;
inline constexpr double kLandauPeriodRelTol = 1e-4;
inline constexpr double kLandauDivergenceTime = 200.0;
inline constexpr double kOligomerMatchTol = 1e-8;
inline constexpr double kOligomerInvariantTol = 1e-10;
inline constexpr double kPtThetaTol = 1e-9;
inline constexpr double kEquilibriumTol = 1e-8;
inline constexpr double kBalanceTol = 1e-10;
inline constexpr double kHiddenDiagonalTol = 1e-12;
inline constexpr double kRoundTripTol = 1e-6;
inline constexpr double kHamiltonianDriftTol = 1e-6;
inline constexpr double kRhsEqualityTol = 1e-12;

inline const RealVector& lyapunov_state() {
  static const RealVector s{0.01, 0.02, 0.03, 0.04};
  return s;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string fmt_vec(const RealVector& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + ")";
}

inline LyapunovResult duffing_lyapunov(double gamma) {
  return lyapunov_spectrum(duffing_field({gamma, 1.5, 0.5, 1.0, 1.0}), lyapunov_state(), LyapunovConfig{});
}

inline bool lyapunov_matches(const LyapunovResult& r, const RealVector& ref, std::string& detail) {
  const bool ok = std::abs(r.exponents[0] - ref[0]) <= kLyapOuterTol &&
                  std::abs(r.exponents[3] - ref[3]) <= kLyapOuterTol &&
                  std::abs(r.exponents[1] - ref[1]) <= kLyapMiddleTol &&
                  std::abs(r.exponents[2] - ref[2]) <= kLyapMiddleTol && std::abs(r.sum) <= kLyapSumTol && !r.diverged;
  detail = "exponents " + fmt_vec(r.exponents) + " vs " + fmt_vec(ref) + ", sum " + fmt(r.sum);
  return ok;
}

inline CriterionResult criterion_1(const LyapunovResult& r) {
  CriterionResult c{1, "Lyapunov spectrum, Duffing Gamma=0.01", false, {}};
  c.passed = lyapunov_matches(r, {0.13248, 0.0015691, -0.0016145, -0.13244}, c.detail);
  return c;
}

inline CriterionResult criterion_2(const LyapunovResult& r0, const LyapunovResult& r001) {
  CriterionResult c{2, "Lyapunov spectrum, Duffing Gamma=0", false, {}};
  const bool match = lyapunov_matches(r0, {0.22685, 0.00431, -0.00431, -0.22685}, c.detail);
  const bool ordered = r0.exponents[0] > r001.exponents[0];
  c.detail += ordered ? "; larger than the Gamma=0.01 exponent" : "; NOT larger than the Gamma=0.01 exponent";
  c.passed = match && ordered;
  return c;
}

inline CriterionResult criterion_3(unsigned workers) {
  CriterionResult c{3, "bifurcation onset in beta", false, {}};
  ScanConfig cfg;
  cfg.initial_state = lyapunov_state();
  const RealVector grid = linspace(0.8, 1.3, 50);
  const auto family = [](double beta) { return duffing_field({0.01, beta, 0.5, 1.0, 1.0}); };
  const ScanResult r = bifurcation_scan(family, "beta", grid, cfg, workers);
  c.passed = r.onset && *r.onset >= kOnsetLow && *r.onset <= kOnsetHigh;
  c.detail = r.onset ? "onset beta = " + fmt(*r.onset) : "no onset found";
  return c;
}

inline CriterionResult criterion_4() {
  CriterionResult c{4, "stability regions of P0 and P1", false, {}};
  RealVector gs, bs;
  for (int i = 0; i < 30; ++i) {
    gs.push_back(-0.7 + 1.4 * (i + 0.5) / 30.0);
    bs.push_back(1.4 * (i + 0.5) / 30.0);
  }
  const auto map = duffing_stability_map(gs, bs, 1.0);
  std::size_t used = 0, p0_bad = 0, p1_bad = 0;
  for (const auto& p : map) {
    if (p.boundary_distance < kStabilityMargin) continue;
    ++used;
    p0_bad += !p.p0_agrees();
    p1_bad += !p.p1_agrees();
  }
  c.passed = used > 0 && p0_bad == 0 && p1_bad == 0;
  c.detail = std::to_string(used) + " points; P0 disagreements " + std::to_string(p0_bad) + ", P1 disagreements " +
             std::to_string(p1_bad);
  return c;
}

inline CriterionResult criterion_5() {
  CriterionResult c{5, "translational cubic against A cn(Omega t, k)", false, {}};
  const TranslationalCubicParams p{1, 0.3, 1.0, 1.0};
  const double amp = 0.5;
  const double period = cubic_cn_solution(amp, p, 0.0).period;
  IntegratorConfig cfg;
  cfg.scheme = Scheme::adaptive;
  cfg.abs_tol = cfg.rel_tol = 1e-12;
  cfg.t1 = 5.0 * period;
  cfg.output_interval = period / 200.0;
  const Trajectory traj = integrate(system_field(make_translational_cubic(p)), StateVector(cubic_initial_state(p, amp), 0.0), cfg);
  double sup = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    sup = std::max(sup, std::abs(pair_coordinates(traj.states[i], 0).z_minus - cubic_cn_solution(amp, p, traj.times[i]).z1));
  const double drift = conserved_drift(traj, [&](std::span<const double> s) { return translational_pi(p, s, 0); });
  c.passed = sup <= kCnSupTol && drift <= kPiDriftTol && !traj.diverged;
  c.detail = "sup error " + fmt(sup) + " over 5 periods, Pi_1 drift " + fmt(drift);
  return c;
}

inline CriterionResult criterion_6() {
  CriterionResult c{6, "Landau reduced cyclotron period", false, {}};
  IntegratorConfig cfg;
  cfg.scheme = Scheme::adaptive;
  cfg.abs_tol = cfg.rel_tol = 1e-12;
  cfg.t1 = 60.0;
  cfg.output_interval = 0.01;
  const RealVector s0{0.1, 0.2, 0.3, -0.1};
  const LandauParams p1{2.0, 0.8, 0.6};
  const Trajectory t1 = integrate(landau_field(p1), StateVector(s0, 0.0), cfg);
  const auto period = period_estimate(t1, 2);
  const double expected = 2.0 * std::numbers::pi / std::sqrt(3.0);
  const bool period_ok = period && std::abs(*period - expected) / expected <= kLandauPeriodRelTol;
  cfg.t1 = kLandauDivergenceTime;
  const Trajectory t2 = integrate(landau_field({0.5, 0.8, 0.6}), StateVector(s0, 0.0), cfg);
  const bool diverged = t2.diverged && t2.escape_time < kLandauDivergenceTime;
  c.passed = period_ok && diverged;
  c.detail = "period " + (period ? fmt(*period) : std::string("none")) + " vs " + fmt(expected) +
             "; Region II " + (diverged ? "diverged at t=" + fmt(t2.escape_time) : std::string("did not diverge"));
  return c;
}

inline CriterionResult criterion_7() {
  CriterionResult c{7, "oligomer exact solution", false, {}};
  OligomerParams p;  // |beta|=1, Gamma=0.6, alpha0=1, alpha=0.6i, delta=1, n=1
  const ComplexVector w{Complex(0.6, 0.1), Complex(-0.2, 0.3)};
  const OligomerSolution sol = make_oligomer(p, w);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::adaptive;
  cfg.abs_tol = cfg.rel_tol = 1e-13;
  cfg.t1 = 50.0;
  cfg.output_interval = 0.25;
  const Trajectory traj = integrate(make_oligomer_field(p), StateVector(to_interleaved(w), 0.0), cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const RealVector ex = to_interleaved(sol.evaluate(traj.times[i]));
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(ex[k] - traj.states[i][k]));
  }
  const ComplexMatrix m = oligomer_m(p);
  const double metric_drift =
      conserved_drift(traj, [&](std::span<const double> s) { return quadratic_form(m, from_interleaved(s)).real(); });

  OligomerParams p0 = p;
  p0.Gamma = 0.0;
  const Trajectory t0 = integrate(make_oligomer_field(p0), StateVector(to_interleaved(w), 0.0), cfg);
  const double norm_drift = conserved_drift(t0, [](std::span<const double> s) {
    double n = 0.0;
    for (double v : s) n += v * v;
    return n;
  });
  c.passed = worst <= kOligomerMatchTol && metric_drift <= kOligomerInvariantTol && norm_drift <= kOligomerInvariantTol;
  c.detail = "max |exact - numerical| " + fmt(worst) + ", Phi^dagger M Phi drift " + fmt(metric_drift) +
             ", Gamma=0 norm drift " + fmt(norm_drift);
  return c;
}

inline CriterionResult criterion_8() {
  CriterionResult c{8, "PT scan", false, {}};
  const RealVector bateman = pt_scan(bateman_field({0.1, 1.0}));
  const RealVector duffing = pt_scan(duffing_field({0.1, 1.5, 0.5, 1.0, 1.0}));
  const bool bateman_ok = bateman.size() == 2 && std::abs(bateman[0] - std::numbers::pi / 2.0) <= kPtThetaTol &&
                          std::abs(bateman[1] - 3.0 * std::numbers::pi / 2.0) <= kPtThetaTol;
  c.passed = bateman_ok && duffing.empty();
  c.detail = "Bateman " + fmt_vec(bateman) + ", Duffing " + std::to_string(duffing.size()) + " angles";
  return c;
}

inline CriterionResult criterion_9(std::uint64_t seed = 0) {
  CriterionResult c{9, "equilibrium closed forms", false, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ug(-0.5, 0.5), ub(1.05, 3.0), ua(0.2, 2.0);
  const auto seeds = position_seed_grid(2, 3.0, 9);
  double worst = 0.0;
  std::size_t mismatched = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const DuffingParams p{ug(rng), ub(rng), ua(rng), 1.0, 1.0};
    const auto found = find_equilibria(duffing_field(p), seeds);
    std::size_t expected = 0;
    for (const auto& e : duffing_equilibria(p)) {
      if (!e.exists) continue;
      ++expected;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : found.equilibria) {
        double d = 0.0;
        for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(f.point.xi[i] - e.state[i]));
        best = std::min(best, d);
      }
      worst = std::max(worst, best);
    }
    if (found.equilibria.size() != expected) ++mismatched;
  }
  c.passed = worst <= kEquilibriumTol && mismatched == 0;
  c.detail = "worst distance " + fmt(worst) + ", trials with extra or missing points " + std::to_string(mismatched);
  return c;
}

/// Specs of every zoo model with a Hamiltonian representation, at parameters with bounded motion up to t=100.
inline std::vector<std::pair<SystemSpec, RealVector>> hamiltonian_zoo() {
  std::vector<std::pair<SystemSpec, RealVector>> out;
  out.emplace_back(make_bateman({0.1, 1.0}), RealVector{1.0, 0.5, 0.0, 0.2});
  out.emplace_back(make_resonators({0.1, 1.0, 0.5}), RealVector{1.0, 0.5, 0.0, 0.2});
  out.emplace_back(make_vdp_duffing({0.1, 0.5, 0.3, 1.0, 1.0, 1.0, 0.2, 0.1, 0.05}), RealVector{0.1, 0.2, 0.0, 0.0});
  out.emplace_back(make_duffing_triplet({}), RealVector{0.1, 0.05, 0.1, 0.0, 0.0, 0.0});
  out.emplace_back(make_duffing_hamiltonian({0.01, 1.5, 0.5, 1.0, 1.0}), lyapunov_state());
  out.emplace_back(make_landau({2.0, 0.8, 0.6}), RealVector{0.1, 0.2, 0.3, -0.1});
  const TranslationalCubicParams tp{2, 0.3, 1.0, 1.0};
  RealVector ts = cubic_initial_state(tp, 0.5);
  set_pair_coordinates(ts, 1, {0.1, 0.3, 0.6, 0.0});
  out.emplace_back(make_translational_cubic(tp), ts);
  const RotationalQuarticParams rp{1, 0.1, 1.0, 1.0};
  RealVector rs(4, 0.0);
  set_pair_coordinates(rs, 0, {0.5, 0.0, 0.0, 0.05});
  out.emplace_back(make_rotational_quartic(rp), rs);
  return out;
}

inline double max_diff(const RealVector& a, const RealVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline CriterionResult criterion_10() {
  CriterionResult c{10, "property suites", false, {}};
  const auto zoo = hamiltonian_zoo();
  const auto samples = random_states(20, 6, 1.0, 7);
  bool balance_ok = true, diagonal_ok = true, roundtrip_ok = true, drift_ok = true;
  double worst_trace = 0.0, worst_diag = 0.0, worst_roundtrip = 0.0, worst_drift = 0.0;
  std::string failures;

  IntegratorConfig cfg;
  cfg.scheme = Scheme::adaptive;
  cfg.abs_tol = cfg.rel_tol = 1e-12;

  for (const auto& [spec, s0] : zoo) {
    const std::size_t n = spec.n();
    std::vector<RealVector> xs;
    for (const auto& s : samples) xs.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    const BalanceReport b = balance_check(spec, xs);
    worst_trace = std::max(worst_trace, b.max_abs_trace);
    if (!b.balanced || b.max_abs_trace > kBalanceTol) {
      balance_ok = false;
      failures += " balance:" + spec.label();
    }

    const TransformReport rep = hide_loss_gain(spec);
    for (const auto& x : xs) {
      const RealMatrix h = hidden_coupling(rep, x);
      for (std::size_t i = 0; i < n; ++i) worst_diag = std::max(worst_diag, std::abs(h(i, i)));
    }

    cfg.t1 = 10.0;
    cfg.output_interval = 1.0;
    const Trajectory orig = integrate(system_field(spec), StateVector(s0, 0.0), cfg);
    const Trajectory scaled = integrate(canonical_scale_dynamics(spec, rep), StateVector(to_scaled_state(rep, s0), 0.0), cfg);
    for (std::size_t i = 0; i < std::min(orig.size(), scaled.size()); ++i)
      worst_roundtrip = std::max(worst_roundtrip, max_diff(orig.states[i], to_original_state(rep, scaled.states[i])));

    cfg.t1 = 100.0;
    const Trajectory long_run = integrate(system_field(spec), StateVector(s0, 0.0), cfg);
    const double d = conserved_drift(long_run, [&spec](std::span<const double> s) {
      return hamiltonian_value(spec, StateVector(RealVector(s.begin(), s.end()), 0.0));
    });
    worst_drift = std::max(worst_drift, d);
    if (d > kHamiltonianDriftTol || long_run.diverged) {
      drift_ok = false;
      failures += " drift:" + spec.label();
    }
  }
  diagonal_ok = worst_diag <= kHiddenDiagonalTol;
  roundtrip_ok = worst_roundtrip <= kRoundTripTol;

  // Reduction chains by right-hand-side equality at random states.
  const auto states = random_states(50, 4, 1.0, 11);
  double worst_reduction = 0.0;
  const double g = 0.23, eps = 0.4, w = 1.3;
  VdpDuffingParams vp;
  vp.gamma = g;
  vp.beta = eps;
  vp.omega = w;
  const VectorField vdp = system_field(make_vdp_duffing(vp));
  const VectorField res_neg = resonator_field({-g, w, eps});
  const VectorField res_zero = system_field(make_resonators({g, w, 0.0}));
  const VectorField bat = bateman_field({g, w});
  const VectorField rot = system_field(make_rotational_quartic({1, g, w, 0.0}));
  const VectorField bat_neg = bateman_field({-g, w});
  const VectorField dimer = make_dimer({g, 0.7, 0.0});
  OligomerParams lin;
  lin.Gamma = -g;
  lin.beta = Complex(-0.7, 0.0);
  lin.delta = 0.0;
  const VectorField oligo = make_oligomer_field(lin);
  for (const auto& s : states) {
    worst_reduction = std::max(worst_reduction, max_diff(evaluate(vdp, s), evaluate(res_neg, s)));
    worst_reduction = std::max(worst_reduction, max_diff(evaluate(res_zero, s), evaluate(bat, s)));
    worst_reduction = std::max(worst_reduction, max_diff(evaluate(rot, s), evaluate(bat_neg, s)));
    worst_reduction = std::max(worst_reduction, max_diff(evaluate(dimer, s), evaluate(oligo, s)));
  }
  const bool reduction_ok = worst_reduction <= kRhsEqualityTol;

  c.passed = balance_ok && diagonal_ok && roundtrip_ok && drift_ok && reduction_ok;
  c.detail = "trace " + fmt(worst_trace) + ", hidden diagonal " + fmt(worst_diag) + ", round trip " +
             fmt(worst_roundtrip) + ", H drift " + fmt(worst_drift) + ", reductions " + fmt(worst_reduction) +
             (failures.empty() ? "" : "; failing:" + failures);
  return c;
}

inline CriterionResult criterion_11() {
  CriterionResult c{11, "non-Hamiltonian Duffing boundedness and period", false, {}};
  IntegratorConfig cfg;
  cfg.scheme = Scheme::adaptive;
  cfg.t1 = 500.0;
  cfg.output_interval = 0.05;
  const Trajectory traj =
      integrate(make_duffing_nonhamiltonian({0.1, 0.5, 0.5, 1.0, 1.0}), StateVector(lyapunov_state(), 0.0), cfg);
  double sup = 0.0;
  for (const auto& s : traj.states) sup = std::max(sup, norm_inf(s));
  const bool bounded = !traj.diverged && sup < 1.0;
  const auto px = period_estimate(traj, 0);
  const auto py = period_estimate(traj, 1);
  c.passed = bounded && px.has_value();
  c.detail = "sup |state| " + fmt(sup) + ", period of x " + (px ? fmt(*px) : std::string("none (irregular)")) +
             ", period of y " + (py ? fmt(*py) : std::string("none (irregular)"));
  return c;
}

/// Runs every criterion in order, calling `report` after each one.
inline std::vector<CriterionResult> run_all(unsigned workers, const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> out;
  auto push = [&](CriterionResult r) {
    if (report) report(r);
    out.push_back(std::move(r));
  };
  const LyapunovResult r001 = duffing_lyapunov(0.01);
  push(criterion_1(r001));
  push(criterion_2(duffing_lyapunov(0.0), r001));
  push(criterion_3(workers));
  push(criterion_4());
  push(criterion_5());
  push(criterion_6());
  push(criterion_7());
  push(criterion_8());
  push(criterion_9());
  push(criterion_10());
  push(criterion_11());
  return out;
}

}  // namespace lossgain::acceptance
