#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/models.hpp"
#include "lossgain/numeric/linear_solve.hpp"
#include "lossgain/numeric/nonsym_eig.hpp"

namespace lossgain {

// ---------------------------------------------------------------------------
// Equilibria and linear stability

/// Real parts above this are unstable; eigenvalues with modulus below it make the point marginal.
inline constexpr double kStabilityThreshold = 1e-8;

enum class Stability { stable, unstable, marginal };

inline std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

struct StabilityReport {
  ComplexVector eigenvalues;  ///< sorted by descending real part
  Stability classification = Stability::stable;
  double max_real = 0.0;
};

/**
 * @brief Linearisation of y' = f(y) at an equilibrium.
 *
 * Unstable if any real part exceeds the threshold. Otherwise a zero eigenvalue
 * leaves the linear test inconclusive and the point is marginal.
 */
inline StabilityReport linear_stability(const VectorField& f, std::span<const double> point) {
  const RealVector r = evaluate(f, point);
  if (norm_inf(r) > 1e-8)
    throw ContractViolation("linear_stability: point is not an equilibrium (|f| = " + std::to_string(norm_inf(r)) + ")");
  StabilityReport rep;
  rep.eigenvalues = eigenvalues(fd_jacobian(f, point));
  rep.max_real = -std::numeric_limits<double>::infinity();
  bool zero_mode = false;
  for (const auto& l : rep.eigenvalues) {
    rep.max_real = std::max(rep.max_real, l.real());
    if (std::abs(l) <= kStabilityThreshold) zero_mode = true;
  }
  if (rep.max_real > kStabilityThreshold) rep.classification = Stability::unstable;
  else if (zero_mode) rep.classification = Stability::marginal;
  else rep.classification = Stability::stable;
  return rep;
}

struct EquilibriumReport {
  StateVector point;
  ComplexVector jacobian_eigenvalues;
  Stability classification = Stability::stable;
  double residual = 0.0;
  bool degenerate = false;  ///< singular Jacobian: the point belongs to a continuous family
};

struct EquilibriumSearch {
  std::vector<EquilibriumReport> equilibria;
  std::vector<RealVector> discarded_seeds;  ///< seeds whose Newton iteration did not converge
};

struct NewtonOptions {
  std::size_t max_iterations = 100;
  double residual_tol = 1e-10;
  double merge_distance = 1e-6;
};

namespace detail {

/// Newton step, falling back to a regularised least-squares step when J is singular.
inline RealVector newton_direction(const RealMatrix& j, const RealVector& r) {
  try {
    RealVector d = linear_solve(j, r);
    if (all_finite(d)) return d;
  } catch (const SingularMatrixError&) {
  }
  const RealMatrix jt = j.transpose();
  RealMatrix normal = jt * j;
  const double mu = 1e-10 * std::max(1.0, max_abs(normal));
  for (std::size_t i = 0; i < normal.rows(); ++i) normal(i, i) += mu;
  return linear_solve(normal, jt * r);
}

inline std::optional<RealVector> damped_newton(const VectorField& f, RealVector y, const NewtonOptions& opt) {
  RealVector r = evaluate(f, y);
  double norm = norm_inf(r);
  for (std::size_t it = 0; it < opt.max_iterations && norm > opt.residual_tol; ++it) {
    RealVector d;
    try {
      d = newton_direction(fd_jacobian(f, y), r);
    } catch (const Error&) {
      return std::nullopt;
    }
    double lambda = 1.0;
    RealVector trial(y.size());
    RealVector rt;
    double nt = norm;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] - lambda * d[i];
      rt = evaluate(f, trial);
      nt = norm_inf(rt);
      if (std::isfinite(nt) && nt < norm) break;
      lambda *= 0.5;
    }
    if (!std::isfinite(nt)) return std::nullopt;
    y = trial;
    r = rt;
    norm = nt;
  }
  if (!(norm <= opt.residual_tol)) return std::nullopt;
  return y;
}

}  // namespace detail

inline EquilibriumSearch find_equilibria(const VectorField& f, std::span<const RealVector> seeds,
                                         const NewtonOptions& opt = {}) {
  EquilibriumSearch out;
  for (const auto& seed : seeds) {
    if (!all_finite(seed)) throw ContractViolation("find_equilibria: seed is not finite");
    const auto root = detail::damped_newton(f, seed, opt);
    if (!root) {
      out.discarded_seeds.push_back(seed);
      continue;
    }
    const bool duplicate = std::any_of(out.equilibria.begin(), out.equilibria.end(), [&](const EquilibriumReport& e) {
      double d = 0.0;
      for (std::size_t i = 0; i < root->size(); ++i) d = std::max(d, std::abs(e.point.xi[i] - (*root)[i]));
      return d <= opt.merge_distance;
    });
    if (duplicate) continue;
    EquilibriumReport rep;
    rep.point = StateVector(*root, 0.0);
    rep.residual = norm_inf(evaluate(f, *root));
    const StabilityReport st = linear_stability(f, *root);
    rep.jacobian_eigenvalues = st.eigenvalues;
    rep.classification = st.classification;
    rep.degenerate = st.classification == Stability::marginal &&
                     std::any_of(st.eigenvalues.begin(), st.eigenvalues.end(),
                                 [](const Complex& l) { return std::abs(l) <= kStabilityThreshold; });
    out.equilibria.push_back(std::move(rep));
  }
  return out;
}

/// Uniform grid of seeds over positions in [-extent, extent]^N with zero velocity.
inline std::vector<RealVector> position_seed_grid(std::size_t n, double extent, std::size_t per_axis) {
  if (per_axis < 2) throw ContractViolation("position_seed_grid: need at least 2 points per axis");
  std::vector<RealVector> seeds;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    RealVector s(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      s[i] = -extent + 2.0 * extent * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
    seeds.push_back(std::move(s));
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return seeds;
}

struct DuffingStabilityPredicate {
  bool p0_stable = false;
  bool p1_stable = false;
};

/// Closed-form stability predicates for P0 and P1+- as stated for the model, taken without modification.
inline DuffingStabilityPredicate stability_predicate_duffing(double gamma, double beta) {
  const double g2 = gamma * gamma;
  const double b2 = beta * beta;
  DuffingStabilityPredicate p;
  p.p0_stable = -1.0 / std::numbers::sqrt2 < gamma && gamma < 1.0 / std::numbers::sqrt2 && 4.0 * g2 * (1.0 - g2) < b2 &&
                b2 < 1.0;
  p.p1_stable = b2 > 1.0 && g2 <= (std::numbers::sqrt2 - 1.0) / 2.0;
  return p;
}

/// Smallest parameter-space distance from (Gamma, beta) to a boundary of the closed-form stability regions.
inline double duffing_boundary_distance(double gamma, double beta) {
  const double g = std::abs(gamma);
  double d = std::abs(g - 1.0 / std::numbers::sqrt2);
  d = std::min(d, std::abs(std::abs(beta) - 1.0));
  d = std::min(d, std::abs(g - std::sqrt((std::numbers::sqrt2 - 1.0) / 2.0)));
  if (g < 1.0) d = std::min(d, std::abs(std::abs(beta) - 2.0 * g * std::sqrt(1.0 - g * g)));
  return d;
}

struct StabilityMapPoint {
  double gamma = 0.0;
  double beta = 0.0;
  DuffingStabilityPredicate predicate;
  Stability p0 = Stability::unstable;
  bool p1_exists = false;
  Stability p1 = Stability::unstable;
  double boundary_distance = 0.0;

  bool p0_agrees() const { return predicate.p0_stable == (p0 == Stability::stable); }
  bool p1_agrees() const { return predicate.p1_stable == (p1_exists && p1 == Stability::stable); }
};

/// Numerical classification of P0 and P1+ on a (Gamma, beta) grid at fixed alpha > 0.
inline std::vector<StabilityMapPoint> duffing_stability_map(std::span<const double> gammas, std::span<const double> betas,
                                                            double alpha) {
  if (!(alpha > 0.0)) throw ContractViolation("duffing_stability_map: alpha must be positive");
  std::vector<StabilityMapPoint> out;
  for (double g : gammas)
    for (double b : betas) {
      StabilityMapPoint pt;
      pt.gamma = g;
      pt.beta = b;
      pt.predicate = stability_predicate_duffing(g, b);
      pt.boundary_distance = duffing_boundary_distance(g, b);
      const DuffingParams p{g, b, alpha, 1.0, 1.0};
      const VectorField f = duffing_field(p);
      pt.p0 = linear_stability(f, RealVector(4, 0.0)).classification;
      if (b != 0.0) {
        const auto eq = duffing_equilibria(p);
        pt.p1_exists = eq[1].exists;
        if (pt.p1_exists) pt.p1 = linear_stability(f, eq[1].state).classification;
      }
      out.push_back(pt);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum

using JacobianFn = std::function<RealMatrix(std::span<const double>)>;

struct LyapunovConfig {
  double total_time = 2e4;
  double renorm_dt = 0.5;
  double step = 0.01;
  double transient_fraction = 0.1;
  double blowup_threshold = kBlowUpThreshold;
  JacobianFn jacobian;  ///< empty: central differences of the field
};

struct LyapunovResult {
  RealVector exponents;              ///< descending
  std::vector<RealVector> history;   ///< running means after each renormalization
  double sum = 0.0;
  double measured_time = 0.0;
  bool converged = false;
  bool diverged = false;
};

/// Called after each measured step with (t, state).
using StepObserver = std::function<void(double, std::span<const double>)>;

namespace detail {

/// y' = f(y) together with Q' = J(y) Q on the flat buffer (y, Q column-major).
class TangentFlow {
 public:
  TangentFlow(const VectorField& f, const JacobianFn& jac, std::size_t n)
      : f_(f), jac_(jac), n_(n), yp_(n), ym_(n), fp_(n), fm_(n), j_(n, n) {}

  void operator()(std::span<const double> z, std::span<double> dz) {
    const auto y = z.subspan(0, n_);
    f_(y, dz.subspan(0, n_));
    if (jac_) {
      j_ = jac_(y);
    } else {
      for (std::size_t c = 0; c < n_; ++c) {
        const double h = fd_step(y[c]);
        std::copy(y.begin(), y.end(), yp_.begin());
        std::copy(y.begin(), y.end(), ym_.begin());
        yp_[c] += h;
        ym_[c] -= h;
        f_(yp_, fp_);
        f_(ym_, fm_);
        for (std::size_t r = 0; r < n_; ++r) j_(r, c) = (fp_[r] - fm_[r]) / (2.0 * h);
      }
    }
    for (std::size_t k = 0; k < n_; ++k) {
      const double* q = z.data() + n_ + k * n_;
      double* dq = dz.data() + n_ + k * n_;
      for (std::size_t r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n_; ++c) s += j_(r, c) * q[c];
        dq[r] = s;
      }
    }
  }

 private:
  const VectorField& f_;
  const JacobianFn& jac_;
  std::size_t n_;
  RealVector yp_, ym_, fp_, fm_;
  RealMatrix j_;
};

/// Modified Gram-Schmidt on the n columns stored after the first n entries; returns log norms.
inline void orthonormalize(std::span<double> z, std::size_t n, RealVector& log_norms) {
  for (std::size_t k = 0; k < n; ++k) {
    double* qk = z.data() + n + k * n;
    for (std::size_t j = 0; j < k; ++j) {
      const double* qj = z.data() + n + j * n;
      double d = 0.0;
      for (std::size_t r = 0; r < n; ++r) d += qj[r] * qk[r];
      for (std::size_t r = 0; r < n; ++r) qk[r] -= d * qj[r];
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < n; ++r) nrm += qk[r] * qk[r];
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw EvaluationError("lyapunov: tangent frame collapsed");
    for (std::size_t r = 0; r < n; ++r) qk[r] /= nrm;
    log_norms[k] = std::log(nrm);
  }
}

}  // namespace detail

/**
 * @brief Benettin estimate of the Lyapunov spectrum.
 *
 * The state and an orthonormal tangent frame are advanced together with RK4.
 * The frame is re-orthonormalised every renorm_dt and the log stretch factors
 * are averaged after the transient fraction of total_time has elapsed.
 */
inline LyapunovResult lyapunov_spectrum(const VectorField& f, std::span<const double> s0, const LyapunovConfig& cfg,
                                        const StepObserver& observer = {}) {
  if (!(cfg.renorm_dt > 0.0) || !(cfg.step > 0.0) || !(cfg.total_time > cfg.renorm_dt))
    throw ContractViolation("lyapunov_spectrum: need total_time > renorm_dt > 0 and step > 0");
  if (cfg.transient_fraction < 0.0 || cfg.transient_fraction >= 1.0)
    throw ContractViolation("lyapunov_spectrum: transient_fraction must lie in [0, 1)");
  const double ratio = cfg.renorm_dt / cfg.step;
  const auto steps_per_renorm = static_cast<std::size_t>(std::llround(ratio));
  if (steps_per_renorm == 0 || std::abs(ratio - static_cast<double>(steps_per_renorm)) > 1e-9 * ratio)
    throw ContractViolation("lyapunov_spectrum: renorm_dt must be a whole number of steps");
  if (!all_finite(s0)) throw ContractViolation("lyapunov_spectrum: initial state not finite");

  const std::size_t n = s0.size();
  RealVector z(n + n * n, 0.0);
  std::copy(s0.begin(), s0.end(), z.begin());
  for (std::size_t k = 0; k < n; ++k) z[n + k * n + k] = 1.0;

  detail::TangentFlow flow(f, cfg.jacobian, n);
  const VectorField aug = [&flow](std::span<const double> a, std::span<double> b) { flow(a, b); };
  Rk4Workspace ws(z.size());
  const auto total_renorms = static_cast<std::size_t>(std::floor(cfg.total_time / cfg.renorm_dt + 1e-9));
  const auto transient_renorms = static_cast<std::size_t>(std::floor(cfg.transient_fraction * total_renorms));

  LyapunovResult res;
  RealVector sums(n, 0.0);
  RealVector logs(n, 0.0);
  double t = 0.0;
  std::size_t measured = 0;
  for (std::size_t r = 0; r < total_renorms; ++r) {
    for (std::size_t s = 0; s < steps_per_renorm; ++s) {
      rk4_step(aug, z, cfg.step, ws);
      t += cfg.step;
      const std::span<const double> y(z.data(), n);
      if (detail::escaped(y, cfg.blowup_threshold)) {
        res.diverged = true;
        break;
      }
      if (observer && r >= transient_renorms) observer(t, y);
    }
    if (res.diverged) break;
    detail::orthonormalize(z, n, logs);
    if (r < transient_renorms) continue;
    ++measured;
    for (std::size_t k = 0; k < n; ++k) sums[k] += logs[k];
    RealVector running(n);
    for (std::size_t k = 0; k < n; ++k) running[k] = sums[k] / (static_cast<double>(measured) * cfg.renorm_dt);
    res.history.push_back(std::move(running));
  }
  res.measured_time = static_cast<double>(measured) * cfg.renorm_dt;
  if (res.history.empty()) {
    res.exponents = RealVector(n, std::numeric_limits<double>::quiet_NaN());
    res.sum = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.exponents = res.history.back();
  std::sort(res.exponents.begin(), res.exponents.end(), std::greater<>());
  res.sum = 0.0;
  for (double e : res.exponents) res.sum += e;

  // Converged when the largest running exponent moved less than 5% over the last quarter.
  const std::size_t start = res.history.size() - res.history.size() / 4;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = start; i < res.history.size(); ++i) {
    const double m = *std::max_element(res.history[i].begin(), res.history[i].end());
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  const double last = res.exponents.front();
  res.converged = !res.diverged && res.history.size() >= 4 && hi - lo < 0.05 * std::abs(last);
  return res;
}

// ---------------------------------------------------------------------------
// Parameter scans

using FieldFamily = std::function<VectorField(double)>;

struct ScanConfig {
  RealVector initial_state;
  LyapunovConfig lyapunov;
  std::size_t sample_component = 0;
  std::size_t max_samples = 200;
  double onset_threshold = 0.01;
};

struct ScanPoint {
  double value = 0.0;
  double largest_exponent = std::numeric_limits<double>::quiet_NaN();
  bool bounded = true;
  RealVector samples;  ///< local maxima of the sampled component after the transient
  std::string error;
};

struct ScanResult {
  std::string parameter;
  RealVector grid;
  std::vector<ScanPoint> points;
  std::optional<double> onset;  ///< first grid value whose largest exponent exceeds the threshold
};

inline void require_monotone(std::span<const double> grid, const char* who) {
  if (grid.empty()) throw ContractViolation(std::string(who) + ": empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation(std::string(who) + ": grid must be strictly increasing");
}

inline RealVector linspace(double a, double b, std::size_t count) {
  if (count < 2) return {a};
  RealVector out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

/// Runs every grid point on `workers` threads; each worker owns its field copy and frame.
inline ScanResult bifurcation_scan(const FieldFamily& family, const std::string& parameter,
                                   std::span<const double> grid, const ScanConfig& cfg, unsigned workers = 1) {
  require_monotone(grid, "bifurcation_scan");
  if (cfg.sample_component >= cfg.initial_state.size())
    throw ContractViolation("bifurcation_scan: sample component outside the state");
  ScanResult out;
  out.parameter = parameter;
  out.grid.assign(grid.begin(), grid.end());
  out.points.resize(grid.size());

  auto run_point = [&](std::size_t i) {
    ScanPoint& pt = out.points[i];
    pt.value = grid[i];
    try {
      const VectorField f = family(grid[i]);
      double prev2 = std::numeric_limits<double>::quiet_NaN();
      double prev1 = prev2;
      const std::size_t comp = cfg.sample_component;
      const StepObserver obs = [&](double, std::span<const double> y) {
        const double v = y[comp];
        if (prev1 > prev2 && prev1 >= v && pt.samples.size() < cfg.max_samples) pt.samples.push_back(prev1);
        prev2 = prev1;
        prev1 = v;
      };
      const LyapunovResult lr = lyapunov_spectrum(f, cfg.initial_state, cfg.lyapunov, obs);
      pt.largest_exponent = lr.exponents.front();
      pt.bounded = !lr.diverged;
    } catch (const Error& e) {
      pt.bounded = false;
      pt.error = e.what();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) run_point(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& pt : out.points)
    if (pt.bounded && pt.largest_exponent > cfg.onset_threshold) {
      out.onset = pt.value;
      break;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Poincare sections

enum class CrossingDirection { positive, negative, both };

struct SectionPlane {
  std::size_t component = 0;
  double level = 0.0;
  CrossingDirection direction = CrossingDirection::positive;
};

/// Crossings of y_component = level, located by bisection on the Hermite interpolant to 1e-8 in time.
inline std::vector<StateVector> poincare_section(const Trajectory& traj, const SectionPlane& plane) {
  std::vector<StateVector> out;
  if (traj.size() < 2) return out;
  if (plane.component >= traj.dimension()) throw ContractViolation("poincare_section: component outside the state");
  if (traj.derivatives.size() != traj.size()) throw ContractViolation("poincare_section: trajectory lacks dense output");
  const auto g = [&](double t) { return interpolate(traj, t)[plane.component] - plane.level; };
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double g0 = traj.states[i][plane.component] - plane.level;
    const double g1 = traj.states[i + 1][plane.component] - plane.level;
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    if (!(up || down)) continue;
    if (plane.direction == CrossingDirection::positive && !up) continue;
    if (plane.direction == CrossingDirection::negative && !down) continue;
    double a = traj.times[i];
    double b = traj.times[i + 1];
    double ga = g0;
    while (b - a > 1e-8) {
      const double m = 0.5 * (a + b);
      const double gm = g(m);
      if ((gm < 0.0) == (ga < 0.0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    const double tc = 0.5 * (a + b);
    out.emplace_back(interpolate(traj, tc), tc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conserved quantities

using InvariantFn = std::function<double(std::span<const double>)>;

/// max over samples of |Q(t) - Q(0)| / max(1, |Q(0)|).
inline double conserved_drift(const Trajectory& traj, const InvariantFn& q) {
  if (traj.size() == 0) throw ContractViolation("conserved_drift: empty trajectory");
  const double q0 = q(traj.states.front());
  const double scale = std::max(1.0, std::abs(q0));
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(q(s) - q0) / scale);
  return drift;
}

// ---------------------------------------------------------------------------
// PT symmetry scan for two-dimensional systems

struct PtScanConfig {
  std::size_t grid_steps = 1440;  ///< spacing 2 pi / grid_steps = pi / 720
  std::size_t samples = 100;
  double tolerance = 1e-9;
  double sample_radius = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// P_theta = [[cos, sin], [sin, -cos]] applied to a 2-vector.
inline std::array<double, 2> reflect(double theta, double a, double b) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * a + s * b, s * a - c * b};
}

/// max over samples of |f(P X, -P V) - P f(X, V)| scaled by max(1, |f(X, V)|).
inline double pt_defect(const VectorField& f, double theta, const std::vector<RealVector>& states) {
  double worst = 0.0;
  RealVector fx(4), ft(4), mapped(4);
  for (const auto& s : states) {
    const auto px = reflect(theta, s[0], s[1]);
    const auto pv = reflect(theta, s[2], s[3]);
    mapped = {px[0], px[1], -pv[0], -pv[1]};
    f(s, fx);
    f(mapped, ft);
    const auto pa = reflect(theta, fx[2], fx[3]);
    const double scale = std::max({1.0, std::abs(fx[2]), std::abs(fx[3])});
    worst = std::max({worst, std::abs(ft[2] - pa[0]) / scale, std::abs(ft[3] - pa[1]) / scale});
  }
  return worst;
}

}  // namespace detail

inline std::vector<RealVector> random_states(std::size_t count, std::size_t dim, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<RealVector> out(count, RealVector(dim));
  for (auto& s : out)
    for (auto& v : s) v = u(rng);
  return out;
}

/**
 * @brief Angles theta in (0, 2 pi) for which x -> P_theta x, t -> -t maps solutions to solutions.
 *
 * Under t -> -t velocities flip sign and are then reflected by P_theta, so the
 * test is f(P X, -P V) = P f(X, V) on the acceleration components. Local minima
 * of the defect on the grid are refined by golden-section search.
 */
inline RealVector pt_scan(const VectorField& f, const PtScanConfig& cfg = {}) {
  if (cfg.grid_steps < 8) throw ContractViolation("pt_scan: grid too coarse");
  const auto states = random_states(cfg.samples, 4, cfg.sample_radius, cfg.seed);
  RealVector probe(4);
  f(states.front(), probe);  // surfaces dimension errors early
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(cfg.grid_steps);
  RealVector defect(cfg.grid_steps + 1);
  for (std::size_t k = 0; k <= cfg.grid_steps; ++k) defect[k] = detail::pt_defect(f, dtheta * static_cast<double>(k), states);

  RealVector found;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t k = 1; k < cfg.grid_steps; ++k) {
    if (defect[k] > defect[k - 1] || defect[k] > defect[k + 1]) continue;
    double a = dtheta * static_cast<double>(k - 1);
    double b = dtheta * static_cast<double>(k + 1);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = detail::pt_defect(f, c, states);
    double fd = detail::pt_defect(f, d, states);
    while (b - a > 1e-13) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = detail::pt_defect(f, c, states);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = detail::pt_defect(f, d, states);
      }
    }
    double best = 0.5 * (a + b);
    double best_defect = detail::pt_defect(f, best, states);
    const double grid_theta = dtheta * static_cast<double>(k);
    if (defect[k] <= best_defect) {
      best = grid_theta;
      best_defect = defect[k];
    }
    if (best_defect > cfg.tolerance) continue;
    if (!found.empty() && std::abs(found.back() - best) < 0.5 * dtheta) continue;
    found.push_back(best);
  }
  return found;
}

// ---------------------------------------------------------------------------
// Spectral diagnostics

struct SpectralResult {
  double dt = 0.0;
  RealVector autocorrelation;  ///< normalised by the lag-0 value
  RealVector frequencies;      ///< cycles per unit time
  RealVector power;
};

inline constexpr std::size_t kMaxSpectralSamples = std::size_t{1} << 16;

/// Unbiased autocorrelation up to max_lag and periodogram |sum x_n e^{-2 pi i k n / N}|^2 / N.
inline SpectralResult spectral_diagnostics(const Trajectory& traj, std::size_t component, std::size_t max_lag = 0) {
  const std::size_t n = traj.size();
  if (n < 4) throw ContractViolation("spectral_diagnostics: need at least 4 samples");
  if (n > kMaxSpectralSamples) throw ContractViolation("spectral_diagnostics: more than 2^16 samples");
  if (component >= traj.dimension()) throw ContractViolation("spectral_diagnostics: component outside the state");
  const double dt = (traj.times.back() - traj.times.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(traj.times[i] - traj.times[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw ContractViolation("spectral_diagnostics: trajectory is not uniformly sampled");

  RealVector x = traj.component(component);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;

  SpectralResult out;
  out.dt = dt;
  if (max_lag == 0 || max_lag >= n) max_lag = n / 2;
  out.autocorrelation.resize(max_lag + 1);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
    out.autocorrelation[lag] = s / static_cast<double>(n - lag);
  }
  const double r0 = out.autocorrelation[0];
  if (r0 > 0.0)
    for (double& r : out.autocorrelation) r /= r0;

  const std::size_t bins = n / 2 + 1;
  out.frequencies.resize(bins);
  out.power.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    // Twiddle by recurrence; renormalised each step to keep the rotation on the unit circle.
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const Complex step(std::cos(w), std::sin(w));
    Complex tw(1.0, 0.0);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * tw;
      tw *= step;
      if ((i & 1023) == 1023) tw /= std::abs(tw);
    }
    out.frequencies[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
    out.power[k] = std::norm(acc) / static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Landau reflection symmetry

/**
 * @brief Tests x1 -> x2, x2 -> -x1, t -> -t, B -> -B at random states.
 *
 * With Q = [[0,1],[-1,0]] the requirement is a_{-B}(X, V) = Q a_B(Q^T X, -Q^T V)
 * for the acceleration components.
 */
inline bool landau_symmetry_check(const VectorField& f_b, const VectorField& f_minus_b, std::size_t samples = 100,
                                  std::uint64_t seed = 0, double tol = 1e-9) {
  const auto states = random_states(samples, 4, 1.0, seed);
  RealVector a(4), b(4);
  for (const auto& s : states) {
    const RealVector pre{-s[1], s[0], s[3], -s[2]};  // (Q^T X, -Q^T V)
    f_b(pre, a);
    f_minus_b(s, b);
    const double scale = std::max({1.0, std::abs(a[2]), std::abs(a[3])});
    if (std::abs(b[2] - a[3]) > tol * scale || std::abs(b[3] + a[2]) > tol * scale) return false;
  }
  return true;
}

inline bool landau_symmetry_check(const LandauParams& p, std::size_t samples = 100, std::uint64_t seed = 0) {
  return landau_symmetry_check(landau_field(p), landau_field({-p.B, p.C, p.gamma}), samples, seed);
}

}  // namespace lossgain
