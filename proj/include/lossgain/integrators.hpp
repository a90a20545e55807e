#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/numeric/linear_solve.hpp"
#include "lossgain/system_model.hpp"

namespace lossgain {

enum class Scheme { rk4, adaptive, implicit_midpoint };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::rk4: return "rk4";
    case Scheme::adaptive: return "adaptive";
    case Scheme::implicit_midpoint: return "implicit_midpoint";
  }
  return "unknown";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "rk4") return Scheme::rk4;
  if (name == "adaptive" || name == "adaptive_embedded" || name == "dp45") return Scheme::adaptive;
  if (name == "implicit_midpoint" || name == "midpoint") return Scheme::implicit_midpoint;
  throw ContractViolation("unknown integrator scheme '" + name + "'");
}

/// States whose sup-norm exceeds this are treated as escaped to infinity.
inline constexpr double kBlowUpThreshold = 1e8;

struct IntegratorConfig {
  Scheme scheme = Scheme::rk4;
  double step = 1e-2;       ///< fixed step; initial step for the adaptive scheme
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double t0 = 0.0;
  double t1 = 10.0;
  std::size_t record_stride = 1;  ///< fixed-step schemes record every stride-th step
  double output_interval = 0.0;   ///< adaptive scheme: > 0 forces samples on a uniform grid
  double blowup_threshold = kBlowUpThreshold;
  std::size_t max_steps = 5'000'000;  ///< adaptive scheme: attempted-step budget; stiff growth exhausts it

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ContractViolation("integrator: step must be positive");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ContractViolation("integrator: tolerances must be positive");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) throw ContractViolation("integrator: need t1 > t0");
    if (record_stride == 0) throw ContractViolation("integrator: record_stride must be >= 1");
    if (output_interval < 0.0) throw ContractViolation("integrator: output_interval must be >= 0");
    if (max_steps == 0) throw ContractViolation("integrator: max_steps must be >= 1");
  }
};

/**
 * @brief Sampled solution of y' = f(y) with the derivative stored at each sample.
 *
 * The stored derivatives give a C1 cubic Hermite interpolant between samples.
 */
struct Trajectory {
  RealVector times;
  std::vector<RealVector> states;
  std::vector<RealVector> derivatives;
  bool diverged = false;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  std::string label;
  IntegratorConfig config;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t dimension() const noexcept { return states.empty() ? 0 : states.front().size(); }
  StateVector at(std::size_t i) const { return StateVector(states.at(i), times.at(i)); }
  const RealVector& back() const { return states.back(); }

  RealVector component(std::size_t j) const {
    RealVector out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.at(j));
    return out;
  }

  void push(double t, RealVector y, RealVector dy) {
    times.push_back(t);
    states.push_back(std::move(y));
    derivatives.push_back(std::move(dy));
  }
};

/// Cubic Hermite interpolation of the trajectory at time t within its span.
inline RealVector interpolate(const Trajectory& traj, double t) {
  if (traj.size() == 0) throw ContractViolation("interpolate: empty trajectory");
  if (t < traj.times.front() || t > traj.times.back())
    throw ContractViolation("interpolate: time outside trajectory span");
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  std::size_t i = it == traj.times.begin() ? 0 : static_cast<std::size_t>(it - traj.times.begin()) - 1;
  if (i + 1 >= traj.size()) return traj.states.back();
  const double t0 = traj.times[i];
  const double h = traj.times[i + 1] - t0;
  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  const auto& y0 = traj.states[i];
  const auto& y1 = traj.states[i + 1];
  const auto& d0 = traj.derivatives[i];
  const auto& d1 = traj.derivatives[i + 1];
  RealVector out(y0.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
  return out;
}

/// Scratch buffers for allocation-free RK4 stepping.
struct Rk4Workspace {
  RealVector k1, k2, k3, k4, tmp;
  explicit Rk4Workspace(std::size_t n = 0) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

/// One classical RK4 step in place. ws.k1 must already hold f(y).
inline void rk4_step_with_k1(const VectorField& f, std::span<double> y, double h, Rk4Workspace& ws) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * h * ws.k1[i];
  f(ws.tmp, ws.k2);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * h * ws.k2[i];
  f(ws.tmp, ws.k3);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + h * ws.k3[i];
  f(ws.tmp, ws.k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

inline void rk4_step(const VectorField& f, std::span<double> y, double h, Rk4Workspace& ws) {
  f(y, ws.k1);
  rk4_step_with_k1(f, y, h, ws);
}

inline RealVector rk4_step(const VectorField& f, const RealVector& y, double h) {
  Rk4Workspace ws(y.size());
  RealVector out = y;
  rk4_step(f, out, h, ws);
  return out;
}

/**
 * @brief One implicit midpoint step y1 = y0 + h f((y0 + y1)/2).
 *
 * Newton iteration on G(y1) = y1 - y0 - h f(m) with J_G = I - (h/2) f'(m),
 * f' by central differences. Converged when |G|_inf <= 1e-12 max(1, |y1|_inf).
 * A negative h steps backward in time.
 */
inline RealVector implicit_midpoint_step(const VectorField& f, std::span<const double> y0, double h) {
  if (h == 0.0 || !std::isfinite(h)) throw ContractViolation("implicit_midpoint_step: step must be nonzero");
  const std::size_t n = y0.size();
  RealVector y1 = evaluate(f, y0);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h * y1[i];
  RealVector mid(n);
  RealVector fm(n);
  RealVector g(n);
  for (int iter = 0; iter < 50; ++iter) {
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (y0[i] + y1[i]);
    f(mid, fm);
    double gnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = y1[i] - y0[i] - h * fm[i];
      gnorm = std::max(gnorm, std::abs(g[i]));
    }
    if (!std::isfinite(gnorm)) break;
    if (gnorm <= 1e-12 * std::max(1.0, norm_inf(std::span<const double>(y1)))) return y1;
    RealMatrix jg = fd_jacobian(f, mid) * (-0.5 * h);
    for (std::size_t i = 0; i < n; ++i) jg(i, i) += 1.0;
    const RealVector delta = linear_solve(jg, g);
    for (std::size_t i = 0; i < n; ++i) y1[i] -= delta[i];
  }
  throw ConvergenceError("implicit_midpoint_step: Newton iteration did not converge in 50 iterations");
}

namespace detail {

inline bool escaped(std::span<const double> y, double threshold) {
  for (double v : y)
    if (!std::isfinite(v) || std::abs(v) > threshold) return true;
  return false;
}

inline void mark_diverged(Trajectory& traj, double t) {
  traj.diverged = true;
  traj.escape_time = t;
}

inline Trajectory integrate_fixed(const VectorField& f, RealVector y, const IntegratorConfig& cfg) {
  Trajectory traj;
  traj.config = cfg;
  const double span = cfg.t1 - cfg.t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
  const double h = span / static_cast<double>(steps);
  const std::size_t n = y.size();
  Rk4Workspace ws(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = cfg.t0 + static_cast<double>(k) * h;
    f(y, ws.k1);
    if (k % cfg.record_stride == 0) traj.push(t, y, ws.k1);
    if (cfg.scheme == Scheme::rk4) {
      rk4_step_with_k1(f, y, h, ws);
    } else {
      try {
        y = implicit_midpoint_step(f, y, h);
      } catch (const ConvergenceError&) {
        if (escaped(y, cfg.blowup_threshold)) {
          mark_diverged(traj, t);
          return traj;
        }
        throw;
      }
    }
    if (escaped(y, cfg.blowup_threshold)) {
      mark_diverged(traj, t + h);
      return traj;
    }
  }
  f(y, ws.k1);
  traj.push(cfg.t1, y, ws.k1);
  return traj;
}

// Dormand-Prince 5(4) tableau.
struct Dp45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b* (error weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline Trajectory integrate_adaptive(const VectorField& f, RealVector y, const IntegratorConfig& cfg) {
  using T = Dp45;
  Trajectory traj;
  traj.config = cfg;
  const std::size_t n = y.size();
  RealVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  double t = cfg.t0;
  double h_prop = std::min(cfg.step, cfg.t1 - cfg.t0);
  double h = h_prop;
  double prev_err = 1.0;
  f(y, k1);
  traj.push(t, y, k1);
  double next_output = cfg.output_interval > 0.0 ? cfg.t0 + cfg.output_interval : cfg.t1;
  std::size_t output_index = 1;
  std::size_t accepted = 0;
  const double min_step = 1e-14 * std::max(1.0, std::abs(cfg.t1));
  std::size_t attempted = 0;
  while (t < cfg.t1) {
    if (++attempted > cfg.max_steps)
      throw ConvergenceError("adaptive integrator: " + std::to_string(cfg.max_steps) +
                             " steps exhausted at t=" + std::to_string(t) + " (stiff or near-singular dynamics)");
    const double target = cfg.output_interval > 0.0 ? std::min(next_output, cfg.t1) : cfg.t1;
    bool lands = false;
    h = h_prop;
    if (t + h >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }
    auto stage = [&](RealVector& out, std::initializer_list<std::pair<double, const RealVector*>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = y[i];
        for (const auto& [a, k] : terms) acc += h * a * (*k)[i];
        tmp[i] = acc;
      }
      f(tmp, out);
    };
    stage(k2, {{T::a21, &k1}});
    stage(k3, {{T::a31, &k1}, {T::a32, &k2}});
    stage(k4, {{T::a41, &k1}, {T::a42, &k2}, {T::a43, &k3}});
    stage(k5, {{T::a51, &k1}, {T::a52, &k2}, {T::a53, &k3}, {T::a54, &k4}});
    stage(k6, {{T::a61, &k1}, {T::a62, &k2}, {T::a63, &k3}, {T::a64, &k4}, {T::a65, &k5}});
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (T::b1 * k1[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] + T::b6 * k6[i]);
    f(ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] + T::e6 * k6[i] +
                            T::e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) {
      if (escaped(ynew, cfg.blowup_threshold)) {
        mark_diverged(traj, t + h);
        return traj;
      }
      h_prop = 0.2 * h;
      if (h_prop < min_step) throw ConvergenceError("adaptive integrator: step size underflow at t=" + std::to_string(t));
      continue;
    }
    if (err <= 1.0) {
      t = lands ? target : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++accepted;
      if (escaped(y, cfg.blowup_threshold)) {
        mark_diverged(traj, t);
        return traj;
      }
      const bool on_grid = cfg.output_interval > 0.0 && lands;
      if (on_grid) {
        traj.push(t, y, k1);
        ++output_index;
        next_output = cfg.t0 + static_cast<double>(output_index) * cfg.output_interval;
      } else if (cfg.output_interval <= 0.0 && (accepted % cfg.record_stride == 0 || t >= cfg.t1)) {
        traj.push(t, y, k1);
      }
      // PI controller, safety 0.9, growth capped at 5x.
      const double factor =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0), 0.2, 5.0);
      prev_err = std::max(err, 1e-4);
      // A step shortened to land on an output time does not shrink the proposal.
      h_prop = lands ? std::max(h_prop, h * factor) : h * factor;
    } else {
      h_prop = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h_prop < min_step) throw ConvergenceError("adaptive integrator: step size underflow at t=" + std::to_string(t));
    }
  }
  if (traj.times.back() < cfg.t1) traj.push(t, y, k1);
  return traj;
}

}  // namespace detail

/**
 * @brief Integrates y' = f(y) from cfg.t0 to cfg.t1 starting at s0.
 *
 * Stops early and sets diverged/escape_time once any component exceeds
 * cfg.blowup_threshold in magnitude or becomes non-finite.
 */
inline Trajectory integrate(const VectorField& f, const StateVector& s0, const IntegratorConfig& cfg) {
  cfg.validate();
  if (s0.xi.empty() || !all_finite(std::span<const double>(s0.xi)))
    throw ContractViolation("integrate: initial state is empty or not finite");
  const IntegratorConfig& c = cfg;
  const RealVector f0 = evaluate(f, s0.xi);
  if (!all_finite(std::span<const double>(f0))) throw EvaluationError("integrate: vector field not finite at initial state");
  if (c.scheme == Scheme::adaptive) return detail::integrate_adaptive(f, s0.xi, c);
  return detail::integrate_fixed(f, s0.xi, c);
}

/**
 * @brief Mean period of a component from upward mean crossings.
 *
 * Crossing times come from linear interpolation between samples. Returns
 * nullopt when fewer than three crossings exist or when the relative spread
 * of the spacings (standard deviation over mean) exceeds 5%.
 */
inline std::optional<double> period_estimate(const Trajectory& traj, std::size_t component) {
  if (traj.size() < 4) return std::nullopt;
  const RealVector v = traj.component(component);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  RealVector crossings;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double a = v[i] - mean;
    const double b = v[i + 1] - mean;
    if (a < 0.0 && b >= 0.0) {
      const double s = a / (a - b);
      crossings.push_back(traj.times[i] + s * (traj.times[i + 1] - traj.times[i]));
    }
  }
  if (crossings.size() < 3) return std::nullopt;
  RealVector spacing;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) spacing.push_back(crossings[i + 1] - crossings[i]);
  const double mean_spacing = (crossings.back() - crossings.front()) / static_cast<double>(spacing.size());
  double var = 0.0;
  for (double d : spacing) var += (d - mean_spacing) * (d - mean_spacing);
  var /= static_cast<double>(spacing.size());
  if (std::sqrt(var) > 0.05 * mean_spacing) return std::nullopt;
  return mean_spacing;
}

/// Writes '#' metadata lines, then `t,x1..xN,v1..vN[,extra...]` rows.
inline void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& metadata = {},
                      const std::vector<std::pair<std::string, RealVector>>& extra = {}) {
  for (const auto& m : metadata) os << "# " << m << '\n';
  const std::size_t dim = traj.dimension();
  const std::size_t n = dim / 2;
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  for (std::size_t i = 0; i < n; ++i) os << ",v" << i + 1;
  if (dim % 2) os << ",y" << dim;
  for (const auto& [name, col] : extra) {
    if (col.size() != traj.size()) throw ContractViolation("write_csv: column '" + name + "' has wrong length");
    os << ',' << name;
  }
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t r = 0; r < traj.size(); ++r) {
    os << traj.times[r];
    for (double x : traj.states[r]) os << ',' << x;
    for (const auto& [name, col] : extra) os << ',' << col[r];
    os << '\n';
  }
}

}  // namespace lossgain
