#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/matrix.hpp"

namespace lossgain {

/// Autonomous first-order dynamics y' = f(y), written into a caller-provided buffer.
using VectorField = std::function<void(std::span<const double> state, std::span<double> derivative)>;

inline RealVector evaluate(const VectorField& f, std::span<const double> y) {
  RealVector out(y.size(), 0.0);
  f(y, out);
  return out;
}
inline RealVector evaluate(const VectorField& f, const RealVector& y) {
  return evaluate(f, std::span<const double>(y));
}

/// Central-difference step for coordinate value v.
inline double fd_step(double v) { return std::max(1e-6, 1e-6 * std::abs(v)); }

/// Central-difference Jacobian of a map R^n -> R^m.
template <class Map>
RealMatrix fd_jacobian(const Map& map, std::span<const double> x) {
  RealVector probe(x.begin(), x.end());
  const RealVector f0 = map(std::span<const double>(probe));
  RealMatrix jac(f0.size(), x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = fd_step(x[j]);
    probe[j] = x[j] + h;
    const RealVector fp = map(std::span<const double>(probe));
    probe[j] = x[j] - h;
    const RealVector fm = map(std::span<const double>(probe));
    probe[j] = x[j];
    for (std::size_t i = 0; i < f0.size(); ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  if (!all_finite(jac)) throw EvaluationError("finite-difference Jacobian produced a non-finite entry");
  return jac;
}

/// Central-difference gradient of a scalar function.
template <class Fn>
RealVector fd_gradient(const Fn& fn, std::span<const double> x) {
  RealVector probe(x.begin(), x.end());
  RealVector g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = fd_step(x[j]);
    probe[j] = x[j] + h;
    const double fp = fn(std::span<const double>(probe));
    probe[j] = x[j] - h;
    const double fm = fn(std::span<const double>(probe));
    probe[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  if (!all_finite(g)) throw EvaluationError("finite-difference gradient produced a non-finite entry");
  return g;
}

/// State Jacobian of a vector field by central differences.
inline RealMatrix fd_jacobian(const VectorField& f, std::span<const double> y) {
  return fd_jacobian([&](std::span<const double> p) { return evaluate(f, p); }, y);
}

}  // namespace lossgain
