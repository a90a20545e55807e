#pragma once

// Small independent oracles shared by the unit suites. Nothing here calls the
// library's integrators, so agreement with them is a genuine cross-check.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "lossgain/core/matrix.hpp"

namespace test_support {

using lossgain::RealMatrix;
using lossgain::RealVector;

/// Classical RK4 with a fixed step from t = 0 to t_end, written out longhand.
inline RealVector reference_rk4(const std::function<RealVector(const RealVector&)>& f, RealVector y, double t_end,
                                std::size_t steps) {
  const double h = t_end / static_cast<double>(steps);
  const std::size_t n = y.size();
  RealVector tmp(n);
  for (std::size_t s = 0; s < steps; ++s) {
    const RealVector k1 = f(y);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const RealVector k2 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const RealVector k3 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    const RealVector k4 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

inline RealMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  RealMatrix m(rows, cols);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

inline RealMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  const RealMatrix a = random_matrix(n, n, rng);
  return (a + a.transpose()) * 0.5;
}

inline RealVector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  RealVector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

}  // namespace test_support
