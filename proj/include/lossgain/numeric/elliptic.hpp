#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lossgain/core/errors.hpp"

namespace lossgain {

struct JacobiElliptic {
  double sn;
  double cn;
  double dn;
};

namespace detail {
inline void check_modulus(double k, const char* who) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw DomainError(std::string(who) + ": modulus k=" + std::to_string(k) + " outside [0,1)");
  }
}
}  // namespace detail

/// Arithmetic-geometric mean, iterated until |a - b| <= 1e-14 a.
inline double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-14 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

/// Complete elliptic integral of the first kind K(k), modulus convention.
inline double complete_elliptic_k(double k) {
  detail::check_modulus(k, "complete_elliptic_k");
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt((1.0 - k) * (1.0 + k))));
}

/**
 * @brief Jacobi elliptic functions sn, cn, dn of argument u and modulus k.
 *
 * Descending Landen transformation driven by the AGM sequence
 * a_{n+1} = (a_n + b_n)/2, b_{n+1} = sqrt(a_n b_n), c_{n+1} = (a_n - b_n)/2,
 * stopped once c_n <= 1e-14. The amplitude is recovered by the backward
 * recursion phi_{n-1} = (phi_n + asin(c_n sin(phi_n) / a_n)) / 2.
 * dn is taken as the positive root of dn^2 = 1 - k^2 sn^2, which holds for
 * every real u when k < 1.
 */
inline JacobiElliptic jacobi_elliptic(double u, double k) {
  detail::check_modulus(k, "jacobi_elliptic");
  if (!std::isfinite(u)) throw DomainError("jacobi_elliptic: non-finite argument");
  if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};

  constexpr int kMaxLevels = 32;
  std::array<double, kMaxLevels + 1> a{};
  std::array<double, kMaxLevels + 1> c{};
  a[0] = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  c[0] = k;
  int n = 0;
  while (std::abs(c[n]) > 1e-14 && n < kMaxLevels) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int level = n; level > 0; --level) {
    phi = 0.5 * (phi + std::asin(c[level] * std::sin(phi) / a[level]));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  const double dn = std::sqrt(std::max(0.0, 1.0 - k * k * sn * sn));
  return {sn, cn, dn};
}

}  // namespace lossgain
