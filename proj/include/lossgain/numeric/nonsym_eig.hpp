#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/matrix.hpp"

namespace lossgain {

/// Characteristic polynomial coefficients c[0..n] (c[n] = 1) by Faddeev-LeVerrier.
inline RealVector characteristic_polynomial(const RealMatrix& a) {
  if (!a.is_square()) throw ContractViolation("characteristic_polynomial: matrix is not square");
  const std::size_t n = a.rows();
  RealVector c(n + 1, 0.0);
  c[n] = 1.0;
  RealMatrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    m = a * m;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += c[n - k + 1];
    c[n - k] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

namespace detail {
inline void horner(const RealVector& c, Complex z, Complex& p, Complex& dp) {
  p = c.back();
  dp = 0.0;
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[i];
  }
}
}  // namespace detail

/// All complex roots of sum_i c[i] z^i (c.back() != 0) by Aberth-Ehrlich iteration.
inline ComplexVector polynomial_roots(RealVector c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  const std::size_t n = c.size() - 1;
  if (n == 0) return {};
  const double lead = c.back();
  for (double& v : c) v /= lead;

  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::pow(std::abs(c[i]), 1.0 / static_cast<double>(n - i)));
  radius = std::max(radius, 1e-3);

  ComplexVector z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.25) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(radius, angle);
  }

  for (int iter = 0; iter < 500; ++iter) {
    double max_step = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex p;
      Complex dp;
      detail::horner(c, z[k], p, dp);
      if (p == Complex{}) continue;
      const Complex ratio = p / dp;
      Complex repulsion{};
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      const Complex step = ratio / (1.0 - ratio * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      z[k] -= step;
      max_step = std::max(max_step, std::abs(step) / std::max(1.0, std::abs(z[k])));
    }
    if (max_step < 1e-15) break;
  }
  for (auto& root : z) {
    for (int polish = 0; polish < 3; ++polish) {
      Complex p;
      Complex dp;
      detail::horner(c, root, p, dp);
      if (std::abs(dp) == 0.0) break;
      const Complex next = root - p / dp;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      root = next;
    }
  }
  return z;
}

namespace detail {

inline void reduce_to_hessenberg(RealMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t m = 1; m + 1 < n; ++m) {
    double x = 0.0;
    std::size_t piv = m;
    for (std::size_t j = m; j < n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        piv = j;
      }
    }
    if (piv != m) {
      for (std::size_t j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
      for (std::size_t j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
    }
    if (x != 0.0) {
      for (std::size_t i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y == 0.0) continue;
        y /= x;
        a(i, m - 1) = 0.0;
        for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
        for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
      }
    }
  }
}

// Francis double-shift QR on an upper Hessenberg matrix.
inline ComplexVector hessenberg_qr(RealMatrix& a) {
  const int n = static_cast<int>(a.rows());
  ComplexVector w(static_cast<std::size_t>(n));
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  auto sign = [](double mag, double s) { return s >= 0.0 ? std::abs(mag) : -std::abs(mag); };
  int nn = n - 1;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, x = 0.0, y = 0.0, z = 0.0, wv = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        w[nn] = x + t;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        wv = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + wv;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            w[nn - 1] = w[nn] = x + z;
            if (z != 0.0) w[nn] = x - wv / z;
          } else {
            w[nn] = Complex(x + p, -z);
            w[nn - 1] = std::conj(w[nn]);
          }
          nn -= 2;
        } else {
          if (its == 60) throw ConvergenceError("eigenvalues: QR iteration did not converge");
          if (its == 10 || its == 20 || its == 40) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            wv = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - wv) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k + 1 != nn) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k + 1 != nn) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return w;
}

}  // namespace detail

namespace detail {
/// Real input: replaces each complex root and its nearest conjugate partner by an exact conjugate pair.
inline void pair_conjugates(ComplexVector& w, double scale) {
  std::vector<bool> done(w.size(), false);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (done[i]) continue;
    done[i] = true;
    if (std::abs(w[i].imag()) <= 1e-13 * scale) {
      w[i] = Complex(w[i].real(), 0.0);
      continue;
    }
    std::size_t best = w.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (done[j]) continue;
      const double d = std::abs(w[j] - std::conj(w[i]));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == w.size()) continue;
    done[best] = true;
    const double re = 0.5 * (w[i].real() + w[best].real());
    const double im = 0.5 * (std::abs(w[i].imag()) + std::abs(w[best].imag()));
    w[i] = Complex(re, im);
    w[best] = Complex(re, -im);
  }
}
}  // namespace detail

/// Orders eigenvalues by descending real part, then descending imaginary part.
inline void sort_eigenvalues(ComplexVector& w) {
  std::sort(w.begin(), w.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

/// Eigenvalues by Hessenberg reduction and shifted QR, for any size.
inline ComplexVector eigenvalues_qr(const RealMatrix& a) {
  if (!a.is_square()) throw ContractViolation("eigenvalues: matrix is not square");
  if (!all_finite(a)) throw ContractViolation("eigenvalues: non-finite entry");
  RealMatrix h = a;
  detail::reduce_to_hessenberg(h);
  ComplexVector w = detail::hessenberg_qr(h);
  detail::pair_conjugates(w, std::max(1.0, max_abs(a)));
  sort_eigenvalues(w);
  return w;
}

/**
 * @brief Eigenvalues of a general real matrix.
 *
 * Up to 4x4 the characteristic polynomial is formed and its roots found
 * directly; larger matrices use Hessenberg QR.
 */
inline ComplexVector eigenvalues(const RealMatrix& a) {
  if (!a.is_square()) throw ContractViolation("eigenvalues: matrix is not square");
  if (!all_finite(a)) throw ContractViolation("eigenvalues: non-finite entry");
  if (a.rows() > 4) return eigenvalues_qr(a);
  ComplexVector w = polynomial_roots(characteristic_polynomial(a));
  detail::pair_conjugates(w, std::max(1.0, max_abs(a)));
  sort_eigenvalues(w);
  return w;
}

}  // namespace lossgain
