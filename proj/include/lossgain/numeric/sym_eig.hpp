#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/matrix.hpp"

namespace lossgain {

/// Eigenpairs of a real symmetric matrix.
struct EigenResult {
  RealVector eigenvalues;  ///< sorted descending
  RealMatrix basis;        ///< orthogonal; column k belongs to eigenvalues[k]
};

/**
 * @brief Symmetric eigendecomposition by cyclic Jacobi rotations.
 *
 * Eigenvalues are returned in descending order. Each eigenvector is signed so
 * that its first component with magnitude above 1e-12 is positive; ties in the
 * eigenvalues keep the original index order. The result is therefore a
 * deterministic function of the input.
 */
inline EigenResult sym_eig(const RealMatrix& s) {
  if (!s.is_square()) throw ContractViolation("sym_eig: matrix is not square");
  if (!all_finite(s)) throw ContractViolation("sym_eig: non-finite entry");
  if (!is_symmetric(s, 1e-12)) throw ContractViolation("sym_eig: matrix is not symmetric");

  const std::size_t n = s.rows();
  RealMatrix a = s;
  RealMatrix v = RealMatrix::identity(n);
  const double scale = std::max(norm_frobenius(s), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        // A <- J^T A J with J the rotation in the (p,q) plane.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenResult out;
  out.eigenvalues.resize(n);
  out.basis = RealMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > 1e-12) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.basis(i, k) = sign * v(i, src);
  }
  return out;
}

}  // namespace lossgain
