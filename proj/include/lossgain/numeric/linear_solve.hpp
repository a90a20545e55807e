#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/matrix.hpp"

namespace lossgain {

/// Condition numbers above this are treated as singular.
inline constexpr double kSingularConditionThreshold = 1e12;

/**
 * @brief LU factorization with partial pivoting, P A = L U.
 *
 * Construction fails with SingularMatrixError when a pivot vanishes or the
 * estimated 1-norm condition number exceeds kSingularConditionThreshold.
 */
class LuFactorization {
 public:
  explicit LuFactorization(const RealMatrix& a) : lu_(a), perm_(a.rows()) {
    if (!a.is_square()) throw ContractViolation("LU: matrix is not square");
    if (!all_finite(a)) throw ContractViolation("LU: non-finite entry");
    const std::size_t n = a.rows();
    anorm_ = norm_one(a);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          piv = i;
        }
      }
      if (best == 0.0) throw SingularMatrixError("LU: exactly singular matrix (zero pivot)");
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        lu_(i, k) /= lu_(k, k);
        const double lik = lu_(i, k);
        if (lik == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= lik * lu_(k, j);
      }
    }

    condition_ = anorm_ * estimate_inverse_norm_one();
    if (!(condition_ <= kSingularConditionThreshold)) {
      throw SingularMatrixError("LU: matrix is singular to working precision (condition estimate " +
                                std::to_string(condition_) + ")");
    }
  }

  std::size_t size() const noexcept { return lu_.rows(); }

  /// Estimated 1-norm condition number.
  double condition_estimate() const noexcept { return condition_; }

  RealVector solve(std::span<const double> b) const {
    const std::size_t n = size();
    if (b.size() != n) throw ContractViolation("LU solve: right-hand side has wrong length");
    RealVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    forward_backward(x);
    return x;
  }

  RealMatrix inverse() const {
    const std::size_t n = size();
    RealMatrix inv(n, n);
    RealVector e(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::fill(e.begin(), e.end(), 0.0);
      e[j] = 1.0;
      const RealVector col = solve(e);
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
  }

 private:
  void forward_backward(RealVector& x) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
  }

  // Solve A^T y = c using the same factors.
  RealVector solve_transposed(RealVector c) const {
    const std::size_t n = size();
    // U^T z = c
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) c[i] -= lu_(j, i) * c[j];
      c[i] /= lu_(i, i);
    }
    // L^T w = z
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = i + 1; j < n; ++j) c[i] -= lu_(j, i) * c[j];
    RealVector y(n);
    for (std::size_t i = 0; i < n; ++i) y[perm_[i]] = c[i];
    return y;
  }

  // Hager's power iteration for ||A^{-1}||_1.
  double estimate_inverse_norm_one() const {
    const std::size_t n = size();
    RealVector x(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
      const RealVector y = solve(x);
      double ynorm = 0.0;
      for (double v : y) ynorm += std::abs(v);
      if (!std::isfinite(ynorm)) return std::numeric_limits<double>::infinity();
      if (iter > 0 && ynorm <= estimate) break;
      estimate = ynorm;
      RealVector xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const RealVector z = solve_transposed(xi);
      std::size_t jmax = 0;
      double zmax = -1.0;
      double ztx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ztx += z[i] * x[i];
        if (std::abs(z[i]) > zmax) {
          zmax = std::abs(z[i]);
          jmax = i;
        }
      }
      if (zmax <= ztx) break;
      std::fill(x.begin(), x.end(), 0.0);
      x[jmax] = 1.0;
    }
    // Alternative probe guards against pathological cases of the iteration.
    RealVector alt(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      alt[i] = sign * (1.0 + static_cast<double>(i) / std::max<double>(1.0, static_cast<double>(n - 1)));
    }
    const RealVector y = solve(alt);
    double ynorm = 0.0;
    for (double v : y) ynorm += std::abs(v);
    return std::max(estimate, 2.0 * ynorm / (3.0 * static_cast<double>(n)));
  }

  RealMatrix lu_;
  std::vector<std::size_t> perm_;
  double anorm_ = 0.0;
  double condition_ = 0.0;
};

/// Solves A x = b; throws SingularMatrixError for singular or ill-conditioned A.
inline RealVector linear_solve(const RealMatrix& a, std::span<const double> b) {
  return LuFactorization(a).solve(b);
}
inline RealVector linear_solve(const RealMatrix& a, const RealVector& b) {
  return linear_solve(a, std::span<const double>(b));
}

inline RealMatrix inverse(const RealMatrix& a) { return LuFactorization(a).inverse(); }

/// Inverse of a small complex matrix by Gauss-Jordan with partial pivoting.
inline ComplexMatrix inverse(const ComplexMatrix& a) {
  if (!a.is_square()) throw ContractViolation("inverse: matrix is not square");
  const std::size_t n = a.rows();
  ComplexMatrix m = a;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  const double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (std::abs(m(piv, k)) <= 1e-14 * scale) throw SingularMatrixError("inverse: singular complex matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(k, j), m(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    }
    const Complex d = m(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      m(k, j) /= d;
      inv(k, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const Complex f = m(i, k);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) -= f * m(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

}  // namespace lossgain
