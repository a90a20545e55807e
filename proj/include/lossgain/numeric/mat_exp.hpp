#pragma once

#include <cmath>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/matrix.hpp"

namespace lossgain {

/**
 * @brief exp(X) by scaling and squaring with a truncated Taylor series.
 *
 * X is scaled by 2^-s so that ||X||_1 / 2^s <= 0.5; at that norm a degree-20
 * series is below double-precision roundoff.
 */
inline ComplexMatrix expm(const ComplexMatrix& x) {
  if (!x.is_square()) throw ContractViolation("expm: matrix is not square");
  if (!all_finite(x)) throw ContractViolation("expm: non-finite entry");
  const std::size_t n = x.rows();
  const double norm = norm_one(x);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix scaled = x * Complex(std::ldexp(1.0, -squarings), 0.0);

  ComplexMatrix result = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k <= 20; ++k) {
    term = term * scaled;
    term *= Complex(1.0 / k, 0.0);
    result += term;
    if (max_abs(term) <= 1e-18 * max_abs(result)) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// U(t) = exp(-i A t), the propagator of i dPsi/dt = A Psi.
inline ComplexMatrix mat_exp(const ComplexMatrix& a, double t) {
  if (!std::isfinite(t)) throw ContractViolation("mat_exp: non-finite time");
  return expm(a * Complex(0.0, -t));
}

}  // namespace lossgain
