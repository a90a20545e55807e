#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/numeric/sym_eig.hpp"
#include "lossgain/system_model.hpp"

namespace lossgain {

/// Eigenvalues of M within this distance of zero mark a region boundary.
inline constexpr double kRegionBoundaryTolerance = 1e-10;

struct RegionInfo {
  int a = 1;              ///< region index; a - 1 negative eigenvalues of M
  RealVector eigenvalues; ///< descending
  RealMatrix rotation;    ///< columns are eigenvectors of M
  RealMatrix eta;         ///< diag(sgn lambda_i)
  RealMatrix scale;       ///< diag(sqrt|lambda_i|)
};

/**
 * @brief Rotation and scale that bring the system into its hidden loss-gain form.
 *
 * x = O x~ and x~ = S X, so x = O S X. M_D = O^T M O = S eta S.
 * R~(x) = O^T R(x) O and calR(x) = S R~(x) S depend on position and are
 * returned as callables of the original coordinates x.
 */
struct TransformReport {
  RealMatrix rotation;
  RealMatrix mass_diagonal;
  RealMatrix scale;
  RealMatrix eta;
  int region = 1;
  RealVector eigenvalues;
  std::function<RealMatrix(std::span<const double>)> r_rotated;
  std::function<RealMatrix(std::span<const double>)> r_scaled;
};

inline RegionInfo classify_region(const SystemSpec& spec) {
  const EigenResult eig = sym_eig(spec.mass_matrix());
  const std::size_t n = spec.n();
  RegionInfo info;
  info.eigenvalues = eig.eigenvalues;
  info.rotation = eig.basis;
  info.eta = RealMatrix(n, n);
  info.scale = RealMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = eig.eigenvalues[i];
    if (std::abs(lambda) <= kRegionBoundaryTolerance) {
      throw SingularMatrixError("classify_region: eigenvalue " + std::to_string(i + 1) +
                                " of the mass matrix is zero; the spec sits on a region boundary");
    }
    info.eta(i, i) = lambda > 0.0 ? 1.0 : -1.0;
    info.scale(i, i) = std::sqrt(std::abs(lambda));
    if (lambda < 0.0) ++info.a;
  }
  return info;
}

inline TransformReport hide_loss_gain(const SystemSpec& spec) {
  RegionInfo info = classify_region(spec);
  TransformReport report;
  report.rotation = info.rotation;
  report.mass_diagonal = RealMatrix::diagonal(std::span<const double>(info.eigenvalues));
  report.scale = info.scale;
  report.eta = info.eta;
  report.region = info.a;
  report.eigenvalues = info.eigenvalues;
  const RealMatrix o = info.rotation;
  const RealMatrix ot = o.transpose();
  const RealMatrix s = info.scale;
  report.r_rotated = [spec, o, ot](std::span<const double> x) { return ot * r_matrix(spec, x) * o; };
  report.r_scaled = [spec, o, ot, s](std::span<const double> x) { return s * (ot * r_matrix(spec, x) * o) * s; };
  return report;
}

/// M_D R~(x); its diagonal vanishes because R~ is antisymmetric and M_D diagonal.
inline RealMatrix hidden_coupling(const TransformReport& report, std::span<const double> x) {
  return report.mass_diagonal * report.r_rotated(x);
}

/// Original position x from scaled coordinates X: x = O S X.
inline RealVector to_original_position(const TransformReport& report, std::span<const double> big_x) {
  return report.rotation * (report.scale * big_x);
}

/// Scaled coordinates X = S^{-1} O^T x.
inline RealVector to_scaled_position(const TransformReport& report, std::span<const double> x) {
  RealVector xr = report.rotation.transpose() * x;
  for (std::size_t i = 0; i < xr.size(); ++i) xr[i] /= report.scale(i, i);
  return xr;
}

/// Maps a full (x, v) state to (X, Xdot); the map is linear so velocities transform alike.
inline RealVector to_scaled_state(const TransformReport& report, std::span<const double> xi) {
  const std::size_t n = report.rotation.rows();
  if (xi.size() != 2 * n) throw ContractViolation("to_scaled_state: state length must be 2N");
  RealVector out = to_scaled_position(report, xi.subspan(0, n));
  const RealVector v = to_scaled_position(report, xi.subspan(n, n));
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline RealVector to_original_state(const TransformReport& report, std::span<const double> big_xi) {
  const std::size_t n = report.rotation.rows();
  if (big_xi.size() != 2 * n) throw ContractViolation("to_original_state: state length must be 2N");
  RealVector out = to_original_position(report, big_xi.subspan(0, n));
  const RealVector v = to_original_position(report, big_xi.subspan(n, n));
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

/// calV(X) = V(O S X).
inline std::function<double(std::span<const double>)> transformed_potential(const SystemSpec& spec,
                                                                            const TransformReport& report) {
  return [spec, report](std::span<const double> big_x) { return spec.potential()(to_original_position(report, big_x)); };
}

/// Rotated dynamics x~'' = 2 M_D R~ x~' - 2 M_D dV/dx~ on state (x~, x~').
inline VectorField rotated_dynamics(const SystemSpec& spec, const TransformReport& report) {
  return [spec, report](std::span<const double> y, std::span<double> dy) {
    const std::size_t n = spec.n();
    const RealVector xt(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    const RealVector x = report.rotation * xt;
    const RealVector grad = report.rotation.transpose() * potential_gradient(spec, x);
    const RealVector coupling = hidden_coupling(report, x) * y.subspan(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = y[n + i];
      dy[n + i] = 2.0 * coupling[i] - 2.0 * report.mass_diagonal(i, i) * grad[i];
    }
  };
}

/// X'' = 2 eta calR X' - 2 eta dcalV/dX on state (X, X').
inline VectorField canonical_scale_dynamics(const SystemSpec& spec, const TransformReport& report) {
  if (report.rotation.rows() != spec.n()) throw ContractViolation("canonical_scale_dynamics: report does not match spec");
  return [spec, report](std::span<const double> y, std::span<double> dy) {
    const std::size_t n = spec.n();
    const RealVector x = to_original_position(report, y.subspan(0, n));
    // dcalV/dX = S O^T dV/dx
    const RealVector grad = report.scale * (report.rotation.transpose() * potential_gradient(spec, x));
    const RealVector coupling = report.r_scaled(x) * y.subspan(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = report.eta(i, i);
      dy[i] = y[n + i];
      dy[n + i] = 2.0 * eta * coupling[i] - 2.0 * eta * grad[i];
    }
  };
}

}  // namespace lossgain
