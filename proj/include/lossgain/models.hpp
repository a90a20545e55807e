#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/core/polynomial.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/numeric/elliptic.hpp"
#include "lossgain/numeric/mat_exp.hpp"
#include "lossgain/system_model.hpp"

namespace lossgain {

// ---------------------------------------------------------------------------
// Parameter records

struct BatemanParams {
  double gamma = 0.1;
  double omega = 1.0;
};

struct ResonatorParams {
  double gamma = 0.1;
  double omega = 1.0;
  double epsilon = 0.5;
};

struct VdpDuffingParams {
  double gamma = 0.1;
  double alpha = 0.0;  ///< Lorentz strength; M = sigma1 + alpha^2 I
  double beta = 0.0;
  double omega = 1.0;
  double a1 = 1.0, a2 = 1.0;
  double b1 = 0.0, b2 = 0.0;
  double g = 0.0;
};

/// Scaled coupled Duffing pair with loss Gamma on x and gain on y.
struct DuffingParams {
  double Gamma = 0.01;
  double beta = 1.5;
  double alpha = 0.5;
  double sign1 = 1.0;
  double sign2 = 1.0;
};

/// Unscaled coupled Duffing pair before fixing time and amplitude scales.
struct DuffingRawParams {
  double gamma = 0.1;
  double omega = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double g = 1.0;
};

struct DuffingNhParams {
  double Gamma = 0.1;
  double beta = 0.5;
  double alpha1 = 0.5;
  double alpha2 = 1.0;
  double omega = 1.0;
};

struct LandauParams {
  double B = 2.0;
  double C = 0.8;
  double gamma = 0.6;
};

struct TranslationalCubicParams {
  std::size_t m = 1;
  double gamma = 0.3;
  double omega0 = 1.0;
  double alpha = 1.0;
};

struct RotationalQuarticParams {
  std::size_t m = 1;
  double gamma = 0.4;
  double omega = 1.0;
  double alpha = 1.0;
};

struct DimerParams {
  double Gamma0 = 0.1;
  double beta = 1.0;
  double alpha = 0.5;
};

struct OligomerParams {
  double Gamma = 0.6;
  Complex beta{1.0, 0.0};
  double alpha0 = 1.0;
  Complex alpha{0.0, 0.6};
  double delta = 1.0;
  int power = 1;
};

/// Three-particle extension: Van der Pol-Duffing pair plus an undamped Duffing x3.
struct TripletParams {
  double gamma = 0.1;
  double alpha = 0.5;  ///< enters both M11 = M22 = alpha^2 and the x1^3 x2 coupling
  double beta = 0.2;
  double omega = 1.0;
  double a1 = 1.0, a2 = 1.0;
  double b1 = 0.0, b2 = 0.0;
  double delta = 0.1;
};

namespace detail {
inline Polynomial var(std::size_t n, std::size_t i) { return Polynomial::variable(n, i); }
inline Polynomial cst(std::size_t n, double c) { return Polynomial::constant(n, c); }
inline void require_finite(std::initializer_list<double> values, const char* who) {
  for (double v : values)
    if (!std::isfinite(v)) throw ContractViolation(std::string(who) + ": non-finite parameter");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Bateman pair and linearly coupled resonators
//
// M = sigma1/2, A = gamma [[0,1],[-1,0]], F(x) = x give D = gamma diag(-1, 1),
// so x loses and y gains energy at rate 2 gamma.

inline SystemSpec make_resonators(const ResonatorParams& p) {
  detail::require_finite({p.gamma, p.omega, p.epsilon}, "make_resonators");
  if (!(p.omega > 0.0)) throw ContractViolation("make_resonators: omega must be positive");
  using detail::var;
  const Polynomial x = var(2, 0);
  const Polynomial y = var(2, 1);
  Polynomial v = p.omega * p.omega * (x * y) + 0.5 * p.epsilon * (x * x + y * y);
  return SystemSpec(pauli::sigma1() * 0.5, pauli::i_sigma2() * p.gamma, FieldMap::identity(2),
                    Potential::polynomial(std::move(v)), "resonators",
                    {{"gamma", p.gamma}, {"omega", p.omega}, {"epsilon", p.epsilon}});
}

inline SystemSpec make_bateman(const BatemanParams& p) {
  SystemSpec s = make_resonators({p.gamma, p.omega, 0.0});
  return SystemSpec(s.mass_matrix(), s.gauge_matrix(), s.field_map(), s.potential(), "bateman",
                    {{"gamma", p.gamma}, {"omega", p.omega}});
}

/// x'' = -2 gamma x' - omega^2 x - eps y,  y'' = 2 gamma y' - omega^2 y - eps x.
inline VectorField resonator_field(const ResonatorParams& p) {
  return [p](std::span<const double> s, std::span<double> d) {
    const double w2 = p.omega * p.omega;
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -2.0 * p.gamma * s[2] - w2 * s[0] - p.epsilon * s[1];
    d[3] = 2.0 * p.gamma * s[3] - w2 * s[1] - p.epsilon * s[0];
  };
}

inline VectorField bateman_field(const BatemanParams& p) { return resonator_field({p.gamma, p.omega, 0.0}); }

/// L_B = x y' - y x' - 2 gamma x y, conserved by the Bateman pair.
inline double bateman_lb(const BatemanParams& p, std::span<const double> s) {
  return s[0] * s[3] - s[1] * s[2] - 2.0 * p.gamma * s[0] * s[1];
}

// ---------------------------------------------------------------------------
// Van der Pol-Duffing pair with Lorentz coupling
//
// M = sigma1 + alpha^2 I, A = (gamma/2) [[0,-1],[1,0]], F_i = a_i x_i + b_i x_i^3,
// V = omega^2 x1 x2 / 2 + beta (x1^2 + x2^2)/4 + g x1^3 x2.
// R = (gamma Q / 2) [[0,-1],[1,0]] and D = (gamma Q / 2) [[1, -alpha^2], [alpha^2, -1]]
// with Q = a1 + a2 + 3 (b1 x1^2 + b2 x2^2).

inline SystemSpec make_vdp_duffing(const VdpDuffingParams& p) {
  detail::require_finite({p.gamma, p.alpha, p.beta, p.omega, p.a1, p.a2, p.b1, p.b2, p.g}, "make_vdp_duffing");
  using detail::var;
  const Polynomial x1 = var(2, 0);
  const Polynomial x2 = var(2, 1);
  std::vector<Polynomial> f{p.a1 * x1 + p.b1 * x1.pow(3), p.a2 * x2 + p.b2 * x2.pow(3)};
  Polynomial v = 0.5 * p.omega * p.omega * (x1 * x2) + 0.25 * p.beta * (x1 * x1 + x2 * x2) + p.g * (x1.pow(3) * x2);
  RealMatrix mass = pauli::sigma1() + RealMatrix::identity(2) * (p.alpha * p.alpha);
  RealMatrix gauge = pauli::i_sigma2() * (-0.5 * p.gamma);
  return SystemSpec(std::move(mass), std::move(gauge), FieldMap::polynomial(std::move(f)),
                    Potential::polynomial(std::move(v)), "vdp_duffing",
                    {{"gamma", p.gamma}, {"alpha", p.alpha}, {"beta", p.beta}, {"omega", p.omega}, {"a1", p.a1},
                     {"a2", p.a2}, {"b1", p.b1}, {"b2", p.b2}, {"g", p.g}});
}

inline double vdp_q(const VdpDuffingParams& p, double x1, double x2) {
  return p.a1 + p.a2 + 3.0 * (p.b1 * x1 * x1 + p.b2 * x2 * x2);
}

/// Closed-form potential in the scaled coordinates X = S^{-1} O^T x, O = (sigma1 + sigma3)/sqrt2.
inline double vdp_transformed_potential(const VdpDuffingParams& p, double big_x1, double big_x2) {
  const double l1 = std::abs(p.alpha * p.alpha + 1.0);
  const double l2 = std::abs(p.alpha * p.alpha - 1.0);
  const double lam = std::sqrt(l1 * l2);
  const double omega_plus = (p.omega * p.omega + p.beta) * l1;
  const double omega_minus = (p.omega * p.omega - p.beta) * l2;
  const double x1s = big_x1 * big_x1;
  const double x2s = big_x2 * big_x2;
  return omega_plus / 4.0 * x1s + p.g * l1 * l1 / 4.0 * x1s * x1s - omega_minus / 4.0 * x2s -
         p.g * l2 * l2 / 4.0 * x2s * x2s + p.g * lam / 2.0 * big_x1 * big_x2 * (l1 * x1s - l2 * x2s);
}

// ---------------------------------------------------------------------------
// Three-particle extension with its stated potential
// V = omega^2 (2 x1 x2 + x3^2)/4 + beta (x1^2 + x2^2 + 2 x1 x3 + 2 x2 x3)/4 + alpha x1^3 x2 + delta x3^4 / 8.

inline SystemSpec make_duffing_triplet(const TripletParams& p) {
  detail::require_finite({p.gamma, p.alpha, p.beta, p.omega, p.a1, p.a2, p.b1, p.b2, p.delta}, "make_duffing_triplet");
  using detail::var;
  const Polynomial x1 = var(3, 0);
  const Polynomial x2 = var(3, 1);
  const Polynomial x3 = var(3, 2);
  std::vector<Polynomial> f{p.a1 * x1 + p.b1 * x1.pow(3), p.a2 * x2 + p.b2 * x2.pow(3), Polynomial(3)};
  Polynomial v = 0.25 * p.omega * p.omega * (2.0 * (x1 * x2) + x3 * x3) +
                 0.25 * p.beta * (x1 * x1 + x2 * x2 + 2.0 * (x1 * x3) + 2.0 * (x2 * x3)) +
                 p.alpha * (x1.pow(3) * x2) + (p.delta / 8.0) * x3.pow(4);
  const double a2 = p.alpha * p.alpha;
  RealMatrix mass{{a2, 1.0, 0.0}, {1.0, a2, 0.0}, {0.0, 0.0, 1.0}};
  RealMatrix gauge(3, 3);
  gauge(0, 1) = -0.5 * p.gamma;
  gauge(1, 0) = 0.5 * p.gamma;
  return SystemSpec(std::move(mass), std::move(gauge), FieldMap::polynomial(std::move(f)),
                    Potential::polynomial(std::move(v)), "duffing_triplet",
                    {{"gamma", p.gamma}, {"alpha", p.alpha}, {"beta", p.beta}, {"omega", p.omega}, {"a1", p.a1},
                     {"a2", p.a2}, {"b1", p.b1}, {"b2", p.b2}, {"delta", p.delta}});
}

// ---------------------------------------------------------------------------
// Scaled coupled Duffing pair
//
// M = sigma1/2, A = Gamma [[0,1],[-1,0]], F(x) = x and
// V = x y + s2 beta x^2/2 + s1 beta y^2/2 + alpha x^3 y give
// x'' + 2 Gamma x' + x + s1 beta y + alpha x^3 = 0,
// y'' - 2 Gamma y' + y + s2 beta x + 3 alpha x^2 y = 0.

inline SystemSpec make_duffing_hamiltonian(const DuffingParams& p) {
  detail::require_finite({p.Gamma, p.beta, p.alpha, p.sign1, p.sign2}, "make_duffing_hamiltonian");
  if (std::abs(std::abs(p.sign1) - 1.0) > 0 || std::abs(std::abs(p.sign2) - 1.0) > 0)
    throw ContractViolation("make_duffing_hamiltonian: sign1 and sign2 must be +1 or -1");
  using detail::var;
  const Polynomial x = var(2, 0);
  const Polynomial y = var(2, 1);
  Polynomial v = x * y + 0.5 * p.sign2 * p.beta * (x * x) + 0.5 * p.sign1 * p.beta * (y * y) + p.alpha * (x.pow(3) * y);
  return SystemSpec(pauli::sigma1() * 0.5, pauli::i_sigma2() * p.Gamma, FieldMap::identity(2),
                    Potential::polynomial(std::move(v)), "duffing",
                    {{"Gamma", p.Gamma}, {"beta", p.beta}, {"alpha", p.alpha}, {"sign1", p.sign1}, {"sign2", p.sign2}});
}

inline VectorField duffing_field(const DuffingParams& p) {
  return [p](std::span<const double> s, std::span<double> d) {
    const double x = s[0], y = s[1];
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -2.0 * p.Gamma * s[2] - x - p.sign1 * p.beta * y - p.alpha * x * x * x;
    d[3] = 2.0 * p.Gamma * s[3] - y - p.sign2 * p.beta * x - 3.0 * p.alpha * x * x * y;
  };
}

/// Analytic state Jacobian of duffing_field, for tangent-space propagation.
inline RealMatrix duffing_jacobian(const DuffingParams& p, std::span<const double> s) {
  const double x = s[0], y = s[1];
  RealMatrix j(4, 4);
  j(0, 2) = 1.0;
  j(1, 3) = 1.0;
  j(2, 0) = -1.0 - 3.0 * p.alpha * x * x;
  j(2, 1) = -p.sign1 * p.beta;
  j(2, 2) = -2.0 * p.Gamma;
  j(3, 0) = -p.sign2 * p.beta - 6.0 * p.alpha * x * y;
  j(3, 1) = -1.0 - 3.0 * p.alpha * x * x;
  j(3, 3) = 2.0 * p.Gamma;
  return j;
}

/// x'' + 2 gamma x' + omega^2 x + beta1 y + g x^3 = 0, y'' - 2 gamma y' + omega^2 y + beta2 x + 3 g x^2 y = 0.
inline VectorField duffing_raw_field(const DuffingRawParams& p) {
  return [p](std::span<const double> s, std::span<double> d) {
    const double x = s[0], y = s[1], w2 = p.omega * p.omega;
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -2.0 * p.gamma * s[2] - w2 * x - p.beta1 * y - p.g * x * x * x;
    d[3] = 2.0 * p.gamma * s[3] - w2 * y - p.beta2 * x - 3.0 * p.g * x * x * y;
  };
}

/**
 * @brief Time and amplitude rescaling that reduces the unscaled pair to (Gamma, beta, alpha).
 *
 * tau = omega t, X = sqrt|beta2| x, Y = sqrt|beta1| y.
 */
struct DuffingScaleMap {
  DuffingParams scaled;
  double time_factor = 1.0;  ///< tau = time_factor * t
  double x_factor = 1.0;
  double y_factor = 1.0;

  RealVector to_scaled(std::span<const double> s) const {
    return {x_factor * s[0], y_factor * s[1], x_factor * s[2] / time_factor, y_factor * s[3] / time_factor};
  }
  RealVector to_raw(std::span<const double> s) const {
    return {s[0] / x_factor, s[1] / y_factor, s[2] * time_factor / x_factor, s[3] * time_factor / y_factor};
  }
};

inline DuffingScaleMap duffing_scale_map(const DuffingRawParams& p) {
  if (p.beta1 == 0.0 || p.beta2 == 0.0) throw ContractViolation("duffing_scale_map: beta1 and beta2 must be nonzero");
  if (!(p.omega > 0.0)) throw ContractViolation("duffing_scale_map: omega must be positive");
  DuffingScaleMap m;
  const double w2 = p.omega * p.omega;
  m.scaled.Gamma = p.gamma / p.omega;
  m.scaled.beta = std::sqrt(std::abs(p.beta1) * std::abs(p.beta2)) / w2;
  m.scaled.alpha = p.g / (std::abs(p.beta2) * w2);
  m.scaled.sign1 = p.beta1 > 0.0 ? 1.0 : -1.0;
  m.scaled.sign2 = p.beta2 > 0.0 ? 1.0 : -1.0;
  m.time_factor = p.omega;
  m.x_factor = std::sqrt(std::abs(p.beta2));
  m.y_factor = std::sqrt(std::abs(p.beta1));
  return m;
}

struct EquilibriumPoint {
  std::string name;
  bool exists = false;
  RealVector state;  ///< (x, y, x', y'); velocities vanish at rest
};

/**
 * @brief The five closed-form equilibria P0, P1+, P1-, P2+, P2-.
 *
 * delta_pm^2 = (-2 pm sqrt(1 + 3 beta^2)) / (3 alpha),
 * eta_pm = -(delta_pm / (3 beta)) (1 pm sqrt(1 + 3 beta^2)).
 * A point whose delta^2 is not positive is reported with exists = false.
 * Equal signs s1 = s2 = -1 are handled by beta -> -beta.
 */
inline std::array<EquilibriumPoint, 5> duffing_equilibria(const DuffingParams& p) {
  if (p.sign1 != p.sign2) throw ContractViolation("duffing_equilibria: closed forms need sign1 == sign2");
  if (p.beta == 0.0) throw ContractViolation("duffing_equilibria: beta must be nonzero");
  const double beta = p.sign1 * p.beta;
  const double root = std::sqrt(1.0 + 3.0 * beta * beta);
  std::array<EquilibriumPoint, 5> out;
  out[0] = {"P0", true, {0.0, 0.0, 0.0, 0.0}};
  const char* names[2][2] = {{"P1+", "P1-"}, {"P2+", "P2-"}};
  for (int branch = 0; branch < 2; ++branch) {
    const double sgn = branch == 0 ? 1.0 : -1.0;
    const double delta_sq = p.alpha == 0.0 ? -1.0 : (-2.0 + sgn * root) / (3.0 * p.alpha);
    for (int sign = 0; sign < 2; ++sign) {
      EquilibriumPoint& e = out[1 + 2 * branch + sign];
      e.name = names[branch][sign];
      if (!(delta_sq > 0.0)) {
        e.exists = false;
        continue;
      }
      const double delta = std::sqrt(delta_sq);
      const double eta = -(delta / (3.0 * beta)) * (1.0 + sgn * root);
      const double s = sign == 0 ? 1.0 : -1.0;
      e.exists = true;
      e.state = {s * delta, s * eta, 0.0, 0.0};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Damped and anti-damped Duffing pair with unequal cubic strengths (no Hamiltonian)

inline VectorField make_duffing_nonhamiltonian(const DuffingNhParams& p) {
  detail::require_finite({p.Gamma, p.beta, p.alpha1, p.alpha2, p.omega}, "make_duffing_nonhamiltonian");
  return [p](std::span<const double> s, std::span<double> d) {
    const double x = s[0], y = s[1], w2 = p.omega * p.omega;
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -2.0 * p.Gamma * s[2] - w2 * x - p.beta * y - p.alpha1 * x * x * x;
    d[3] = 2.0 * p.Gamma * s[3] - w2 * y - p.beta * x - p.alpha2 * y * y * y;
  };
}

// ---------------------------------------------------------------------------
// Landau problem with balanced loss and gain
//
// M = (1/2) [[B + C, gamma], [gamma, B - C]], A = (1/2) [[0,1],[-1,0]], F(x) = x, V = 0.

enum class LandauRegion { I, II, III };

inline std::string to_string(LandauRegion r) {
  switch (r) {
    case LandauRegion::I: return "I";
    case LandauRegion::II: return "II";
    case LandauRegion::III: return "III";
  }
  return "?";
}

inline double landau_delta(const LandauParams& p) { return std::hypot(p.C, p.gamma); }

inline LandauRegion landau_region(const LandauParams& p) {
  const double delta = landau_delta(p);
  if (std::abs(std::abs(p.B) - delta) <= 1e-10 * std::max(1.0, delta))
    throw SingularMatrixError("landau_region: |B| equals sqrt(C^2 + gamma^2); the mass matrix is singular");
  if (p.B > delta) return LandauRegion::I;
  if (p.B < -delta) return LandauRegion::III;
  return LandauRegion::II;
}

/// Reduced cyclotron frequency sqrt(B^2 - C^2 - gamma^2), defined in Regions I and III.
inline double landau_frequency(const LandauParams& p) {
  if (landau_region(p) == LandauRegion::II)
    throw DomainError("landau_frequency: Region II has no oscillation frequency (|B| < sqrt(C^2 + gamma^2))");
  const double delta = landau_delta(p);
  return std::sqrt(p.B * p.B - delta * delta);
}

inline SystemSpec make_landau(const LandauParams& p) {
  detail::require_finite({p.B, p.C, p.gamma}, "make_landau");
  landau_region(p);
  RealMatrix mass{{0.5 * (p.B + p.C), 0.5 * p.gamma}, {0.5 * p.gamma, 0.5 * (p.B - p.C)}};
  return SystemSpec(std::move(mass), pauli::i_sigma2() * 0.5, FieldMap::identity(2), Potential::zero(2), "landau",
                    {{"B", p.B}, {"C", p.C}, {"gamma", p.gamma}});
}

/// x1'' = -gamma x1' + (B + C) x2',  x2'' = -(B - C) x1' + gamma x2'.
inline VectorField landau_field(const LandauParams& p) {
  return [p](std::span<const double> s, std::span<double> d) {
    d[0] = s[2];
    d[1] = s[3];
    d[2] = -p.gamma * s[2] + (p.B + p.C) * s[3];
    d[3] = -(p.B - p.C) * s[2] + p.gamma * s[3];
  };
}

// ---------------------------------------------------------------------------
// Pairwise systems with M = I_m (x) sigma1 and constant loss-gain
//
// z_i^- = (x_{2i-1} - x_{2i}) / sqrt2, z_i^+ = (x_{2i-1} + x_{2i}) / sqrt2.
// The engine's potential is half the potential of the z-equations, so that
// z_i^+'' - 2 gamma z_i^-' + dU/dz_i^+ = 0 and z_i^-'' - 2 gamma z_i^+' - dU/dz_i^- = 0.

struct PairCoordinates {
  double z_plus, z_minus, z_plus_dot, z_minus_dot;
};

inline PairCoordinates pair_coordinates(std::span<const double> s, std::size_t pair) {
  const std::size_t n = s.size() / 2;
  const double r = std::numbers::sqrt2 / 2.0;
  const double a = s[2 * pair], b = s[2 * pair + 1];
  const double va = s[n + 2 * pair], vb = s[n + 2 * pair + 1];
  return {r * (a + b), r * (a - b), r * (va + vb), r * (va - vb)};
}

/// Writes (z+, z-, z+', z-') of one pair back into the original coordinates.
inline void set_pair_coordinates(std::span<double> s, std::size_t pair, const PairCoordinates& z) {
  const std::size_t n = s.size() / 2;
  const double r = std::numbers::sqrt2 / 2.0;
  s[2 * pair] = r * (z.z_plus + z.z_minus);
  s[2 * pair + 1] = r * (z.z_plus - z.z_minus);
  s[n + 2 * pair] = r * (z.z_plus_dot + z.z_minus_dot);
  s[n + 2 * pair + 1] = r * (z.z_plus_dot - z.z_minus_dot);
}

/// U = sum_i [-2 omega0^2 (z_i^-)^2 - alpha (z_i^-)^4 / 4], engine potential U/2.
inline SystemSpec make_translational_cubic(const TranslationalCubicParams& p) {
  detail::require_finite({p.gamma, p.omega0, p.alpha}, "make_translational_cubic");
  if (p.m == 0) throw ContractViolation("make_translational_cubic: m must be >= 1");
  const std::size_t n = 2 * p.m;
  Polynomial v(n);
  for (std::size_t i = 0; i < p.m; ++i) {
    const Polynomial d = detail::var(n, 2 * i) - detail::var(n, 2 * i + 1);  // sqrt2 z^-
    const Polynomial d2 = d * d;
    v += (-0.5 * p.omega0 * p.omega0) * d2 + (-p.alpha / 32.0) * (d2 * d2);
  }
  SystemSpec base = build_pairwise_representation(p.m, p.gamma, 0.0, {identity_pair()}, Potential::polynomial(v),
                                                  "translational_cubic");
  return SystemSpec(base.mass_matrix(), base.gauge_matrix(), base.field_map(), base.potential(), "translational_cubic",
                    {{"m", static_cast<double>(p.m)}, {"gamma", p.gamma}, {"omega0", p.omega0}, {"alpha", p.alpha}});
}

/// Pi_i = z_i^+' - 2 gamma z_i^-, conserved under translations x_{2i-1}, x_{2i} -> + eta_i.
inline double translational_pi(const TranslationalCubicParams& p, std::span<const double> s, std::size_t pair) {
  const PairCoordinates z = pair_coordinates(s, pair);
  return z.z_plus_dot - 2.0 * p.gamma * z.z_minus;
}

struct CubicCnSolution {
  double z1;       ///< A cn(Omega t, k)
  double z1_dot;
  double z_plus;   ///< C + (2 gamma A / (Omega k)) asin(k sn(Omega t, k))
  double z_plus_dot;
  double omega_sq;
  double big_omega;
  double k;
  double period;   ///< 4 K(k) / Omega
};

/**
 * @brief Closed-form Region-I solution of z'' + omega^2 z + alpha z^3 = 0 with z(0) = A, z'(0) = 0.
 *
 * omega^2 = 4 (omega0^2 - gamma^2), Omega = sqrt(omega^2 + alpha A^2),
 * k^2 = alpha A^2 / (2 Omega^2). z^+ integrates z^+' = 2 gamma z_1, which
 * holds when Pi_1 = 0, starting from z^+(0) = c.
 */
inline CubicCnSolution cubic_cn_solution(double amplitude, const TranslationalCubicParams& p, double t,
                                         double c = 0.0) {
  const double omega_sq = 4.0 * (p.omega0 * p.omega0 - p.gamma * p.gamma);
  if (!(omega_sq > 0.0))
    throw DomainError("cubic_cn_solution: Region I needs omega^2 = 4(omega0^2 - gamma^2) > 0, got " +
                      std::to_string(omega_sq));
  if (!(p.alpha >= 0.0)) throw DomainError("cubic_cn_solution: Region I needs alpha > 0");
  const double big_omega = std::sqrt(omega_sq + p.alpha * amplitude * amplitude);
  const double k_sq = p.alpha * amplitude * amplitude / (2.0 * big_omega * big_omega);
  if (!(k_sq >= 0.0 && k_sq < 1.0)) throw DomainError("cubic_cn_solution: Region I needs 0 < k^2 < 1");
  const double k = std::sqrt(k_sq);
  const JacobiElliptic e = jacobi_elliptic(big_omega * t, k);
  CubicCnSolution out{};
  out.omega_sq = omega_sq;
  out.big_omega = big_omega;
  out.k = k;
  out.period = 4.0 * complete_elliptic_k(k) / big_omega;
  out.z1 = amplitude * e.cn;
  out.z1_dot = -amplitude * big_omega * e.sn * e.dn;
  const double arc = k < 1e-8 ? e.sn : std::asin(k * e.sn) / k;
  out.z_plus = c + 2.0 * p.gamma * amplitude / big_omega * arc;
  out.z_plus_dot = 2.0 * p.gamma * out.z1;
  return out;
}

/// Initial state with z_1^-(0) = A, z_1^-'(0) = 0, z_1^+(0) = c, z_1^+'(0) = 2 gamma A (so Pi_1 = 0).
inline RealVector cubic_initial_state(const TranslationalCubicParams& p, double amplitude, double c = 0.0) {
  RealVector s(4 * p.m, 0.0);
  set_pair_coordinates(s, 0, {c, amplitude, 2.0 * p.gamma * amplitude, 0.0});
  return s;
}

/// U(r) = omega^2 r^2 / 2 + alpha r^4 / 4 with r^2 = 2 sum_i x_{2i-1} x_{2i}; engine potential U/2.
inline SystemSpec make_rotational_quartic(const RotationalQuarticParams& p) {
  detail::require_finite({p.gamma, p.omega, p.alpha}, "make_rotational_quartic");
  if (p.m == 0) throw ContractViolation("make_rotational_quartic: m must be >= 1");
  const std::size_t n = 2 * p.m;
  Polynomial s(n);
  for (std::size_t i = 0; i < p.m; ++i) s += detail::var(n, 2 * i) * detail::var(n, 2 * i + 1);
  Polynomial v = (0.5 * p.omega * p.omega) * s + (0.5 * p.alpha) * (s * s);
  SystemSpec base = build_pairwise_representation(p.m, p.gamma, 0.0, {identity_pair()}, Potential::polynomial(v),
                                                  "rotational_quartic");
  return SystemSpec(base.mass_matrix(), base.gauge_matrix(), base.field_map(), base.potential(), "rotational_quartic",
                    {{"m", static_cast<double>(p.m)}, {"gamma", p.gamma}, {"omega", p.omega}, {"alpha", p.alpha}});
}

/// L_i = z_i^+' z_i^- - z_i^+ z_i^-' + gamma ((z_i^+)^2 - (z_i^-)^2).
inline double rotational_l(const RotationalQuarticParams& p, std::span<const double> s, std::size_t pair) {
  const PairCoordinates z = pair_coordinates(s, pair);
  return z.z_plus_dot * z.z_minus - z.z_plus * z.z_minus_dot +
         p.gamma * (z.z_plus * z.z_plus - z.z_minus * z.z_minus);
}

/// q_i'' = -(omega^2 - gamma^2) q_i - alpha q^2 q_i on state (q_1..q_m, q_1'..q_m').
inline VectorField rotational_q_field(const RotationalQuarticParams& p) {
  return [p](std::span<const double> s, std::span<double> d) {
    const std::size_t m = s.size() / 2;
    double q2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) q2 += s[i] * s[i];
    const double big_omega_sq = p.omega * p.omega - p.gamma * p.gamma;
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = s[m + i];
      d[m + i] = -big_omega_sq * s[i] - p.alpha * q2 * s[i];
    }
  };
}

/// Original-coordinate trajectory from a q trajectory via z^+ = q cosh(gamma t), z^- = q sinh(gamma t).
inline Trajectory rotational_reconstruct(const Trajectory& q_traj, double gamma) {
  Trajectory out;
  out.label = "rotational_reconstruct";
  out.config = q_traj.config;
  for (std::size_t r = 0; r < q_traj.size(); ++r) {
    const double t = q_traj.times[r];
    const auto& q = q_traj.states[r];
    const auto& qd = q_traj.derivatives[r];
    const std::size_t m = q.size() / 2;
    const double ch = std::cosh(gamma * t), sh = std::sinh(gamma * t);
    RealVector s(4 * m, 0.0);
    RealVector d(4 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double qi = q[i], vi = q[m + i], ai = qd[m + i];
      PairCoordinates z{qi * ch, qi * sh, vi * ch + gamma * qi * sh, vi * sh + gamma * qi * ch};
      set_pair_coordinates(s, i, z);
      PairCoordinates dz{z.z_plus_dot, z.z_minus_dot, ai * ch + 2.0 * gamma * vi * sh + gamma * gamma * qi * ch,
                         ai * sh + 2.0 * gamma * vi * ch + gamma * gamma * qi * sh};
      set_pair_coordinates(d, i, dz);
    }
    out.push(t, std::move(s), std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Complex amplitude models, stored as interleaved (Re psi_1, Im psi_1, Re psi_2, ...)

inline RealVector to_interleaved(std::span<const Complex> psi) {
  RealVector out;
  out.reserve(2 * psi.size());
  for (const auto& z : psi) {
    out.push_back(z.real());
    out.push_back(z.imag());
  }
  return out;
}

inline ComplexVector from_interleaved(std::span<const double> s) {
  if (s.size() % 2) throw ContractViolation("from_interleaved: odd length");
  ComplexVector out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(s[2 * i], s[2 * i + 1]);
  return out;
}

/// psi' = -Gamma0 sigma3 psi + i beta sigma1 psi + i alpha (|psi1|^2 psi1, 2|psi1|^2 psi2 + psi1^2 conj(psi1)).
inline VectorField make_dimer(const DimerParams& p) {
  detail::require_finite({p.Gamma0, p.beta, p.alpha}, "make_dimer");
  return [p](std::span<const double> s, std::span<double> d) {
    const Complex i1(0.0, 1.0);
    const Complex psi1(s[0], s[1]);
    const Complex psi2(s[2], s[3]);
    const double n1 = std::norm(psi1);
    const Complex nl1 = n1 * psi1;
    const Complex nl2 = 2.0 * n1 * psi2 + psi1 * psi1 * std::conj(psi1);
    const Complex d1 = -p.Gamma0 * psi1 + i1 * p.beta * psi2 + i1 * p.alpha * nl1;
    const Complex d2 = p.Gamma0 * psi2 + i1 * p.beta * psi1 + i1 * p.alpha * nl2;
    d[0] = d1.real();
    d[1] = d1.imag();
    d[2] = d2.real();
    d[3] = d2.imag();
  };
}

/// Stokes variables Z_a = psi^dagger sigma_a psi / 2 and R = psi^dagger psi / 2.
struct Stokes {
  double z1, z2, z3, r;
};

inline Stokes stokes_variables(std::span<const double> s) {
  const Complex p1(s[0], s[1]);
  const Complex p2(s[2], s[3]);
  const Complex cross = std::conj(p1) * p2;
  return {cross.real(), cross.imag(), 0.5 * (std::norm(p1) - std::norm(p2)), 0.5 * (std::norm(p1) + std::norm(p2))};
}

/// A = [[i Gamma, conj(beta)], [beta, -i Gamma]].
inline ComplexMatrix oligomer_a(const OligomerParams& p) {
  const Complex i1(0.0, 1.0);
  return ComplexMatrix{{i1 * p.Gamma, std::conj(p.beta)}, {p.beta, -i1 * p.Gamma}};
}

/// M = [[alpha0, conj(alpha)], [alpha, alpha0]].
inline ComplexMatrix oligomer_m(const OligomerParams& p) {
  return ComplexMatrix{{Complex(p.alpha0, 0.0), std::conj(p.alpha)}, {p.alpha, Complex(p.alpha0, 0.0)}};
}

/// max |A^dagger M - M A|; zero exactly when A is M-pseudo-hermitian.
inline double pseudo_hermiticity_residual(const ComplexMatrix& a, const ComplexMatrix& m) {
  return max_abs(a.adjoint() * m - m * a);
}

inline Complex quadratic_form(const ComplexMatrix& m, std::span<const Complex> psi) {
  const ComplexVector mp = m * psi;
  return dot_conj(psi, mp);
}

/// psi' = -i A psi + i delta (psi^dagger M psi)^n psi for any dimension.
inline VectorField oligomer_field(const ComplexMatrix& a, const ComplexMatrix& m, double delta, int power) {
  return [a, m, delta, power](std::span<const double> s, std::span<double> d) {
    const Complex i1(0.0, 1.0);
    const ComplexVector psi = from_interleaved(s);
    const double q = quadratic_form(m, psi).real();
    const ComplexVector ap = a * psi;
    const double nl = delta * std::pow(q, power);
    for (std::size_t k = 0; k < psi.size(); ++k) {
      const Complex v = -i1 * ap[k] + i1 * nl * psi[k];
      d[2 * k] = v.real();
      d[2 * k + 1] = v.imag();
    }
  };
}

inline VectorField make_oligomer_field(const OligomerParams& p) {
  return oligomer_field(oligomer_a(p), oligomer_m(p), p.delta, p.power);
}

/**
 * @brief Exact oligomer evolution psi(t) = exp(-i A t) W exp(i delta C^n t), C = W^dagger M W.
 *
 * theta_sq = |beta|^2 - Gamma^2; theta = sqrt(theta_sq) is imaginary when
 * |beta| < Gamma and the motion is then unbounded.
 */
struct OligomerSolution {
  ComplexVector w;
  double c = 0.0;
  double theta_sq = 0.0;
  bool positive_definite_metric = false;
  std::function<ComplexVector(double)> evaluate;
};

inline OligomerSolution make_oligomer(const OligomerParams& p, ComplexVector w) {
  if (w.size() != 2) throw ContractViolation("make_oligomer: the closed form is for two components");
  if (p.power < 0) throw ContractViolation("make_oligomer: power must be >= 0");
  const ComplexMatrix a = oligomer_a(p);
  const ComplexMatrix m = oligomer_m(p);
  const double residual = pseudo_hermiticity_residual(a, m);
  if (residual > 1e-10 * std::max(1.0, max_abs(a) * max_abs(m))) {
    throw ContractViolation("make_oligomer: A is not M-pseudo-hermitian (residual " + std::to_string(residual) +
                            "); use the numerical field instead");
  }
  OligomerSolution sol;
  sol.w = w;
  sol.c = quadratic_form(m, w).real();
  sol.theta_sq = std::norm(p.beta) - p.Gamma * p.Gamma;
  sol.positive_definite_metric = p.alpha0 > std::abs(p.alpha);
  const Complex theta = std::sqrt(Complex(sol.theta_sq, 0.0));
  const double phase_rate = p.delta * std::pow(sol.c, p.power);
  sol.evaluate = [p, w, theta, phase_rate](double t) {
    const Complex i1(0.0, 1.0);
    const Complex cs = std::cos(theta * t);
    const Complex sn_over = std::abs(theta) < 1e-12 ? Complex(t, 0.0) : std::sin(theta * t) / theta;
    const Complex phase = std::exp(i1 * phase_rate * t);
    const Complex psi1 = phase * (w[0] * (cs + p.Gamma * sn_over) - i1 * w[1] * std::conj(p.beta) * sn_over);
    const Complex psi2 = phase * (-i1 * w[0] * p.beta * sn_over + w[1] * (cs - p.Gamma * sn_over));
    return ComplexVector{psi1, psi2};
  };
  return sol;
}

/// Same solution for any size through the matrix exponential; pseudo-hermiticity is checked.
inline std::function<ComplexVector(double)> oligomer_exact_general(const ComplexMatrix& a, const ComplexMatrix& m,
                                                                   double delta, int power, ComplexVector w) {
  const double residual = pseudo_hermiticity_residual(a, m);
  if (residual > 1e-10 * std::max(1.0, max_abs(a) * max_abs(m)))
    throw ContractViolation("oligomer_exact_general: A is not M-pseudo-hermitian");
  const double c = quadratic_form(m, w).real();
  const double rate = delta * std::pow(c, power);
  return [a, w, rate](double t) {
    ComplexVector psi = mat_exp(a, t) * w;
    const Complex phase = std::exp(Complex(0.0, rate * t));
    for (auto& z : psi) z *= phase;
    return psi;
  };
}

}  // namespace lossgain
