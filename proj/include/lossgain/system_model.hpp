#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/core/polynomial.hpp"
#include "lossgain/numeric/linear_solve.hpp"

namespace lossgain {

using ParameterMap = std::map<std::string, double>;

/// Position-velocity state xi = (x_1..x_N, v_1..v_N) at time t.
struct StateVector {
  RealVector xi;
  double t = 0.0;

  StateVector() = default;
  explicit StateVector(RealVector values, double time = 0.0) : xi(std::move(values)), t(time) {}

  std::size_t particles() const noexcept { return xi.size() / 2; }
  std::span<const double> positions() const { return {xi.data(), particles()}; }
  std::span<const double> velocities() const { return {xi.data() + particles(), particles()}; }
};

/**
 * @brief The N-component map F(x) entering the generalized momenta Pi = P + A F(x).
 *
 * Either polynomial (exact Jacobian, serializable) or an arbitrary callable
 * with an optional closed-form Jacobian.
 */
class FieldMap {
 public:
  using ValueFn = std::function<RealVector(std::span<const double>)>;
  using JacobianFn = std::function<RealMatrix(std::span<const double>)>;

  FieldMap() = default;
  FieldMap(ValueFn value, JacobianFn jacobian = {}) : value_(std::move(value)), jacobian_(std::move(jacobian)) {}

  static FieldMap polynomial(std::vector<Polynomial> components) {
    FieldMap f;
    f.components_ = std::make_shared<const std::vector<Polynomial>>(std::move(components));
    auto comps = f.components_;
    std::vector<std::vector<Polynomial>> partials;
    for (const auto& c : *comps) {
      std::vector<Polynomial> row;
      for (std::size_t j = 0; j < c.variables(); ++j) row.push_back(c.derivative(j));
      partials.push_back(std::move(row));
    }
    auto d = std::make_shared<const std::vector<std::vector<Polynomial>>>(std::move(partials));
    f.value_ = [comps](std::span<const double> x) {
      RealVector out;
      out.reserve(comps->size());
      for (const auto& c : *comps) out.push_back(c(x));
      return out;
    };
    f.jacobian_ = [d](std::span<const double> x) {
      RealMatrix j(d->size(), x.size());
      for (std::size_t r = 0; r < d->size(); ++r)
        for (std::size_t c = 0; c < x.size(); ++c) j(r, c) = (*d)[r][c](x);
      return j;
    };
    return f;
  }

  /// F(x) = x.
  static FieldMap identity(std::size_t n) {
    std::vector<Polynomial> comps;
    for (std::size_t i = 0; i < n; ++i) comps.push_back(Polynomial::variable(n, i));
    return polynomial(std::move(comps));
  }

  bool has_value() const noexcept { return static_cast<bool>(value_); }
  bool has_closed_form_jacobian() const noexcept { return static_cast<bool>(jacobian_); }
  const std::vector<Polynomial>* polynomial_components() const noexcept { return components_.get(); }

  RealVector operator()(std::span<const double> x) const { return value_(x); }
  RealMatrix closed_form_jacobian(std::span<const double> x) const { return jacobian_(x); }

 private:
  ValueFn value_;
  JacobianFn jacobian_;
  std::shared_ptr<const std::vector<Polynomial>> components_;
};

/// Scalar potential V(x) with optional closed-form gradient.
class Potential {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<RealVector(std::span<const double>)>;

  Potential() = default;
  Potential(ValueFn value, GradientFn gradient = {}) : value_(std::move(value)), gradient_(std::move(gradient)) {}

  static Potential polynomial(Polynomial p) {
    Potential v;
    auto poly = std::make_shared<const Polynomial>(std::move(p));
    std::vector<Polynomial> grads;
    for (std::size_t j = 0; j < poly->variables(); ++j) grads.push_back(poly->derivative(j));
    auto g = std::make_shared<const std::vector<Polynomial>>(std::move(grads));
    v.poly_ = poly;
    v.value_ = [poly](std::span<const double> x) { return (*poly)(x); };
    v.gradient_ = [g](std::span<const double> x) {
      RealVector out;
      out.reserve(g->size());
      for (const auto& c : *g) out.push_back(c(x));
      return out;
    };
    return v;
  }

  static Potential zero(std::size_t n) { return polynomial(Polynomial(n)); }

  bool has_value() const noexcept { return static_cast<bool>(value_); }
  bool has_closed_form_gradient() const noexcept { return static_cast<bool>(gradient_); }
  const Polynomial* polynomial_form() const noexcept { return poly_.get(); }

  double operator()(std::span<const double> x) const { return value_(x); }
  RealVector closed_form_gradient(std::span<const double> x) const { return gradient_(x); }

 private:
  ValueFn value_;
  GradientFn gradient_;
  std::shared_ptr<const Polynomial> poly_;
};

/**
 * @brief Generic balanced loss-gain Hamiltonian H = Pi^T M Pi + V(x), Pi = P + A F(x).
 *
 * Immutable after construction. The constructor rejects a non-symmetric or
 * singular mass matrix and a non-antisymmetric gauge matrix, and caches the
 * inverse mass matrix.
 */
class SystemSpec {
 public:
  SystemSpec(RealMatrix mass, RealMatrix gauge, FieldMap field, Potential potential, std::string label = {},
             ParameterMap params = {})
      : mass_(std::move(mass)),
        gauge_(std::move(gauge)),
        field_(std::move(field)),
        potential_(std::move(potential)),
        label_(std::move(label)),
        params_(std::move(params)) {
    const std::size_t n = mass_.rows();
    if (n == 0 || !mass_.is_square()) throw ContractViolation("SystemSpec: mass matrix must be square and non-empty");
    if (gauge_.rows() != n || gauge_.cols() != n) throw ContractViolation("SystemSpec: gauge matrix has wrong shape");
    if (!all_finite(mass_) || !all_finite(gauge_)) throw ContractViolation("SystemSpec: non-finite matrix entry");
    if (!is_symmetric(mass_, 1e-12)) throw ContractViolation("SystemSpec: mass matrix is not symmetric");
    if (!is_antisymmetric(gauge_, 1e-12)) throw ContractViolation("SystemSpec: gauge matrix is not antisymmetric");
    if (!field_.has_value()) throw ContractViolation("SystemSpec: missing field map");
    if (!potential_.has_value()) throw ContractViolation("SystemSpec: missing potential");
    mass_inverse_ = inverse(mass_);
  }

  std::size_t n() const noexcept { return mass_.rows(); }
  const RealMatrix& mass_matrix() const noexcept { return mass_; }
  const RealMatrix& mass_inverse() const noexcept { return mass_inverse_; }
  const RealMatrix& gauge_matrix() const noexcept { return gauge_; }
  const FieldMap& field_map() const noexcept { return field_; }
  const Potential& potential() const noexcept { return potential_; }
  const std::string& label() const noexcept { return label_; }
  const ParameterMap& params() const noexcept { return params_; }

 private:
  RealMatrix mass_;
  RealMatrix gauge_;
  FieldMap field_;
  Potential potential_;
  std::string label_;
  ParameterMap params_;
  RealMatrix mass_inverse_;
};

/// J, R = AJ - (AJ)^T and the loss-gain matrix D = M R at one position.
struct DerivedMatrices {
  RealMatrix jacobian;
  RealMatrix r;
  RealMatrix d;
  RealMatrix d_diag;          ///< diagonal part: loss and gain
  RealMatrix d_sym_offdiag;   ///< symmetric, zero diagonal: non-Lorentzian velocity coupling
  RealMatrix d_antisym;       ///< antisymmetric: Lorentz coupling
  double trace = 0.0;
};

namespace detail {
inline void check_position(const SystemSpec& spec, std::span<const double> x) {
  if (x.size() != spec.n()) {
    throw ContractViolation("position has length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(spec.n()));
  }
  if (!all_finite(x)) throw ContractViolation("position has a non-finite entry");
}
}  // namespace detail

/// J_ij = dF_i/dx_j; closed form when supplied, central differences otherwise.
inline RealMatrix jacobian_of_F(const SystemSpec& spec, std::span<const double> x) {
  detail::check_position(spec, x);
  const FieldMap& f = spec.field_map();
  RealMatrix j = f.has_closed_form_jacobian()
                     ? f.closed_form_jacobian(x)
                     : fd_jacobian([&](std::span<const double> p) { return f(p); }, x);
  if (!all_finite(j)) throw EvaluationError("field map Jacobian is not finite at the requested position");
  return j;
}

/// Central-difference Jacobian of F regardless of any closed form.
inline RealMatrix jacobian_of_F_numeric(const SystemSpec& spec, std::span<const double> x) {
  detail::check_position(spec, x);
  return fd_jacobian([&](std::span<const double> p) { return spec.field_map()(p); }, x);
}

inline RealMatrix r_matrix(const SystemSpec& spec, std::span<const double> x) {
  const RealMatrix aj = spec.gauge_matrix() * jacobian_of_F(spec, x);
  return aj - aj.transpose();
}

inline DerivedMatrices derive_matrices(const SystemSpec& spec, std::span<const double> x) {
  DerivedMatrices out;
  out.jacobian = jacobian_of_F(spec, x);
  const RealMatrix aj = spec.gauge_matrix() * out.jacobian;
  out.r = aj - aj.transpose();
  out.d = spec.mass_matrix() * out.r;
  const std::size_t n = spec.n();
  out.d_diag = RealMatrix(n, n);
  out.d_sym_offdiag = RealMatrix(n, n);
  out.d_antisym = RealMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sym = 0.5 * (out.d(i, j) + out.d(j, i));
      if (i == j) {
        out.d_diag(i, i) = out.d(i, i);
      } else {
        out.d_sym_offdiag(i, j) = sym;
      }
      out.d_antisym(i, j) = 0.5 * (out.d(i, j) - out.d(j, i));
    }
  }
  out.trace = out.d.trace();
  return out;
}

/// dV/dx; closed form when supplied, central differences otherwise.
inline RealVector potential_gradient(const SystemSpec& spec, std::span<const double> x) {
  detail::check_position(spec, x);
  const Potential& v = spec.potential();
  RealVector g = v.has_closed_form_gradient() ? v.closed_form_gradient(x)
                                              : fd_gradient([&](std::span<const double> p) { return v(p); }, x);
  if (!all_finite(g)) throw EvaluationError("potential gradient is not finite at the requested position");
  return g;
}

inline RealVector potential_gradient_numeric(const SystemSpec& spec, std::span<const double> x) {
  detail::check_position(spec, x);
  return fd_gradient([&](std::span<const double> p) { return spec.potential()(p); }, x);
}

struct BalanceReport {
  bool balanced = false;
  double max_abs_trace = 0.0;
};

/// Balance holds when |tr D(x)| <= 1e-10 at every sample.
inline BalanceReport balance_check(const std::function<RealMatrix(std::span<const double>)>& d_of_x,
                                   std::span<const RealVector> samples) {
  if (samples.empty()) throw ContractViolation("balance_check: empty sample set");
  BalanceReport report;
  for (const auto& x : samples) {
    report.max_abs_trace = std::max(report.max_abs_trace, std::abs(d_of_x(x).trace()));
  }
  report.balanced = report.max_abs_trace <= 1e-10;
  return report;
}

inline BalanceReport balance_check(const SystemSpec& spec, std::span<const RealVector> samples) {
  return balance_check([&](std::span<const double> x) { return derive_matrices(spec, x).d; }, samples);
}

/// Writes (v, 2 M R v - 2 M dV/dx) for state (x, v).
inline void eom_rhs_into(const SystemSpec& spec, std::span<const double> xi, std::span<double> out) {
  const std::size_t n = spec.n();
  if (xi.size() != 2 * n || out.size() != 2 * n) throw ContractViolation("eom_rhs: state length must be 2N");
  const auto x = xi.subspan(0, n);
  const auto v = xi.subspan(n, n);
  const RealMatrix d = spec.mass_matrix() * r_matrix(spec, x);
  const RealVector grad = potential_gradient(spec, x);
  const RealVector dv = d * v;
  const RealVector mg = spec.mass_matrix() * grad;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v[i];
    out[n + i] = 2.0 * dv[i] - 2.0 * mg[i];
  }
}

inline RealVector eom_rhs(const SystemSpec& spec, const StateVector& s) {
  RealVector out(s.xi.size());
  eom_rhs_into(spec, s.xi, out);
  return out;
}

/// The equations of motion of spec as a VectorField (captures a copy of spec).
inline VectorField system_field(const SystemSpec& spec) {
  return [spec](std::span<const double> y, std::span<double> dy) { eom_rhs_into(spec, y, dy); };
}

/// Pi = M^{-1} v / 2, the generalized momenta of state s.
inline RealVector generalized_momenta(const SystemSpec& spec, const StateVector& s) {
  if (s.xi.size() != 2 * spec.n()) throw ContractViolation("generalized_momenta: state length must be 2N");
  RealVector pi = spec.mass_inverse() * RealVector(s.velocities().begin(), s.velocities().end());
  for (double& p : pi) p *= 0.5;
  return pi;
}

/// H = Pi^T M Pi + V(x).
inline double hamiltonian_value(const SystemSpec& spec, const StateVector& s) {
  const RealVector pi = generalized_momenta(spec, s);
  const RealVector mpi = spec.mass_matrix() * pi;
  return dot(pi, mpi) + spec.potential()(s.positions());
}

/// Canonical momenta P = Pi - A F(x).
inline RealVector canonical_momenta(const SystemSpec& spec, const StateVector& s) {
  RealVector pi = generalized_momenta(spec, s);
  const RealVector af = spec.gauge_matrix() * spec.field_map()(s.positions());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] -= af[i];
  return pi;
}

/// Hamilton's equations in canonical coordinates (x, P), for symplectic consistency checks.
inline RealVector hamiltonian_vector_field(const SystemSpec& spec, std::span<const double> x, std::span<const double> p) {
  const std::size_t n = spec.n();
  auto h = [&](std::span<const double> z) {
    RealVector pi(z.begin() + static_cast<std::ptrdiff_t>(n), z.end());
    const RealVector af = spec.gauge_matrix() * spec.field_map()(z.subspan(0, n));
    for (std::size_t i = 0; i < n; ++i) pi[i] += af[i];
    return dot(pi, spec.mass_matrix() * pi) + spec.potential()(z.subspan(0, n));
  };
  RealVector z(x.begin(), x.end());
  z.insert(z.end(), p.begin(), p.end());
  const RealVector g = fd_gradient(h, z);
  RealVector out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = g[n + i];       // dx/dt = dH/dP
    out[n + i] = -g[i];      // dP/dt = -dH/dx
  }
  return out;
}

/// One coordinate pair's field (F_{2i-1}, F_{2i}) as a function of (x_{2i-1}, x_{2i}).
struct PairField {
  std::function<std::array<double, 2>(double, double)> value;
  std::function<std::array<double, 4>(double, double)> jacobian;  ///< row-major 2x2, optional
  std::vector<Polynomial> polynomial;  ///< optional two-variable form, enables serialization
};

inline PairField identity_pair() {
  PairField f;
  f.value = [](double a, double b) { return std::array<double, 2>{a, b}; };
  f.jacobian = [](double, double) { return std::array<double, 4>{1.0, 0.0, 0.0, 1.0}; };
  f.polynomial = {Polynomial::variable(2, 0), Polynomial::variable(2, 1)};
  return f;
}

namespace detail {
inline Polynomial embed_pair(const Polynomial& p, std::size_t n, std::size_t first) {
  Polynomial out(n);
  for (const auto& [powers, c] : p.terms()) {
    Polynomial::Powers pw(n, 0);
    pw[first] = powers[0];
    pw[first + 1] = powers[1];
    out.add_term(c, pw);
  }
  return out;
}
}  // namespace detail

/**
 * @brief Pairwise-balanced representation for N = 2m particles.
 *
 * M = I_m (x) sigma1 + alpha^2 I_2m and A = (-i gamma/2) I_m (x) sigma2, the
 * latter in its real antisymmetric form. Each pair field depends only on its
 * own two coordinates, so the loss-gain matrix is D = gamma chi (x) sigma3 +
 * alpha^2 R with chi = diag(Q_i / 2), Q_i the trace of the pair Jacobian.
 */
inline SystemSpec build_pairwise_representation(std::size_t m, double gamma, double alpha,
                                                std::vector<PairField> pairs, Potential potential = {},
                                                std::string label = "pairwise") {
  if (m == 0) throw ContractViolation("build_pairwise_representation: m must be >= 1");
  if (pairs.size() == 1 && m > 1) pairs.assign(m, pairs.front());
  if (pairs.size() != m) throw ContractViolation("build_pairwise_representation: need one pair field per pair");
  for (const auto& p : pairs)
    if (!p.value) throw ContractViolation("build_pairwise_representation: empty pair field");
  const std::size_t n = 2 * m;
  const RealMatrix im = RealMatrix::identity(m);
  RealMatrix mass = kron(im, pauli::sigma1()) + RealMatrix::identity(n) * (alpha * alpha);
  // -i sigma2 = [[0,-1],[1,0]]
  RealMatrix gauge = kron(im, pauli::i_sigma2()) * (-0.5 * gamma);

  FieldMap field;
  const bool all_poly = std::all_of(pairs.begin(), pairs.end(), [](const PairField& p) { return p.polynomial.size() == 2; });
  if (all_poly) {
    std::vector<Polynomial> comps;
    for (std::size_t i = 0; i < m; ++i) {
      comps.push_back(detail::embed_pair(pairs[i].polynomial[0], n, 2 * i));
      comps.push_back(detail::embed_pair(pairs[i].polynomial[1], n, 2 * i));
    }
    field = FieldMap::polynomial(std::move(comps));
  } else {
    auto shared = std::make_shared<const std::vector<PairField>>(std::move(pairs));
    FieldMap::JacobianFn jac;
    const bool all_jac = std::all_of(shared->begin(), shared->end(), [](const PairField& p) { return static_cast<bool>(p.jacobian); });
    if (all_jac) {
      jac = [shared, n](std::span<const double> x) {
        RealMatrix j(n, n);
        for (std::size_t i = 0; i < shared->size(); ++i) {
          const auto b = (*shared)[i].jacobian(x[2 * i], x[2 * i + 1]);
          j(2 * i, 2 * i) = b[0];
          j(2 * i, 2 * i + 1) = b[1];
          j(2 * i + 1, 2 * i) = b[2];
          j(2 * i + 1, 2 * i + 1) = b[3];
        }
        return j;
      };
    }
    field = FieldMap(
        [shared](std::span<const double> x) {
          RealVector out(x.size());
          for (std::size_t i = 0; i < shared->size(); ++i) {
            const auto v = (*shared)[i].value(x[2 * i], x[2 * i + 1]);
            out[2 * i] = v[0];
            out[2 * i + 1] = v[1];
          }
          return out;
        },
        jac);
  }
  if (!potential.has_value()) potential = Potential::zero(n);
  ParameterMap params{{"m", static_cast<double>(m)}, {"gamma", gamma}, {"alpha", alpha}};
  return SystemSpec(std::move(mass), std::move(gauge), std::move(field), std::move(potential), std::move(label),
                    std::move(params));
}

/**
 * @brief Pairwise representation from a general N-component field map.
 *
 * The map must be pairwise local: dF_{2i-1}, dF_{2i} may depend only on
 * x_{2i-1}, x_{2i}. Locality is checked on the Jacobian at the given sample
 * positions and a violation raises ContractViolation.
 */
inline SystemSpec build_pairwise_representation(std::size_t m, double gamma, double alpha, const FieldMap& field,
                                                std::span<const RealVector> locality_samples,
                                                Potential potential = {}, std::string label = "pairwise") {
  const std::size_t n = 2 * m;
  auto jac_at = [&](std::span<const double> x) {
    return field.has_closed_form_jacobian() ? field.closed_form_jacobian(x)
                                            : fd_jacobian([&](std::span<const double> p) { return field(p); }, x);
  };
  for (const auto& x : locality_samples) {
    if (x.size() != n) throw ContractViolation("build_pairwise_representation: sample has wrong length");
    const RealMatrix j = jac_at(x);
    const double scale = std::max(1.0, max_abs(j));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (r / 2 != c / 2 && std::abs(j(r, c)) > 1e-8 * scale) {
          throw ContractViolation("build_pairwise_representation: F_" + std::to_string(r + 1) + " depends on x_" +
                                  std::to_string(c + 1) + ", violating pairwise locality");
        }
  }
  std::vector<PairField> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    PairField p;
    p.value = [field, n, i](double a, double b) {
      RealVector x(n, 0.0);
      x[2 * i] = a;
      x[2 * i + 1] = b;
      const RealVector f = field(x);
      return std::array<double, 2>{f[2 * i], f[2 * i + 1]};
    };
    pairs.push_back(std::move(p));
  }
  return build_pairwise_representation(m, gamma, alpha, std::move(pairs), std::move(potential), std::move(label));
}

}  // namespace lossgain
