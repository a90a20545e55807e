#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lossgain/core/errors.hpp"

namespace lossgain {

/**
 * @brief Real polynomial in a fixed number of variables.
 *
 * Stored as a map from exponent vectors to coefficients. Used for potentials
 * and field maps so that gradients and Jacobians are exact and specs can be
 * written to disk.
 */
class Polynomial {
 public:
  using Powers = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(std::size_t variables) : variables_(variables) {}

  static Polynomial constant(std::size_t variables, double c) {
    Polynomial p(variables);
    p.add_term(c, Powers(variables, 0));
    return p;
  }

  /// The single variable x_index.
  static Polynomial variable(std::size_t variables, std::size_t index) {
    Powers pw(variables, 0);
    pw.at(index) = 1;
    Polynomial p(variables);
    p.add_term(1.0, pw);
    return p;
  }

  std::size_t variables() const noexcept { return variables_; }
  const std::map<Powers, double>& terms() const noexcept { return terms_; }

  Polynomial& add_term(double coefficient, const Powers& powers) {
    if (powers.size() != variables_) throw ContractViolation("Polynomial: exponent vector has wrong length");
    for (int p : powers)
      if (p < 0) throw ContractViolation("Polynomial: negative exponent");
    if (coefficient == 0.0) return *this;
    auto& c = terms_[powers];
    c += coefficient;
    if (c == 0.0) terms_.erase(powers);
    return *this;
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != variables_) throw ContractViolation("Polynomial: argument has wrong length");
    double total = 0.0;
    for (const auto& [powers, c] : terms_) {
      double term = c;
      for (std::size_t i = 0; i < variables_; ++i)
        for (int k = 0; k < powers[i]; ++k) term *= x[i];
      total += term;
    }
    return total;
  }

  Polynomial derivative(std::size_t index) const {
    Polynomial d(variables_);
    for (const auto& [powers, c] : terms_) {
      if (powers[index] == 0) continue;
      Powers pw = powers;
      pw[index] -= 1;
      d.add_term(c * powers[index], pw);
    }
    return d;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [powers, c] : o.terms_) add_term(c, powers);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [powers, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, Polynomial b) { return a += (b *= -1.0); }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.variables_);
    for (const auto& [pa, ca] : a.terms_)
      for (const auto& [pb, cb] : b.terms_) {
        Powers pw(a.variables_);
        for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = pa[i] + pb[i];
        out.add_term(ca * cb, pw);
      }
    return out;
  }

  Polynomial pow(int k) const {
    Polynomial out = constant(variables_, 1.0);
    for (int i = 0; i < k; ++i) out = out * *this;
    return out;
  }

 private:
  void check(const Polynomial& o) const {
    if (o.variables_ != variables_) throw ContractViolation("Polynomial: variable count mismatch");
  }

  std::size_t variables_ = 0;
  std::map<Powers, double> terms_;
};

}  // namespace lossgain
