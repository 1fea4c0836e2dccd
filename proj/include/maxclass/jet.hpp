#pragma once

// Truncated Taylor arithmetic.
//
// Jet: multivariate, dense, coefficients of x^alpha (not derivatives) for all
// multi-indices of total degree <= order, stored in graded-lex order.
// Series: univariate truncated power series, the workhorse of the Taylor
// integrator and of every curve expansion in this library.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "maxclass/expr.hpp"

namespace maxclass::geom {

/// Multi-index table shared by all jets with the same (nvars, order).
struct JetLayout;

class Jet {
 public:
  Jet() = default;
  Jet(std::size_t nvars, int order);
  static Jet constant(std::size_t nvars, int order, double value);
  static Jet variable(std::size_t nvars, int order, std::size_t index, double value);

  std::size_t nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return c_.size(); }
  double value() const noexcept { return c_.empty() ? 0.0 : c_[0]; }

  const std::vector<double>& coeffs() const noexcept { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  /// Coefficient of x^alpha; zero when the degree exceeds the order.
  double coeff(const std::vector<int>& alpha) const;
  /// Multi-index of the i-th coefficient.
  const std::vector<int>& monomial(std::size_t i) const;

  /// Jet of the partial derivative d/dx_i, truncated one order lower.
  Jet partial(std::size_t i) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  std::size_t nvars_ = 0;
  int order_ = 0;
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> c_;

  friend Jet compose_nilpotent(const Jet& u, std::span<const double> f);
};

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);

inline double leading(const Jet& a) { return a.value(); }
inline Jet lift_like(const Jet& proto, double v) { return Jet::constant(proto.nvars(), proto.order(), v); }

/// Taylor coefficients of `e` at `at` up to total degree `order`.
Jet eval_jet(const expr::ScalarExpr& e, std::span<const double> at, int order, const expr::Chart& chart);

class Series {
 public:
  Series() = default;
  explicit Series(int order, double c0 = 0.0) : c_(static_cast<std::size_t>(order) + 1, 0.0) { c_[0] = c0; }
  explicit Series(std::vector<double> c) : c_(std::move(c)) {}
  /// c0 + t.
  static Series variable(int order, double c0);

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& coeffs() const noexcept { return c_; }

  double eval(double t) const;
  /// d/dt, same order (top coefficient becomes zero).
  Series derivative() const;
  /// f(s*t).
  Series scaled(double s) const;

  Series& operator+=(const Series& o);
  Series& operator-=(const Series& o);
  Series& operator*=(double s);
  Series& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator-(Series a) { return a *= -1.0; }
  friend Series operator*(Series a, double s) { return a *= s; }
  friend Series operator*(double s, Series a) { return a *= s; }
  friend Series operator*(const Series& a, const Series& b);
  friend Series operator/(const Series& a, const Series& b);

 private:
  std::vector<double> c_;
};

Series exp(const Series& a);
Series log(const Series& a);
Series sin(const Series& a);
Series cos(const Series& a);

inline double leading(const Series& a) { return a[0]; }
inline Series lift_like(const Series& proto, double v) { return Series(proto.order(), v); }

/// f(g(t)) for g(0) = 0.
Series compose(const Series& f, const Series& g);
/// Compositional inverse of f with f(0) = 0, f'(0) != 0.
Series revert(const Series& f);

inline double leading(double a) { return a; }
inline double lift_like(double, double v) { return v; }

}  // namespace maxclass::geom
