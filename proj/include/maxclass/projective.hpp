#pragma once

// Curves in the Lagrangian Grassmannian: cross-ratios, the density rho,
// Schwarzians and projective reparameterization.

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxclass/expr.hpp"
#include "maxclass/jet.hpp"
#include "maxclass/linalg.hpp"
#include "maxclass/symplectic.hpp"
#include "maxclass/tape.hpp"

namespace maxclass::proj {

/// [t1,t2,t3,t4] = (t2-t1)(t4-t3) / ((t1-t4)(t3-t2)), the 1x1 case of the
/// matrix cross-ratio below.
double number_cross_ratio(double t1, double t2, double t3, double t4);

/// Eigenvalues of (S1-S4)^{-1}(S4-S3)(S3-S2)^{-1}(S2-S1), sorted by (re, im).
/// Throws NumericalError proj.singular_difference if a difference is not
/// invertible at tolerance.
std::vector<std::complex<double>> cross_ratio(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2,
                                              const Eigen::MatrixXd& S3, const Eigen::MatrixXd& S4);
/// det of the same product.
double cross_ratio_det(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2, const Eigen::MatrixXd& S3,
                       const Eigen::MatrixXd& S4);

/// t -> S_t with Lambda(t) = {(x, S_t x)} in a splitting fixed once.
class GrassCurve {
 public:
  virtual ~GrassCurve() = default;
  virtual int m() const = 0;
  virtual Eigen::MatrixXd sample(double t) const = 0;
  /// Taylor coefficients of S at t0 (variable t - t0), if the curve has them.
  virtual std::optional<MatSeries> local_series(double t0, int order) const;
  virtual std::pair<double, double> window() const = 0;
  int k() const { return m() * m(); }
};

/// S(t) = sum_j C_j t^j.
class PolynomialCurve : public GrassCurve {
 public:
  PolynomialCurve(std::vector<Eigen::MatrixXd> coeffs, std::pair<double, double> window);
  int m() const override { return static_cast<int>(c_.front().rows()); }
  Eigen::MatrixXd sample(double t) const override;
  std::optional<MatSeries> local_series(double t0, int order) const override;
  std::pair<double, double> window() const override { return w_; }

 private:
  std::vector<Eigen::MatrixXd> c_;
  std::pair<double, double> w_;
};

/// Jacobi curve of a regular covector, in the time of the characteristic
/// flow, reduced to the 2m-dimensional symplectic quotient at lambda.
class JacobiCurve : public GrassCurve {
 public:
  /// half_window <= 0 picks a window from the local radius of convergence.
  JacobiCurve(std::shared_ptr<const symp::Symplectification> S, Eigen::VectorXd lam, double half_window = 0.0);

  int m() const override { return m_; }
  Eigen::MatrixXd sample(double t) const override;
  std::optional<MatSeries> local_series(double t0, int order) const override;
  std::pair<double, double> window() const override { return {-half_, half_}; }

  const Eigen::VectorXd& lambda() const noexcept { return lam_; }
  const symp::Symplectification& symplectification() const noexcept { return *S_; }
  /// Orthonormal P with W = P^T (e, H)-reduced tangent space; omega = P^T J P.
  const Eigen::MatrixXd& reduced_basis() const noexcept { return P_; }
  const Eigen::MatrixXd& omega() const noexcept { return omega_; }
  /// Radius estimate of the Taylor series at lambda.
  double radius() const noexcept { return radius_; }
  /// Transported Jacobi frame Phi(t)^{-1} J(gamma(t)) at one time.
  Eigen::MatrixXd transported_frame(double t) const;

 private:
  Eigen::MatrixXd graph(const Eigen::MatrixXd& reduced) const;
  MatSeries graph(const MatSeries& reduced) const;

  std::shared_ptr<const symp::Symplectification> S_;
  Eigen::VectorXd lam_;
  int m_ = 0;
  double half_ = 0.0;
  double radius_ = 0.0;
  Eigen::MatrixXd P_, omega_;
  Eigen::MatrixXd split_inv_;  // coordinates w.r.t. [X | Y'] (X = Lambda(0), Y' Lagrangian complement)
};

/// Smooth monotone map of the parameter.
class Reparameterization {
 public:
  virtual ~Reparameterization() = default;
  virtual double value(double t) const = 0;
  virtual double inverse(double s) const;
  /// Taylor coefficients of psi(t0 + d) in d.
  virtual geom::Series series(double t0, int order) const = 0;
  /// Interval on which the map is known.
  virtual std::pair<double, double> domain() const;
};

/// psi given by an expression in the single variable t.
class SmoothMap : public Reparameterization {
 public:
  explicit SmoothMap(expr::ScalarExpr e);
  static SmoothMap parse(const std::string& text);
  static SmoothMap identity();
  static const expr::Chart& chart();

  double value(double t) const override;
  geom::Series series(double t0, int order) const override;
  const expr::ScalarExpr& expression() const noexcept { return e_; }
  /// this o inner.
  SmoothMap compose(const SmoothMap& inner) const;

 private:
  expr::ScalarExpr e_;
  std::shared_ptr<const geom::Tape> tape_;
};

struct MobiusMap {
  double a = 1, b = 0, c = 0, d = 1;
  MobiusMap() = default;
  MobiusMap(double a_, double b_, double c_, double d_);  // throws if ad - bc == 0
  double operator()(double t) const { return (a * t + b) / (c * t + d); }
  SmoothMap as_map() const;
};

/// Paper normalization: S psi = psi'''/(2 psi') - 3/4 (psi''/psi')^2.
double schwarzian(const geom::Series& psi_at_t);
double schwarzian(const Reparameterization& psi, double t);
double schwarzian(const MobiusMap& psi, double t);

/// Lambda_new(s) = Lambda(psi^{-1}(s)).
class ReparameterizedCurve : public GrassCurve {
 public:
  ReparameterizedCurve(std::shared_ptr<const GrassCurve> base, std::shared_ptr<const Reparameterization> psi);
  int m() const override { return base_->m(); }
  Eigen::MatrixXd sample(double s) const override;
  std::optional<MatSeries> local_series(double s0, int order) const override;
  std::pair<double, double> window() const override;

 private:
  std::shared_ptr<const GrassCurve> base_;
  std::shared_ptr<const Reparameterization> psi_;
};

/// Sum_k B_k d(x)^k for a scalar series d with d(0) = 0.
MatSeries compose(const MatSeries& B, const geom::Series& d);

struct ZeroOrder {
  double k = 0.0;
  std::vector<double> offsets, log_det;
  double fit_residual = 0.0;
};
/// Slope of log|det(S_t - S_t1)| against log|t - t1| over one decade.
ZeroOrder zero_order(const GrassCurve& curve, double t1);

/// ln(det(cross-ratio) [t1,t2,t3,t4]^{-k}) from samples.
double g_function(const GrassCurve& curve, double t1, double t2, double t3, double t4);

struct RhoResult {
  double value = 0.0;
  double check = 0.0;  // second stencil
  bool from_series = false;
};
/// rho at t; two stencils must agree (1e-6 relative, 1e-9 absolute).
RhoResult rho(const GrassCurve& curve, double t);

/// The projective parameter psi = u1/u2, u'' + (3/k) rho u = 0, normalized
/// psi(t0) = 0, psi'(t0) = 1, psi''(t0) = 0; rho is a cubic spline of samples.
class ProjectiveParameter : public Reparameterization {
 public:
  ProjectiveParameter(std::vector<double> rho_samples, double a, double b, int k, double t0);

  double value(double t) const override;
  geom::Series series(double t0, int order) const override;
  std::pair<double, double> domain() const override { return {a_, b_}; }
  double potential(double t) const;  // (3/k) rho_spline(t)

 private:
  struct State {
    double u1, v1, u2, v2;
  };
  State state_at(double t) const;

  double a_, b_, h_, t0_;
  int k_;
  std::vector<double> rho_;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
  std::vector<double> knot_t_;
  std::vector<State> knot_state_;
};

struct Projectivization {
  std::shared_ptr<const ProjectiveParameter> psi;
  std::vector<double> t, rho_before, rho_after;
  double max_residual = 0.0;
};
/// Samples rho on `samples` points of [a, b], builds psi, recomputes rho on
/// the reparameterized curve at interior points.
Projectivization projectivize(std::shared_ptr<const GrassCurve> curve, double a, double b, int samples = 101,
                              int checks = 21);

}  // namespace maxclass::proj
