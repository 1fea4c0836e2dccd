#pragma once

// Taylor-method integration of autonomous fields together with the
// variational equation.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "maxclass/jet.hpp"
#include "maxclass/linalg.hpp"
#include "maxclass/tape.hpp"
#include "maxclass/vecfield.hpp"

namespace maxclass::geom {

struct FlowOptions {
  int order = 8;
  double tol = 1e-12;  // per-step absolute tolerance (scaled by max(1, |x|))
  double max_step = std::numeric_limits<double>::infinity();
  int max_steps = 200000;
};

struct FlowResult {
  Eigen::VectorXd endpoint;
  Eigen::MatrixXd differential;
  double error_estimate = 0.0;
  int steps = 0;
  double largest_step = 0.0;
};

/// Taylor expansion of the integral curve x(t) and of its flow differential
/// Phi(t) at t = 0.
struct LocalFlow {
  std::vector<Series> x;
  MatSeries phi;

  Eigen::VectorXd point(double t) const;
  /// Coefficient vectors x_k as matrix columns.
  MatSeries curve() const;
};

/// A field compiled for repeated evaluation (value and Jacobian tapes).
class CompiledField {
 public:
  CompiledField() = default;
  explicit CompiledField(const VecField& X);

  std::size_t dim() const noexcept { return field_.num_outputs(); }
  const VecField& field() const noexcept { return X_; }
  const Tape& value_tape() const noexcept { return field_; }
  const Tape& jacobian_tape() const noexcept { return jac_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  /// Taylor coefficients of the integral curve through x0.
  std::vector<Series> taylor(const Eigen::VectorXd& x0, int order) const;
  LocalFlow local(const Eigen::VectorXd& x0, int order, bool with_differential = true) const;

 private:
  VecField X_;
  Tape field_;
  Tape jac_;
};

FlowResult flow(const CompiledField& X, const Eigen::VectorXd& x0, double t, const FlowOptions& opt = {});
FlowResult flow(const VecField& X, const Eigen::VectorXd& x0, double t, const FlowOptions& opt = {});

/// Series of a batch of expressions along a curve given by coordinate series.
std::vector<Series> eval_series(const Tape& tape, const std::vector<Series>& x);

}  // namespace maxclass::geom
