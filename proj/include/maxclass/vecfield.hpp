#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "maxclass/expr.hpp"

namespace maxclass::geom {

/// Coordinate vector field: one expression per chart coordinate.
class VecField {
 public:
  VecField() = default;
  VecField(expr::Chart chart, std::vector<expr::ScalarExpr> components);
  static VecField zero(const expr::Chart& chart);
  /// The coordinate field d/d(chart[i]).
  static VecField coordinate(const expr::Chart& chart, std::size_t i);
  /// Parses one expression per coordinate.
  static VecField parse(const expr::Chart& chart, const std::vector<std::string>& components);

  const expr::Chart& chart() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return c_.size(); }
  const expr::ScalarExpr& operator[](std::size_t i) const { return c_.at(i); }
  const std::vector<expr::ScalarExpr>& components() const noexcept { return c_; }
  bool is_zero() const;

  Eigen::VectorXd evaluate(std::span<const double> point) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& point) const {
    return evaluate(std::span<const double>(point.data(), static_cast<std::size_t>(point.size())));
  }
  /// Directional derivative X(f).
  expr::ScalarExpr apply(const expr::ScalarExpr& f) const;
  /// Symbolic Jacobian J[i][j] = d X^i / d x_j.
  std::vector<std::vector<expr::ScalarExpr>> jacobian() const;
  std::string to_string() const;

 private:
  expr::Chart chart_;
  std::vector<expr::ScalarExpr> c_;
};

VecField operator+(const VecField& a, const VecField& b);
VecField operator-(const VecField& a, const VecField& b);
VecField operator-(const VecField& a);
VecField operator*(const expr::ScalarExpr& f, const VecField& a);

/// [X, Y] = (X . grad) Y - (Y . grad) X.
VecField lie_bracket(const VecField& X, const VecField& Y);
/// (ad H)^k E.
VecField ad_power(const VecField& H, const VecField& E, int k);

bool structurally_equal(const VecField& a, const VecField& b);

}  // namespace maxclass::geom
