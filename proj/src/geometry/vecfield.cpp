#include "maxclass/vecfield.hpp"

#include "maxclass/error.hpp"

namespace maxclass::geom {

using expr::ScalarExpr;

namespace {

void same_chart(const VecField& a, const VecField& b) {
  if (!(a.chart() == b.chart())) throw InputError("geom.chart_mismatch", "vector fields live on different charts");
}

}  // namespace

VecField::VecField(expr::Chart chart, std::vector<ScalarExpr> components)
    : chart_(std::move(chart)), c_(std::move(components)) {
  if (c_.size() != chart_.dim())
    throw InputError("geom.dimension", "vector field has " + std::to_string(c_.size()) + " components on a chart of dimension " +
                                           std::to_string(chart_.dim()));
  for (const auto& e : c_)
    if (expr::variable_bound(e) > chart_.dim()) throw InputError("expr.undeclared", "component references a variable outside the chart");
}

VecField VecField::zero(const expr::Chart& chart) { return VecField(chart, std::vector<ScalarExpr>(chart.dim())); }

VecField VecField::coordinate(const expr::Chart& chart, std::size_t i) {
  std::vector<ScalarExpr> c(chart.dim());
  c.at(i) = ScalarExpr::constant(1);
  return VecField(chart, std::move(c));
}

VecField VecField::parse(const expr::Chart& chart, const std::vector<std::string>& components) {
  if (components.size() != chart.dim())
    throw InputError("geom.dimension", "expected " + std::to_string(chart.dim()) + " components, got " +
                                           std::to_string(components.size()));
  std::vector<ScalarExpr> c;
  c.reserve(components.size());
  for (const auto& s : components) c.push_back(expr::parse(s, chart));
  return VecField(chart, std::move(c));
}

bool VecField::is_zero() const {
  for (const auto& e : c_)
    if (!e.is_zero()) return false;
  return true;
}

Eigen::VectorXd VecField::evaluate(std::span<const double> point) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c_.size()));
  for (std::size_t i = 0; i < c_.size(); ++i) v(static_cast<Eigen::Index>(i)) = expr::evaluate(c_[i], point, chart_);
  return v;
}

ScalarExpr VecField::apply(const ScalarExpr& f) const {
  ScalarExpr acc;
  for (std::size_t j = 0; j < c_.size(); ++j) {
    if (c_[j].is_zero()) continue;
    ScalarExpr d = expr::diff(f, j);
    if (d.is_zero()) continue;
    acc = acc + c_[j] * d;
  }
  return acc;
}

std::vector<std::vector<ScalarExpr>> VecField::jacobian() const {
  std::vector<std::vector<ScalarExpr>> J(c_.size(), std::vector<ScalarExpr>(c_.size()));
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < c_.size(); ++j) J[i][j] = expr::diff(c_[i], j);
  return J;
}

std::string VecField::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i].is_zero()) continue;
    if (!out.empty()) out += " + ";
    out += "(" + expr::to_string(c_[i], chart_) + ")*d/d" + chart_.name(i);
  }
  return out.empty() ? "0" : out;
}

VecField operator+(const VecField& a, const VecField& b) {
  same_chart(a, b);
  std::vector<ScalarExpr> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a[i] + b[i];
  return VecField(a.chart(), std::move(c));
}

VecField operator-(const VecField& a, const VecField& b) {
  same_chart(a, b);
  std::vector<ScalarExpr> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a[i] - b[i];
  return VecField(a.chart(), std::move(c));
}

VecField operator-(const VecField& a) {
  std::vector<ScalarExpr> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = -a[i];
  return VecField(a.chart(), std::move(c));
}

VecField operator*(const ScalarExpr& f, const VecField& a) {
  std::vector<ScalarExpr> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = f * a[i];
  return VecField(a.chart(), std::move(c));
}

VecField lie_bracket(const VecField& X, const VecField& Y) {
  same_chart(X, Y);
  std::vector<ScalarExpr> c(X.dim());
  for (std::size_t i = 0; i < X.dim(); ++i) {
    ScalarExpr a = X.apply(Y[i]);
    ScalarExpr b = Y.apply(X[i]);
    c[i] = expr::structurally_equal(a, b) ? ScalarExpr() : a - b;
  }
  return VecField(X.chart(), std::move(c));
}

VecField ad_power(const VecField& H, const VecField& E, int k) {
  same_chart(H, E);
  if (k < 0) throw InputError("geom.ad_power", "negative power");
  VecField r = E;
  for (int i = 0; i < k; ++i) r = lie_bracket(H, r);
  return r;
}

bool structurally_equal(const VecField& a, const VecField& b) {
  if (!(a.chart() == b.chart())) return false;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (!expr::structurally_equal(a[i], b[i])) return false;
  return true;
}

}  // namespace maxclass::geom
