#include "maxclass/flow.hpp"

#include <algorithm>
#include <cmath>

#include "maxclass/error.hpp"

namespace maxclass::geom {

Eigen::VectorXd LocalFlow::point(double t) const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) p(static_cast<Eigen::Index>(i)) = x[i].eval(t);
  return p;
}

MatSeries LocalFlow::curve() const {
  const int K = x.front().order();
  MatSeries c(K, static_cast<Eigen::Index>(x.size()), 1);
  for (int k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < x.size(); ++i) c[k](static_cast<Eigen::Index>(i), 0) = x[i][k];
  return c;
}

CompiledField::CompiledField(const VecField& X) : X_(X) {
  field_ = Tape(X.components(), X.chart());
  std::vector<expr::ScalarExpr> j;
  auto J = X.jacobian();
  for (auto& row : J)
    for (auto& e : row) j.push_back(e);
  jac_ = Tape(j, X.chart());
}

Eigen::VectorXd CompiledField::eval(const Eigen::VectorXd& x) const {
  auto v = field_.eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd CompiledField::jacobian(const Eigen::VectorXd& x) const {
  auto v = jac_.eval(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) J(i, k) = v[static_cast<std::size_t>(i * n + k)];
  return J;
}

std::vector<Series> eval_series(const Tape& tape, const std::vector<Series>& x) {
  return tape.eval<Series>(x, Series(x.empty() ? 0 : x.front().order()));
}

std::vector<Series> CompiledField::taylor(const Eigen::VectorXd& x0, int order) const {
  const std::size_t n = dim();
  std::vector<Series> x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) x.emplace_back(order, x0(static_cast<Eigen::Index>(i)));
  // Picard iteration: after pass j the coefficients up to degree j are exact.
  for (int pass = 1; pass <= order; ++pass) {
    std::vector<Series> f = eval_series(field_, x);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 1; k <= pass; ++k) x[i][k] = f[i][k - 1] / k;
  }
  return x;
}

LocalFlow CompiledField::local(const Eigen::VectorXd& x0, int order, bool with_differential) const {
  LocalFlow out;
  out.x = taylor(x0, order);
  if (!with_differential) return out;
  const auto n = static_cast<Eigen::Index>(dim());
  std::vector<Series> js = eval_series(jac_, out.x);
  MatSeries J(order, n, n);
  for (int k = 0; k <= order; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < n; ++c) J[k](i, c) = js[static_cast<std::size_t>(i * n + c)][k];
  MatSeries phi(order, n, n);
  phi[0] = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < order; ++k) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j <= k; ++j) s.noalias() += J[j] * phi[k - j];
    phi[k + 1] = s / (k + 1);
  }
  out.phi = std::move(phi);
  return out;
}

FlowResult flow(const CompiledField& X, const Eigen::VectorXd& x0, double t, const FlowOptions& opt) {
  if (opt.order < 4) throw InputError("geom.flow_order", "flow order must be at least 4");
  if (static_cast<std::size_t>(x0.size()) != X.dim()) throw InputError("geom.dimension", "initial point has wrong dimension");
  const int K = opt.order;
  const auto n = static_cast<Eigen::Index>(X.dim());
  FlowResult r;
  r.endpoint = x0;
  r.differential = Eigen::MatrixXd::Identity(n, n);
  const double dir = t >= 0 ? 1.0 : -1.0;
  double done = 0.0;
  const double total = std::abs(t);
  while (done < total) {
    if (r.steps >= opt.max_steps) throw NumericalError("geom.step_limit", "flow exceeded the step limit");
    LocalFlow lf = X.local(r.endpoint, K, true);
    double scale = std::max(1.0, r.endpoint.lpNorm<Eigen::Infinity>());
    double tol = opt.tol * scale;
    auto coeff_norm = [&](int k) {
      double m = 0.0;
      for (const auto& s : lf.x) m = std::max(m, std::abs(s[k]));
      return m;
    };
    double a1 = coeff_norm(K - 1), a2 = coeff_norm(K);
    double h = total - done;
    if (a1 > 0.0) h = std::min(h, std::pow(tol / a1, 1.0 / (K - 1)));
    if (a2 > 0.0) h = std::min(h, std::pow(tol / a2, 1.0 / K));
    h = std::min(h, opt.max_step);
    // a short final step is fine, only a forced tiny step is an underflow
    if (h < total - done && h < 1e-14 * std::max(1.0, total))
      throw NumericalError("geom.step_underflow", "step size underflow at t = " + std::to_string(dir * done));
    double ht = dir * h;
    r.endpoint = lf.point(ht);
    r.differential = lf.phi.eval(ht) * r.differential;
    r.error_estimate += a2 * std::pow(h, K);
    r.largest_step = std::max(r.largest_step, h);
    done += h;
    r.steps++;
    if (!r.endpoint.allFinite()) throw NumericalError("geom.flow_blowup", "flow left the domain of finite values");
  }
  return r;
}

FlowResult flow(const VecField& X, const Eigen::VectorXd& x0, double t, const FlowOptions& opt) {
  return flow(CompiledField(X), x0, t, opt);
}

}  // namespace maxclass::geom
