#include "maxclass/jet.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "maxclass/error.hpp"
#include "maxclass/tape.hpp"

namespace maxclass::geom {

struct JetLayout {
  std::size_t nvars = 0;
  int order = 0;
  std::vector<std::vector<int>> monomials;
  std::vector<int> degree;
  std::map<std::vector<int>, std::size_t> index;
  // For each product pair (i, j) with deg i + deg j <= order: target k.
  struct Term {
    std::uint32_t i, j, k;
  };
  std::vector<Term> products;
};

namespace {

void enumerate(std::size_t nvars, int deg, std::size_t pos, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (pos + 1 == nvars) {
    cur[pos] = deg;
    out.push_back(cur);
    return;
  }
  for (int d = deg; d >= 0; --d) {
    cur[pos] = d;
    enumerate(nvars, deg - d, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

std::shared_ptr<const JetLayout> build_layout(std::size_t nvars, int order) {
  auto L = std::make_shared<JetLayout>();
  L->nvars = nvars;
  L->order = order;
  if (nvars == 0) {
    L->monomials.push_back({});
    L->degree.push_back(0);
  } else {
    std::vector<int> cur(nvars, 0);
    for (int d = 0; d <= order; ++d) {
      std::size_t before = L->monomials.size();
      enumerate(nvars, d, 0, cur, L->monomials);
      for (std::size_t i = before; i < L->monomials.size(); ++i) L->degree.push_back(d);
    }
  }
  for (std::size_t i = 0; i < L->monomials.size(); ++i) L->index.emplace(L->monomials[i], i);
  std::vector<int> sum(nvars);
  for (std::size_t i = 0; i < L->monomials.size(); ++i) {
    for (std::size_t j = 0; j < L->monomials.size(); ++j) {
      if (L->degree[i] + L->degree[j] > order) break;  // degrees are sorted
      for (std::size_t v = 0; v < nvars; ++v) sum[v] = L->monomials[i][v] + L->monomials[j][v];
      L->products.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(L->index.at(sum))});
    }
  }
  return L;
}

std::shared_ptr<const JetLayout> layout_for(std::size_t nvars, int order) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(nvars, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto L = build_layout(nvars, order);
  cache.emplace(key, L);
  return L;
}

void check_same(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars() || a.order() != b.order())
    throw InternalError("geom.jet_shape", "jet shape mismatch");
}

}  // namespace

Jet::Jet(std::size_t nvars, int order) : nvars_(nvars), order_(order) {
  if (order < 0) throw InputError("geom.jet_order", "jet order must be non-negative");
  layout_ = layout_for(nvars, order);
  c_.assign(layout_->monomials.size(), 0.0);
}

Jet Jet::constant(std::size_t nvars, int order, double value) {
  Jet j(nvars, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(std::size_t nvars, int order, std::size_t index, double value) {
  Jet j(nvars, order);
  j.c_[0] = value;
  if (order >= 1) j.c_[1 + index] = 1.0;
  return j;
}

double Jet::coeff(const std::vector<int>& alpha) const {
  auto it = layout_->index.find(alpha);
  return it == layout_->index.end() ? 0.0 : c_[it->second];
}

const std::vector<int>& Jet::monomial(std::size_t i) const { return layout_->monomials.at(i); }

Jet Jet::partial(std::size_t v) const {
  Jet out(nvars_, order_ > 0 ? order_ - 1 : 0);
  if (order_ == 0) return out;
  std::vector<int> shifted;
  for (std::size_t i = 0; i < out.c_.size(); ++i) {
    shifted = out.layout_->monomials[i];
    shifted[v] += 1;
    out.c_[i] = shifted[v] * coeff(shifted);
  }
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_same(a, b);
  Jet out(a.nvars_, a.order_);
  for (const auto& t : a.layout_->products) out.c_[t.k] += a.c_[t.i] * b.c_[t.j];
  return out;
}

// sum_j f[j] u^j for nilpotent u (zero constant term).
Jet compose_nilpotent(const Jet& u, std::span<const double> f) {
  Jet out = Jet::constant(u.nvars(), u.order(), f[0]);
  Jet power = Jet::constant(u.nvars(), u.order(), 1.0);
  for (std::size_t j = 1; j < f.size(); ++j) {
    power = power * u;
    Jet term = power;
    term *= f[j];
    out += term;
  }
  return out;
}

namespace {

Jet nilpotent_part(const Jet& a) {
  Jet u = a;
  u[0] = 0.0;
  return u;
}

}  // namespace

Jet operator/(const Jet& a, const Jet& b) {
  double b0 = b.value();
  if (b0 == 0.0) throw NumericalError("geom.jet_division", "division by a jet with zero constant term");
  // 1/(b0 + u) = (1/b0) sum (-u/b0)^j
  std::vector<double> f(static_cast<std::size_t>(b.order()) + 1);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = std::pow(-1.0 / b0, static_cast<double>(j)) / b0;
  return a * compose_nilpotent(nilpotent_part(b), f);
}

Jet exp(const Jet& a) {
  std::vector<double> f(static_cast<std::size_t>(a.order()) + 1);
  double e0 = std::exp(a.value());
  double fact = 1.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (j > 0) fact *= static_cast<double>(j);
    f[j] = e0 / fact;
  }
  return compose_nilpotent(nilpotent_part(a), f);
}

Jet log(const Jet& a) {
  double a0 = a.value();
  if (!(a0 > 0.0)) throw NumericalError("geom.jet_log", "logarithm of non-positive jet");
  std::vector<double> f(static_cast<std::size_t>(a.order()) + 1);
  f[0] = std::log(a0);
  for (std::size_t j = 1; j < f.size(); ++j)
    f[j] = ((j % 2 == 1) ? 1.0 : -1.0) / (static_cast<double>(j) * std::pow(a0, static_cast<double>(j)));
  return compose_nilpotent(nilpotent_part(a), f);
}

namespace {

// Taylor coefficients of sin (shift = 0) or cos (shift = 1) around x0.
std::vector<double> trig_coeffs(double x0, int order, int shift) {
  std::vector<double> f(static_cast<std::size_t>(order) + 1);
  double s = std::sin(x0), c = std::cos(x0);
  double derivs[4] = {s, c, -s, -c};
  double fact = 1.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (j > 0) fact *= static_cast<double>(j);
    f[j] = derivs[(j + static_cast<std::size_t>(shift)) % 4] / fact;
  }
  return f;
}

}  // namespace

Jet sin(const Jet& a) { return compose_nilpotent(nilpotent_part(a), trig_coeffs(a.value(), a.order(), 0)); }
Jet cos(const Jet& a) { return compose_nilpotent(nilpotent_part(a), trig_coeffs(a.value(), a.order(), 1)); }

Jet eval_jet(const expr::ScalarExpr& e, std::span<const double> at, int order, const expr::Chart& chart) {
  if (at.size() != chart.dim())
    throw InputError("geom.dimension", "point dimension " + std::to_string(at.size()) + " does not match chart dimension " +
                                           std::to_string(chart.dim()));
  if (order < 0) throw InputError("geom.jet_order", "jet order must be non-negative");
  Tape tape({e}, chart);
  std::vector<Jet> x;
  x.reserve(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) x.push_back(Jet::variable(at.size(), order, i, at[i]));
  Jet proto = Jet::constant(at.size(), order, 0.0);
  return tape.eval<Jet>(x, proto).front();
}

// ---------------------------------------------------------------------------
// Series

Series Series::variable(int order, double c0) {
  Series s(order, c0);
  if (order >= 1) s[1] = 1.0;
  return s;
}

double Series::eval(double t) const {
  double r = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) r = r * t + c_[k];
  return r;
}

Series Series::derivative() const {
  Series d(order());
  for (int k = 1; k <= order(); ++k) d[k - 1] = k * (*this)[k];
  return d;
}

Series Series::scaled(double s) const {
  Series out = *this;
  double f = 1.0;
  for (double& x : out.c_) {
    x *= f;
    f *= s;
  }
  return out;
}

Series& Series::operator+=(const Series& o) {
  if (o.c_.size() != c_.size()) throw InternalError("geom.series_shape", "series order mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Series& Series::operator-=(const Series& o) {
  if (o.c_.size() != c_.size()) throw InternalError("geom.series_shape", "series order mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Series& Series::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Series operator*(const Series& a, const Series& b) {
  if (a.c_.size() != b.c_.size()) throw InternalError("geom.series_shape", "series order mismatch");
  const std::size_t n = a.c_.size();
  Series out(a.order());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.c_[i] == 0.0) continue;
    for (std::size_t j = 0; i + j < n; ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
  }
  return out;
}

Series operator/(const Series& a, const Series& b) {
  if (a.c_.size() != b.c_.size()) throw InternalError("geom.series_shape", "series order mismatch");
  if (b[0] == 0.0) throw NumericalError("geom.series_division", "division by a series with zero constant term");
  const int K = a.order();
  Series q(K);
  for (int k = 0; k <= K; ++k) {
    double s = a[k];
    for (int j = 1; j <= k; ++j) s -= b[j] * q[k - j];
    q[k] = s / b[0];
  }
  return q;
}

Series exp(const Series& a) {
  const int K = a.order();
  Series e(K);
  e[0] = std::exp(a[0]);
  // e' = a' e
  for (int k = 1; k <= K; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

Series log(const Series& a) {
  if (!(a[0] > 0.0)) throw NumericalError("geom.series_log", "logarithm of non-positive series");
  const int K = a.order();
  Series l(K);
  l[0] = std::log(a[0]);
  // a l' = a'
  for (int k = 1; k <= K; ++k) {
    double s = k * a[k];
    for (int j = 1; j < k; ++j) s -= j * l[j] * a[k - j];
    l[k] = s / (k * a[0]);
  }
  return l;
}

namespace {

void sincos(const Series& a, Series& s, Series& c) {
  const int K = a.order();
  s = Series(K, std::sin(a[0]));
  c = Series(K, std::cos(a[0]));
  for (int k = 1; k <= K; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a[j] * c[k - j];
      cc -= j * a[j] * s[k - j];
    }
    s[k] = ss / k;
    c[k] = cc / k;
  }
}

}  // namespace

Series sin(const Series& a) {
  Series s, c;
  sincos(a, s, c);
  return s;
}

Series cos(const Series& a) {
  Series s, c;
  sincos(a, s, c);
  return c;
}

Series compose(const Series& f, const Series& g) {
  if (g[0] != 0.0) throw InternalError("geom.series_compose", "inner series must vanish at 0");
  const int K = std::min(f.order(), g.order());
  Series out(K, 0.0);
  Series gk = Series(K, 1.0);
  Series gg(std::vector<double>(g.coeffs().begin(), g.coeffs().begin() + K + 1));
  for (int k = 0; k <= K; ++k) {
    if (k > 0) gk = gk * gg;
    out += gk * f[k];
  }
  return out;
}

Series revert(const Series& f) {
  if (f[0] != 0.0 || f[1] == 0.0)
    throw NumericalError("geom.series_revert", "series is not locally invertible at 0");
  const int K = f.order();
  // Newton-free: solve f(g(t)) = t coefficient by coefficient.
  Series g(K, 0.0);
  if (K >= 1) g[1] = 1.0 / f[1];
  for (int k = 2; k <= K; ++k) {
    Series c = compose(f, g);
    g[k] = -c[k] / f[1];
  }
  return g;
}

}  // namespace maxclass::geom
