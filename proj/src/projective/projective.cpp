#include "maxclass/projective.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "maxclass/error.hpp"

namespace maxclass::proj {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using geom::Series;

double number_cross_ratio(double t1, double t2, double t3, double t4) {
  return (t2 - t1) * (t4 - t3) / ((t1 - t4) * (t3 - t2));
}

namespace {

Eigen::PartialPivLU<MatrixXd> checked_lu(const MatrixXd& D, const char* label) {
  Eigen::JacobiSVD<MatrixXd> svd(D);
  const auto& s = svd.singularValues();
  double smax = s(0), smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin < 1e-13 * smax) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "difference %s is not invertible (condition estimate %.3e)", label,
                  smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
    throw NumericalError("proj.singular_difference", buf);
  }
  return D.partialPivLu();
}

MatrixXd cross_ratio_matrix(const MatrixXd& S1, const MatrixXd& S2, const MatrixXd& S3, const MatrixXd& S4) {
  auto lu14 = checked_lu(S1 - S4, "S1-S4");
  auto lu32 = checked_lu(S3 - S2, "S3-S2");
  checked_lu(S4 - S3, "S4-S3");
  checked_lu(S2 - S1, "S2-S1");
  return lu14.solve((S4 - S3) * lu32.solve(S2 - S1));
}

}  // namespace

std::vector<std::complex<double>> cross_ratio(const MatrixXd& S1, const MatrixXd& S2, const MatrixXd& S3,
                                              const MatrixXd& S4) {
  Eigen::EigenSolver<MatrixXd> es(cross_ratio_matrix(S1, S2, S3, S4), false);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return ev;
}

double cross_ratio_det(const MatrixXd& S1, const MatrixXd& S2, const MatrixXd& S3, const MatrixXd& S4) {
  return cross_ratio_matrix(S1, S2, S3, S4).determinant();
}

std::optional<MatSeries> GrassCurve::local_series(double, int) const { return std::nullopt; }

// ---------------------------------------------------------------------------

PolynomialCurve::PolynomialCurve(std::vector<MatrixXd> coeffs, std::pair<double, double> window)
    : c_(std::move(coeffs)), w_(window) {
  if (c_.empty() || c_.front().rows() != c_.front().cols()) throw InputError("proj.curve", "need square coefficients");
}

MatrixXd PolynomialCurve::sample(double t) const {
  MatrixXd r = c_.back();
  for (std::size_t k = c_.size() - 1; k-- > 0;) r = r * t + c_[k];
  return r;
}

std::optional<MatSeries> PolynomialCurve::local_series(double t0, int order) const {
  // Taylor shift by Horner on coefficient matrices
  const Index m = c_.front().rows();
  std::vector<MatrixXd> c = c_;
  const int deg = static_cast<int>(c.size()) - 1;
  for (int i = 0; i < deg; ++i)
    for (int j = deg - 1; j >= i; --j) c[static_cast<std::size_t>(j)] += t0 * c[static_cast<std::size_t>(j + 1)];
  MatSeries s(order, m, m);
  for (int k = 0; k <= std::min(order, deg); ++k) s[k] = c[static_cast<std::size_t>(k)];
  return s;
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd rows_of(const MatrixXd& m, Index first, Index count) { return m.middleRows(first, count); }

MatSeries rows_of(const MatSeries& s, Index first, Index count) {
  MatSeries r(s.order(), count, s.cols());
  for (int k = 0; k <= s.order(); ++k) r[k] = s[k].middleRows(first, count);
  return r;
}

double series_radius(const MatSeries& s) {
  double a1 = s[1].norm();
  double r = std::numeric_limits<double>::infinity();
  if (a1 == 0.0) return 1.0;
  for (int j = 2; j <= s.order(); ++j) {
    double aj = s[j].norm();
    if (aj > 0.0) r = std::min(r, std::pow(a1 / aj, 1.0 / (j - 1)));
  }
  return std::isfinite(r) ? r : 1.0;
}

}  // namespace

JacobiCurve::JacobiCurve(std::shared_ptr<const symp::Symplectification> S, VectorXd lam, double half_window)
    : S_(std::move(S)), lam_(std::move(lam)) {
  const Index n = S_->n();
  m_ = static_cast<int>(n) - 3;
  if (m_ < 1) throw InputError("proj.dimension", "Jacobi curves need n >= 4");
  MatrixXd T = symp::tangent_space(*S_, lam_).basis();
  VectorXd e = symp::Symplectification::euler(lam_);
  VectorXd H = S_->characteristic().eval(lam_);
  MatrixXd J = symp::symplectic_matrix(n);
  MatrixXd row = e.transpose() * J * T;
  MatrixXd E = T * SubspaceFrame::kernel_of(row).basis();
  MatrixXd eh(2 * n, 2);
  eh << e, H;
  MatrixXd Q = SubspaceFrame::span_of(eh).basis();
  if (Q.cols() != 2) throw InputError("proj.stratum", "Euler and characteristic directions are dependent");
  SubspaceFrame red = SubspaceFrame::span_of(E - Q * (Q.transpose() * E));
  require_stable(red.record(), "proj.unstable_rank");
  if (red.dim() != 2 * m_) throw NumericalError("proj.reduction", "reduced space has dimension " + std::to_string(red.dim()));
  P_ = red.basis();
  omega_ = P_.transpose() * J * P_;

  SubspaceFrame L0 = SubspaceFrame::span_of(P_.transpose() * symp::jacobi_subspace(*S_, lam_).basis());
  require_stable(L0.record(), "proj.unstable_rank");
  if (L0.dim() != m_) throw NumericalError("proj.reduction", "reduced Jacobi subspace is not half-dimensional");
  MatrixXd X = L0.basis();
  Eigen::HouseholderQR<MatrixXd> qr(X);
  MatrixXd full = qr.householderQ();
  MatrixXd Y = full.rightCols(m_);
  // Lagrangian complement Y' = Y + X Z
  MatrixXd M = X.transpose() * omega_ * Y;
  MatrixXd Z = 0.5 * M.transpose().partialPivLu().solve(Y.transpose() * omega_ * Y);
  MatrixXd Yl = Y + X * Z;
  MatrixXd B(2 * m_, 2 * m_);
  B << X, Yl;
  split_inv_ = B.inverse();

  auto s = local_series(0.0, 12);
  radius_ = series_radius(*s);
  half_ = half_window > 0.0 ? half_window : 0.5 * radius_;
}

MatrixXd JacobiCurve::transported_frame(double t) const {
  if (t == 0.0) return symp::jacobi_subspace(*S_, lam_).basis();
  geom::FlowResult fr = geom::flow(S_->characteristic(), lam_, t);
  MatrixXd V = symp::jacobi_subspace(*S_, fr.endpoint).basis();
  return fr.differential.partialPivLu().solve(V);
}

MatrixXd JacobiCurve::graph(const MatrixXd& reduced) const {
  MatrixXd c = split_inv_ * reduced;
  MatrixXd alpha = rows_of(c, 0, m_), beta = rows_of(c, m_, m_);
  return beta * alpha.completeOrthogonalDecomposition().pseudoInverse();
}

MatSeries JacobiCurve::graph(const MatSeries& reduced) const {
  MatSeries c = split_inv_ * reduced;
  MatSeries alpha = rows_of(c, 0, m_), beta = rows_of(c, m_, m_);
  Eigen::JacobiSVD<MatrixXd> svd(alpha[0], Eigen::ComputeFullV);
  MatrixXd G = svd.matrixV().leftCols(m_);
  return (beta * G) * inverse(alpha * G);
}

MatrixXd JacobiCurve::sample(double t) const { return graph(MatrixXd(P_.transpose() * transported_frame(t))); }

std::optional<MatSeries> JacobiCurve::local_series(double t0, int order) const {
  VectorXd base = lam_;
  MatrixXd back = MatrixXd::Identity(lam_.size(), lam_.size());
  if (t0 != 0.0) {
    geom::FlowResult fr = geom::flow(S_->characteristic(), lam_, t0);
    base = fr.endpoint;
    back = fr.differential.inverse();
  }
  symp::JacobiJet J = symp::jacobi_series(*S_, base, order);
  return graph(MatrixXd(P_.transpose() * back) * J.V);
}

// ---------------------------------------------------------------------------

std::pair<double, double> Reparameterization::domain() const {
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

double Reparameterization::inverse(double s) const {
  auto [lo, hi] = domain();
  bool increasing = series(std::isfinite(lo) ? lo : 0.0, 1)[1] > 0.0;
  auto f = [&](double t) { return increasing ? value(t) - s : s - value(t); };
  // bracket
  double a = std::isfinite(lo) ? lo : -1.0, b = std::isfinite(hi) ? hi : 1.0;
  for (int i = 0; i < 200 && f(a) > 0.0; ++i) {
    if (std::isfinite(lo)) throw InputError("proj.inverse", "value outside the range of the reparameterization");
    a = 2.0 * a - 1.0;
  }
  for (int i = 0; i < 200 && f(b) < 0.0; ++i) {
    if (std::isfinite(hi)) throw InputError("proj.inverse", "value outside the range of the reparameterization");
    b = 2.0 * b + 1.0;
  }
  double t = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    double ft = f(t);
    if (ft == 0.0) return t;
    if (ft < 0.0) a = t;
    else b = t;
    Series sr = series(t, 1);
    double d = increasing ? sr[1] : -sr[1];
    double next = d > 0.0 ? t - ft / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t)) || b - a <= 1e-16 * std::max(1.0, std::abs(t)))
      return next;
    t = next;
  }
  return t;
}

const expr::Chart& SmoothMap::chart() {
  static const expr::Chart c({"t"});
  return c;
}

SmoothMap::SmoothMap(expr::ScalarExpr e)
    : e_(std::move(e)), tape_(std::make_shared<geom::Tape>(std::vector<expr::ScalarExpr>{e_}, chart())) {}

SmoothMap SmoothMap::parse(const std::string& text) { return SmoothMap(expr::parse(text, chart())); }

SmoothMap SmoothMap::identity() { return SmoothMap(expr::ScalarExpr::variable(0)); }

double SmoothMap::value(double t) const { return tape_->eval(std::span<const double>(&t, 1))[0]; }

Series SmoothMap::series(double t0, int order) const {
  std::vector<Series> x{Series::variable(order, t0)};
  return tape_->eval<Series>(x, Series(order))[0];
}

SmoothMap SmoothMap::compose(const SmoothMap& inner) const {
  std::vector<expr::ScalarExpr> r{inner.e_};
  return SmoothMap(expr::substitute(e_, r));
}

MobiusMap::MobiusMap(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
  if (a * d - b * c == 0.0) throw InputError("proj.mobius", "degenerate Mobius map (ad - bc = 0)");
}

SmoothMap MobiusMap::as_map() const {
  using expr::ScalarExpr;
  ScalarExpr t = ScalarExpr::variable(0);
  auto k = [](double v) { return ScalarExpr::constant_float(v); };
  return SmoothMap((k(a) * t + k(b)) / (k(c) * t + k(d)));
}

double schwarzian(const Series& s) {
  double d1 = s[1], d2 = 2.0 * s[2], d3 = 6.0 * s[3];
  if (std::abs(d1) < 1e-300) throw InputError("proj.critical", "critical point of the reparameterization");
  double r = d2 / d1;
  return 0.5 * d3 / d1 - 0.75 * r * r;
}

double schwarzian(const Reparameterization& psi, double t) { return schwarzian(psi.series(t, 3)); }

double schwarzian(const MobiusMap& psi, double t) {
  double w = psi.c * t + psi.d, det = psi.a * psi.d - psi.b * psi.c;
  if (w == 0.0) throw InputError("proj.critical", "pole of the Mobius map");
  Series s(3);
  s[1] = det / (w * w);
  s[2] = -psi.c * det / (w * w * w);
  s[3] = psi.c * psi.c * det / (w * w * w * w);
  return schwarzian(s);
}

// ---------------------------------------------------------------------------

MatSeries compose(const MatSeries& B, const Series& d) {
  const int K = B.order();
  MatSeries r(K, B.rows(), B.cols());
  r[0] = B[0];
  Series pw = d;
  for (int k = 1; k <= K; ++k) {
    for (int j = 0; j <= K; ++j)
      if (pw[j] != 0.0) r[j] += pw[j] * B[k];
    if (k < K) pw = pw * d;
  }
  return r;
}

ReparameterizedCurve::ReparameterizedCurve(std::shared_ptr<const GrassCurve> base,
                                           std::shared_ptr<const Reparameterization> psi)
    : base_(std::move(base)), psi_(std::move(psi)) {}

MatrixXd ReparameterizedCurve::sample(double s) const { return base_->sample(psi_->inverse(s)); }

std::optional<MatSeries> ReparameterizedCurve::local_series(double s0, int order) const {
  double t0 = psi_->inverse(s0);
  auto B = base_->local_series(t0, order);
  if (!B) return std::nullopt;
  Series p = psi_->series(t0, order);
  p[0] = 0.0;
  return compose(*B, geom::revert(p));
}

std::pair<double, double> ReparameterizedCurve::window() const {
  auto [a, b] = base_->window();
  auto [lo, hi] = psi_->domain();
  a = std::max(a, lo);
  b = std::min(b, hi);
  double pa = psi_->value(a), pb = psi_->value(b);
  return {std::min(pa, pb), std::max(pa, pb)};
}

// ---------------------------------------------------------------------------

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* residual) {
  const std::size_t N = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < N; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= N;
  my /= N;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < N; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  double slope = sxy / sxx;
  double res = 0;
  for (std::size_t i = 0; i < N; ++i) res = std::max(res, std::abs(y[i] - my - slope * (x[i] - mx)));
  if (residual) *residual = res;
  return slope;
}

// Rank-one curves: rewrite S in the osculating flags of its columns and rows.
// Entry (a, b) of S(t + d) - S(t) is then O(d^(a+b+1)) and the terms below that
// order are zeroed, so det(S(t + d) - S(t)) no longer loses its m^2 - 1 leading
// coefficients to cancellation. Other curves are returned unchanged.
std::optional<MatSeries> osculating_form(const MatSeries& B, double r) {
  const Index m = B.rows();
  if (m < 2 || B.order() < 2 * m) return std::nullopt;
  Eigen::JacobiSVD<MatrixXd> s1(B[1]);
  if (!(s1.singularValues()(0) > 0.0) || s1.singularValues()(1) > 1e-8 * s1.singularValues()(0)) return std::nullopt;
  auto flag = [&](bool rows) {
    MatrixXd U(m, m);
    for (Index a = 0; a < m; ++a) {
      MatrixXd W(m, m * (a + 1));
      for (Index l = 0; l <= a; ++l) {
        const MatrixXd& c = B[static_cast<int>(l + 1)];
        W.middleCols(l * m, m) = (rows ? MatrixXd(c.transpose()) : c) * std::pow(r, static_cast<double>(l + 1));
      }
      if (a > 0) W -= U.leftCols(a) * (U.leftCols(a).transpose() * W);
      Eigen::JacobiSVD<MatrixXd> svd(W, Eigen::ComputeThinU);
      U.col(a) = svd.matrixU().col(0);
    }
    return U;
  };
  MatrixXd U = flag(false), V = flag(true);
  MatSeries out(B.order(), m, m);
  double top = 0.0, off = 0.0;
  for (int l = 0; l <= B.order(); ++l) {
    out[l] = U.transpose() * B[l] * V;
    if (l == 0) continue;
    const double p = std::pow(r, l);
    top = std::max(top, out[l].cwiseAbs().maxCoeff() * p);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b)
        if (l < a + b + 1) {
          off = std::max(off, std::abs(out[l](a, b)) * p);
          out[l](a, b) = 0.0;
        }
  }
  if (off > 1e-6 * top) return std::nullopt;  // not of rank-one type after all
  return out;
}

// Drops coefficients under the rounding floor (in units of the radius r).
std::vector<double> denoise(std::vector<double> d, double r, double floor = 1e-10) {
  double top = 0.0, p = 1.0;
  for (double c : d) {
    top = std::max(top, std::abs(c) * p);
    p *= r;
  }
  p = 1.0;
  for (double& c : d) {
    if (std::abs(c) * p < floor * top) c = 0.0;
    p *= r;
  }
  return d;
}

}  // namespace

ZeroOrder zero_order(const GrassCurve& curve, double t1) {
  ZeroOrder z;
  const int K = curve.k() + 6;
  std::function<double(double)> logdet;
  double scale;
  std::vector<double> poly;
  if (auto B = curve.local_series(t1, K)) {
    scale = series_radius(*B);
    MatSeries D = osculating_form(*B, scale).value_or(*B);
    D[0].setZero();
    poly = denoise(det_series(D), scale);
    logdet = [&](double d) {
      double v = 0.0;
      for (std::size_t j = poly.size(); j-- > 0;) v = v * d + poly[j];
      return std::log(std::abs(v));
    };
    scale *= 1e-3;
  } else {
    auto [a, b] = curve.window();
    scale = 1e-2 * (b - a);
    logdet = [&curve, t1, S1 = curve.sample(t1)](double d) {
      return std::log(std::abs((curve.sample(t1 + d) - S1).determinant()));
    };
  }
  for (int i = 0; i <= 8; ++i) {
    double d = scale * std::pow(10.0, i / 8.0);
    z.offsets.push_back(d);
    z.log_det.push_back(logdet(d));
  }
  for (std::size_t i = 1; i < z.log_det.size(); ++i)
    if (!(z.log_det[i] > z.log_det[i - 1])) {
      std::string s = "log|det| is not increasing over the decade:";
      for (double v : z.log_det) s += " " + std::to_string(v);
      throw NumericalError("proj.zero_order_fit", s);
    }
  std::vector<double> lx;
  for (double d : z.offsets) lx.push_back(std::log(d));
  z.k = fit_slope(lx, z.log_det, &z.fit_residual);
  return z;
}

double g_function(const GrassCurve& curve, double t1, double t2, double t3, double t4) {
  double det = cross_ratio_det(curve.sample(t1), curve.sample(t2), curve.sample(t3), curve.sample(t4));
  double v = det * std::pow(number_cross_ratio(t1, t2, t3, t4), -curve.k());
  if (!(v > 0.0)) throw NumericalError("proj.log_domain", "nonpositive argument to ln in G (left the working window?)");
  return std::log(v);
}

namespace {

using Stencil = std::array<double, 4>;

using LogJet = std::array<double, 3>;  // ln|det|, then its h and h^2 coefficients

// det(S(t + h ci) - S(t + h cj)) / h^k, general curves: expand the determinant.
LogJet log_det_expanded(const MatSeries& B, double ci, double cj, int m, double r, double* sign) {
  const int k = m * m, shift = k - m, K = B.order();
  if (K < shift + 3) throw InternalError("proj.order", "series too short for rho");
  MatSeries D(K - 1, m, m);
  for (int l = 0; l < K; ++l) D[l] = B[l + 1] * (std::pow(ci, l + 1) - std::pow(cj, l + 1));
  std::vector<double> d = det_series(D);
  // the first k - m coefficients vanish on a curve with zeros of order k
  const double re = r / std::max(std::abs(ci), std::abs(cj));
  double mag = 0.0;
  for (std::size_t l = 0; l < d.size(); ++l) mag = std::max(mag, std::abs(d[l]) * std::pow(re, l));
  for (int l = 0; l < shift; ++l)
    if (std::abs(d[static_cast<std::size_t>(l)]) * std::pow(re, l) > 1e-7 * mag)
      throw NumericalError("proj.nongeneric", "zero of det(S(t)-S(t')) has order below m^2");
  double d0 = d[static_cast<std::size_t>(shift)], d1 = d[static_cast<std::size_t>(shift + 1)],
         d2 = d[static_cast<std::size_t>(shift + 2)];
  *sign = d0 > 0 ? 1.0 : -1.0;
  double a1 = d1 / d0, a2 = d2 / d0;
  return {std::log(std::abs(d0)), a1, a2 - 0.5 * a1 * a1};
}

// Same for a curve in osculating form: entry (a, b) starts at h^(a+b+1), so
// det = h^k det(M0 + h M1 + h^2 M2 + ...) and ln det follows from M0^{-1} M_l.
LogJet log_det_osculating(const MatSeries& B, double ci, double cj, int m, double r, double* sign) {
  using Real = long double;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  if (B.order() < 2 * m + 1) throw InternalError("proj.order", "series too short for rho");
  std::array<Mat, 3> M;
  for (int l = 0; l < 3; ++l) {
    M[static_cast<std::size_t>(l)].resize(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const int p = a + b + 1 + l;
        // the r^(a+b+1) factor only equilibrates, it drops out of the traces
        M[static_cast<std::size_t>(l)](a, b) =
            Real(B[p](a, b)) * (std::pow(Real(ci), p) - std::pow(Real(cj), p)) * std::pow(Real(r), a + b + 1);
      }
  }
  Eigen::FullPivLU<Mat> lu(M[0]);
  if (!lu.isInvertible()) throw NumericalError("proj.nongeneric", "zero of det(S(t)-S(t')) has order above m^2");
  const Real det = lu.determinant();
  *sign = det > 0 ? 1.0 : -1.0;
  Mat A1 = lu.solve(M[1]), A2 = lu.solve(M[2]);
  double lr = 0.0;  // undo the equilibration in the constant term
  for (int a = 0; a < m; ++a) lr += (2 * a + 1) * std::log(r);
  return {static_cast<double>(std::log(std::abs(det))) - lr, static_cast<double>(A1.trace()),
          static_cast<double>(A2.trace() - 0.5L * (A1 * A1).trace())};
}

// Quadratic coefficient of G(t + h c) from the Taylor series of S at t.
double rho_from_series(const MatSeries& raw, const Stencil& c, int m, double r) {
  const int k = m * m;
  const std::optional<MatSeries> osc = osculating_form(raw, r);
  auto log_det = [&](int i, int j, double* sign) {
    const double ci = c[static_cast<std::size_t>(i)], cj = c[static_cast<std::size_t>(j)];
    return osc ? log_det_osculating(*osc, ci, cj, m, r, sign) : log_det_expanded(raw, ci, cj, m, r, sign);
  };
  double s43, s21, s14, s32;
  auto l43 = log_det(3, 2, &s43), l21 = log_det(1, 0, &s21), l14 = log_det(0, 3, &s14), l32 = log_det(2, 1, &s32);
  double cr = number_cross_ratio(c[0], c[1], c[2], c[3]);
  if (s43 * s21 * s14 * s32 * std::pow(cr > 0 ? 1.0 : -1.0, k) < 0)
    throw NumericalError("proj.log_domain", "cross-ratio determinant has the wrong sign");
  LogJet G;
  for (int q = 0; q < 3; ++q) G[q] = l43[q] + l21[q] - l14[q] - l32[q];
  G[0] -= k * std::log(std::abs(cr));
  if (std::abs(G[0]) > 1e-6 || std::abs(G[1]) * r > 1e-6)
    throw NumericalError("proj.nongeneric", "G does not vanish to second order on the diagonal");
  return G[2] / ((c[0] - c[2]) * (c[1] - c[3]));
}

double rho_from_samples(const GrassCurve& curve, double t, double h) {
  const Stencil c{1, 2, -1, -2};
  const double q = (c[0] - c[2]) * (c[1] - c[3]);
  auto at = [&](double s) {
    double plus = g_function(curve, t + s * c[0], t + s * c[1], t + s * c[2], t + s * c[3]);
    double minus = g_function(curve, t - s * c[0], t - s * c[1], t - s * c[2], t - s * c[3]);
    return 0.5 * (plus + minus) / (s * s * q);
  };
  // two Richardson levels: the symmetric average has only even powers of h
  auto r1 = [&](double s) { return (4.0 * at(s / 2) - at(s)) / 3.0; };
  return (16.0 * r1(h / 2) - r1(h)) / 15.0;
}

}  // namespace

RhoResult rho(const GrassCurve& curve, double t) {
  RhoResult out;
  const int m = curve.m();
  if (auto B = curve.local_series(t, m * m + 4)) {
    double r = series_radius(*B);
    out.value = rho_from_series(*B, {1, 2, -1, -2}, m, r);
    out.check = rho_from_series(*B, {1, 3, -2, -1}, m, r);
    out.from_series = true;
  } else {
    auto [a, b] = curve.window();
    double h = 1e-2 * (b - a);
    out.value = rho_from_samples(curve, t, h);
    out.check = rho_from_samples(curve, t, 2 * h);
  }
  double diff = std::abs(out.value - out.check);
  if (diff > 1e-6 * std::max(std::abs(out.value), std::abs(out.check)) + 1e-9) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "rho stencils disagree at t = %.6g: %.12g vs %.12g", t, out.value, out.check);
    throw NumericalError("proj.stencil", buf);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using OdeState = std::array<double, 4>;

}  // namespace

ProjectiveParameter::ProjectiveParameter(std::vector<double> rho_samples, double a, double b, int k, double t0)
    : a_(a), b_(b), t0_(t0), k_(k), rho_(std::move(rho_samples)) {
  if (rho_.size() < 5) throw InputError("proj.samples", "projectivize needs at least 5 rho samples");
  if (!(b > a) || t0 < a || t0 > b) throw InputError("proj.window", "bad projectivization window");
  h_ = (b - a) / static_cast<double>(rho_.size() - 1);
  spline_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(rho_.begin(), rho_.end(),
                                                                                          a, h_);
  for (std::size_t i = 0; i < rho_.size(); ++i) knot_t_.push_back(a + static_cast<double>(i) * h_);
  knot_state_.resize(rho_.size());
  // march outward from t0 knot by knot
  namespace odeint = boost::numeric::odeint;
  auto rhs = [this](const OdeState& y, OdeState& dy, double t) {
    double Q = potential(t);
    dy = {y[1], -Q * y[0], y[3], -Q * y[2]};
  };
  auto advance = [&](OdeState y, double from, double to) {
    if (from == to) return y;
    auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<OdeState>());
    odeint::integrate_adaptive(stepper, rhs, y, from, to, (to - from) / 16);
    return y;
  };
  std::size_t c = static_cast<std::size_t>(std::clamp((t0 - a) / h_, 0.0, static_cast<double>(rho_.size() - 1)));
  OdeState start{0.0, 1.0, 1.0, 0.0};
  OdeState y = advance(start, t0, knot_t_[c]);
  knot_state_[c] = {y[0], y[1], y[2], y[3]};
  for (std::size_t i = c + 1; i < rho_.size(); ++i) {
    y = advance(y, knot_t_[i - 1], knot_t_[i]);
    knot_state_[i] = {y[0], y[1], y[2], y[3]};
  }
  y = {knot_state_[c].u1, knot_state_[c].v1, knot_state_[c].u2, knot_state_[c].v2};
  for (std::size_t i = c; i-- > 0;) {
    y = advance(y, knot_t_[i + 1], knot_t_[i]);
    knot_state_[i] = {y[0], y[1], y[2], y[3]};
  }
  for (std::size_t i = 0; i < knot_state_.size(); ++i)
    if (std::abs(knot_state_[i].u2) < 1e-8 || (i > 0 && knot_state_[i].u2 * knot_state_[i - 1].u2 < 0.0))
      throw NumericalError("proj.u2_zero", "u2 vanishes inside the window; shrink it");
}

double ProjectiveParameter::potential(double t) const { return 3.0 / k_ * (*spline_)(t); }

ProjectiveParameter::State ProjectiveParameter::state_at(double t) const {
  if (t < a_ - 1e-12 * (b_ - a_) || t > b_ + 1e-12 * (b_ - a_))
    throw InputError("proj.window", "parameter outside the projectivization window");
  std::size_t i = static_cast<std::size_t>(std::clamp(std::round((t - a_) / h_), 0.0, static_cast<double>(rho_.size() - 1)));
  const State& s = knot_state_[i];
  OdeState y{s.u1, s.v1, s.u2, s.v2};
  if (t != knot_t_[i]) {
    namespace odeint = boost::numeric::odeint;
    auto rhs = [this](const OdeState& x, OdeState& dx, double tt) {
      double Q = potential(tt);
      dx = {x[1], -Q * x[0], x[3], -Q * x[2]};
    };
    auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<OdeState>());
    odeint::integrate_adaptive(stepper, rhs, y, knot_t_[i], t, (t - knot_t_[i]) / 4);
  }
  return {y[0], y[1], y[2], y[3]};
}

double ProjectiveParameter::value(double t) const {
  State s = state_at(t);
  return s.u1 / s.u2;
}

Series ProjectiveParameter::series(double t, int order) const {
  State s = state_at(t);
  // Q is a cubic on the spline cell containing t
  double cell = std::clamp(std::floor((t - a_) / h_), 0.0, static_cast<double>(rho_.size() - 2));
  double tc = a_ + cell * h_;
  double q3 = 3.0 / k_ * ((*spline_).double_prime(tc + 0.75 * h_) - (*spline_).double_prime(tc + 0.25 * h_)) / (0.5 * h_);
  std::array<double, 4> q{potential(t), 3.0 / k_ * spline_->prime(t), 1.5 / k_ * spline_->double_prime(t), q3 / 6.0};
  auto solve = [&](double u0, double v0) {
    Series u(order);
    u[0] = u0;
    if (order >= 1) u[1] = v0;
    for (int j = 0; j + 2 <= order; ++j) {
      double acc = 0.0;
      for (int l = 0; l <= std::min(j, 3); ++l) acc += q[static_cast<std::size_t>(l)] * u[j - l];
      u[j + 2] = -acc / ((j + 2) * (j + 1));
    }
    return u;
  };
  return solve(s.u1, s.v1) / solve(s.u2, s.v2);
}

Projectivization projectivize(std::shared_ptr<const GrassCurve> curve, double a, double b, int samples, int checks) {
  if (samples < 5 || checks < 2) throw InputError("proj.samples", "too few samples");
  Projectivization out;
  std::vector<double> rho_s;
  for (int i = 0; i < samples; ++i) {
    double t = a + (b - a) * i / (samples - 1);
    rho_s.push_back(rho(*curve, t).value);
  }
  auto psi = std::make_shared<ProjectiveParameter>(rho_s, a, b, curve->k(), 0.5 * (a + b));
  out.psi = psi;
  ReparameterizedCurve fresh(curve, psi);
  for (int j = 0; j < checks; ++j) {
    double t = a + (b - a) * j / (checks - 1);
    out.t.push_back(t);
    out.rho_before.push_back(rho(*curve, t).value);
    double r = rho(fresh, psi->value(t)).value;
    out.rho_after.push_back(r);
    out.max_residual = std::max(out.max_residual, std::abs(r));
  }
  return out;
}

}  // namespace maxclass::proj
