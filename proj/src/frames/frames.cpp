#include "maxclass/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "maxclass/error.hpp"

namespace maxclass::frames {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using expr::ScalarExpr;
using geom::Series;
using geom::VecField;

std::vector<VectorXd> random_points(int n, std::uint64_t seed, int count, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<VectorXd> pts;
  for (int k = 0; k < count; ++k) {
    VectorXd q(n);
    for (int i = 0; i < n; ++i) q(i) = u(rng);
    pts.push_back(q);
  }
  return pts;
}

// ---------------------------------------------------------------------------

namespace {

void require_regular(const std::vector<SubspaceFrame>& tower, int n) {
  for (std::size_t j = 0; j < tower.size(); ++j)
    if (tower[j].dim() != n - 1 + static_cast<int>(j))
      throw InputError("frames.not_regular", "dim J^(" + std::to_string(j) + ") = " + std::to_string(tower[j].dim()) +
                                                 ", expected " + std::to_string(n - 1 + static_cast<int>(j)));
}

void check_index(int n, int i) {
  if (n < 4 || i < 0 || i > n - 4)
    throw InputError("frames.index", "need 0 <= i <= n-4 (i = " + std::to_string(i) + ", n = " + std::to_string(n) + ")");
}

}  // namespace

SubspaceFrame skew_complement(const symp::Symplectification& S, const VectorXd& lam, int i) {
  const int n = S.n();
  check_index(n, i);
  auto tower = symp::extension_tower(S, lam, i);
  require_regular(tower, n);
  MatrixXd T = symp::tangent_space(S, lam).basis();
  MatrixXd M = tower.back().basis().transpose() * symp::symplectic_matrix(n) * T;
  SubspaceFrame K = SubspaceFrame::kernel_of(M);
  require_stable(K.record(), "frames.unstable_rank");
  SubspaceFrame out = SubspaceFrame::span_of(T * K.basis());
  // both contain the characteristic line; modulo it the dimensions add up to 2(n-2)
  if (out.dim() != n - 1 - i || (out.dim() - 1) + (tower.back().dim() - 1) != 2 * (n - 2))
    throw NumericalError("frames.dimension", "dim J_(" + std::to_string(i) + ") = " + std::to_string(out.dim()));
  return out;
}

SubspaceFrame vertical_space(const symp::Symplectification& S, const VectorXd& lam, int i) {
  const int n = S.n();
  SubspaceFrame L = skew_complement(S, lam, i);
  SubspaceFrame K = SubspaceFrame::kernel_of(L.basis().topRows(n));
  require_stable(K.record(), "frames.unstable_rank");
  SubspaceFrame V = SubspaceFrame::span_of(L.basis() * K.basis());
  // at i = 0 the skew complement is J itself, whose projection is all of D
  const int expect = i == 0 ? n - 3 : n - 2 - i;
  if (V.dim() != expect)
    throw NumericalError("frames.dimension", "dim V_" + std::to_string(i) + " = " + std::to_string(V.dim()));
  return V;
}

// ---------------------------------------------------------------------------

namespace {

MatSeries hstack(const std::vector<MatSeries>& blocks) {
  const int K = blocks.front().order();
  Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  MatSeries r(K, blocks.front().rows(), cols);
  for (int k = 0; k <= K; ++k) {
    Index c = 0;
    for (const auto& b : blocks) {
      r[k].middleCols(c, b.cols()) = b[k];
      c += b.cols();
    }
  }
  return r;
}

// psi = u1/u2 with u'' + Q u = 0, u1 = (0, 1), u2 = (1, 0) at 0.
Series projective_series(const Series& Q, int order) {
  auto solve = [&](double u0, double v0) {
    Series u(order);
    u[0] = u0;
    if (order >= 1) u[1] = v0;
    for (int j = 0; j + 2 <= order; ++j) {
      double conv = 0.0;
      for (int i = 0; i <= j && i <= Q.order(); ++i) conv += Q[i] * u[j - i];
      u[j + 2] = -conv / ((j + 1.0) * (j + 2.0));
    }
    return u;
  };
  return solve(0.0, 1.0) / solve(1.0, 0.0);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

double jacobi_density(const std::shared_ptr<const symp::Symplectification>& S, const VectorXd& lam) {
  proj::JacobiCurve C(S, lam);
  return proj::rho(C, 0.0).value;
}

EpsilonResult epsilon_normalize(const symp::Symplectification& S, const VectorXd& lam, const Germ& germ) {
  const int n = S.n(), m = n - 3;
  if (m < 2) throw InputError("frames.dimension", "epsilon normalization needs n >= 5");
  if (germ.a == 0.0) throw InputError("frames.germ", "germ velocity a must be nonzero");
  skew_complement(S, lam, n - 4);  // regularity
  const int top = n - 4, order = top + m + 2;
  symp::JacobiJet J = symp::jacobi_series(S, lam, order);

  // J_(n-4) transported back to lambda: sigma-complement of span{V, V', ...}
  // inside the (flow-invariant) tangent space of the annihilator
  std::vector<MatSeries> blocks{J.V};
  for (int j = 1; j <= top; ++j) blocks.push_back(blocks.back().derivative());
  MatSeries K = hstack(blocks).truncated(order - top);
  MatrixXd T = symp::tangent_space(S, lam).basis();
  MatrixXd JT = symp::symplectic_matrix(n) * T;
  RankRecord rec;
  MatSeries ker = kernel_series(K.transpose() * JT, rank_tolerance(), &rec);
  require_stable(rec, "frames.unstable_rank");
  if (ker.cols() != 3) throw NumericalError("frames.dimension", "transported J_(n-4) is not 3-dimensional");

  // value at lambda: vertical and orthogonal to e
  VectorXd e = symp::Symplectification::euler(lam);
  MatrixXd L0 = T * ker[0];
  SubspaceFrame vert = SubspaceFrame::kernel_of(L0.topRows(n));
  if (vert.dim() != 2) throw NumericalError("frames.dimension", "V_{n-4} is not 2-dimensional");
  MatrixXd C2 = vert.basis();
  VectorXd w = (L0 * C2).transpose() * e;
  Eigen::Vector2d d(-w(1), w(0));
  if (d.norm() == 0.0) d << 1.0, 0.0;
  VectorXd c = C2 * d;
  c /= (L0 * c).norm();
  MatSeries v = T * ker * MatrixXd(c);

  // time change tau(t) = phi^{-1}(t) with phi = M o psi
  const int K2 = m + 1;
  Series Q(std::max(0, m - 3));
  const double k = m * m;
  if (m >= 3) {
    std::shared_ptr<const symp::Symplectification> Sp(std::shared_ptr<void>(), &S);  // non-owning
    proj::JacobiCurve curve(Sp, lam);
    auto rho_at = [&](double t) { return proj::rho(curve, t).value; };
    Q[0] = 3.0 / k * rho_at(0.0);
    if (m >= 4) {
      double hstep = 1e-2 * curve.window().second;
      double d1 = (rho_at(hstep) - rho_at(-hstep)) / (2 * hstep);
      double d1h = (rho_at(hstep / 2) - rho_at(-hstep / 2)) / hstep;
      Q[1] = 3.0 / k * (4 * d1h - d1) / 3;
    }
    if (m >= 5) throw InputError("frames.dimension", "epsilon normalization is implemented for n <= 7");
  }
  Series psi = projective_series(Q, K2);
  Series one(K2, 1.0);
  Series phi = (germ.a * psi) / (one - (germ.b / (2 * germ.a)) * psi);
  Series tau = geom::revert(phi);

  auto pairing_of = [&](const MatSeries& section) {
    MatSeries vt = proj::compose(section.truncated(K2), tau);
    VectorXd hi = factorial(m) * VectorXd(vt[m].col(0)), lo = factorial(m - 1) * VectorXd(vt[m - 1].col(0));
    return symp::sigma(hi, lo);
  };
  EpsilonResult out;
  out.euler = e;
  out.raw_pairing = pairing_of(v);
  if (!(std::abs(out.raw_pairing) > 1e-300) || !std::isfinite(out.raw_pairing))
    throw NumericalError("frames.pairing", "sigma((ad H)^m E, (ad H)^(m-1) E) vanishes: lambda is not of maximal class");
  out.scale = 1.0 / std::sqrt(std::abs(out.raw_pairing));
  MatSeries vs = v;
  vs *= out.scale;
  out.epsilon = vs[0].col(0);
  out.pairing = pairing_of(vs);

  // Euler field transported along the same curve
  MatSeries ecurve(J.flow.phi.order(), 2 * n, 1);
  for (int kk = 0; kk <= ecurve.order(); ++kk)
    for (int i = 0; i < n; ++i) ecurve[kk](n + i, 0) = J.flow.x[static_cast<std::size_t>(n + i)][kk];
  MatSeries et = inverse(J.flow.phi) * ecurve;
  out.euler_shift_pairing = pairing_of(vs.truncated(K2) + et.truncated(K2));
  return out;
}

// ---------------------------------------------------------------------------

double Gl2Check::max() const { return std::max({g1g2, g1h, g2h, g0h, g0g1, g0g2}); }

SigmaFields sigma_flow_fields(const symp::Symplectification& S) {
  const std::size_t n = static_cast<std::size_t>(S.n());
  std::vector<std::string> names = S.chart().names();
  names.push_back("phi_a");
  names.push_back("phi_b");
  SigmaFields F;
  F.chart = expr::Chart(names);
  F.k = (S.n() - 3) * (S.n() - 3);
  const std::size_t N = 2 * n + 2, ia = 2 * n, ib = 2 * n + 1;
  ScalarExpr a = ScalarExpr::variable(ia), b = ScalarExpr::variable(ib);
  auto cst = [](std::int64_t v) { return ScalarExpr::constant(v); };
  std::vector<ScalarExpr> g0(N), g1(N), g2(N), h(N);
  for (std::size_t i = 0; i < n; ++i) g0[n + i] = ScalarExpr::variable(n + i);
  g0[ia] = a;
  g0[ib] = cst(2) * b;
  g1[ia] = cst(2) * a;
  g1[ib] = cst(2) * b;
  // generator of phi -> phi / (1 - s phi); with the opposite orientation
  // [g2, h] comes out as -g1
  g2[ib] = cst(2) * pow(a, 2);
  const VecField& Hc = S.characteristic_field();
  for (std::size_t i = 0; i < 2 * n; ++i)
    if (!Hc[i].is_zero()) h[i] = Hc[i] / a;
  h[ia] = b / a;
  h[ib] = expr::ScalarExpr::constant(expr::Rational{3, 2}) * pow(b, 2) / pow(a, 2);
  F.g0 = VecField(F.chart, g0);
  F.g1 = VecField(F.chart, g1);
  F.g2 = VecField(F.chart, g2);
  F.h_flat = VecField(F.chart, h);
  return F;
}

Gl2Check check_gl2(const SigmaFields& F, const VectorXd& u, const DensityFn& rho) {
  const Index N = u.size(), n2 = N - 2;
  VectorXd lam = u.head(n2);
  const double R = 6.0 / F.k * rho(lam);
  // e(R) along the Euler flow p -> e^s p, central differences and two Richardson levels
  auto scaled = [&](double s) {
    VectorXd l = lam;
    l.tail(n2 / 2) *= std::exp(s);
    return 6.0 / F.k * rho(l);
  };
  auto cd = [&](double s) { return (scaled(s) - scaled(-s)) / (2 * s); };
  const double c1 = cd(0.04), c2 = cd(0.02), c3 = cd(0.01);
  const double r1 = (4.0 * c2 - c1) / 3.0, r2 = (4.0 * c3 - c2) / 3.0;
  const double eR = (16.0 * r2 - r1) / 15.0;

  auto ev = [&](const VecField& X) { return X.evaluate(u); };
  auto db = [&](const VecField& X) {
    std::vector<ScalarExpr> c;
    for (const auto& comp : X.components()) c.push_back(expr::diff(comp, static_cast<std::size_t>(N - 1)));
    return VecField(X.chart(), c).evaluate(u);
  };
  VectorXd eb = VectorXd::Unit(N, N - 1);
  VectorXd h = ev(F.h_flat) + R * eb;
  Gl2Check r;
  auto rel = [](const VectorXd& d, const VectorXd& ref) { return d.norm() / std::max(1.0, ref.norm()); };
  const VectorXd g1 = ev(F.g1), g2 = ev(F.g2);
  r.g1g2 = rel(ev(geom::lie_bracket(F.g1, F.g2)) - 2 * g2, g2);
  // [X, h_flat + R d/db] = [X, h_flat] + X(R) d/db - R dX/db; X(R) = 0 unless X moves lambda
  VectorXd g1h = ev(geom::lie_bracket(F.g1, F.h_flat)) - R * db(F.g1);
  VectorXd g2h = ev(geom::lie_bracket(F.g2, F.h_flat)) - R * db(F.g2);
  VectorXd g0h = ev(geom::lie_bracket(F.g0, F.h_flat)) + eR * eb - R * db(F.g0);
  r.g1h = rel(g1h + 2 * h, h);
  r.g2h = rel(g2h - g1, g1);
  r.g0h = rel(g0h, h);
  r.g0g1 = rel(ev(geom::lie_bracket(F.g0, F.g1)), g1);
  r.g0g2 = rel(ev(geom::lie_bracket(F.g0, F.g2)), g2);
  return r;
}

// ---------------------------------------------------------------------------

double StructureTable::antisymmetry_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) r = std::max(r, (c[i][j] + c[j][i]).cwiseAbs().maxCoeff());
  return r;
}

double StructureTable::jacobi_residual() const {
  const std::size_t N = size();
  // [[X_i, X_j], X_k] + cyclic, in coefficients
  auto br = [&](const VectorXd& x, std::size_t k) {
    VectorXd out = VectorXd::Zero(static_cast<Index>(N));
    for (std::size_t l = 0; l < N; ++l)
      if (x(static_cast<Index>(l)) != 0.0) out += x(static_cast<Index>(l)) * c[l][k];
    return out;
  };
  double r = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      for (std::size_t k = j + 1; k < N; ++k) {
        VectorXd s = br(c[i][j], k) + br(c[j][k], i) + br(c[k][i], j);
        r = std::max(r, s.cwiseAbs().maxCoeff());
      }
  return r;
}

namespace {

std::string format_coeff(double v) {
  double r = std::round(v);
  char buf[64];
  if (std::abs(v - r) < 1e-8) std::snprintf(buf, sizeof buf, "%.0f", r);
  else std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<std::string> StructureTable::lines(double tol) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) {
      std::string rhs;
      for (std::size_t k = 0; k < size(); ++k) {
        double v = c[i][j](static_cast<Index>(k));
        if (std::abs(v) <= tol) continue;
        std::string coeff = format_coeff(v);
        if (!rhs.empty()) {
          if (coeff[0] == '-') {
            rhs += " - ";
            coeff.erase(0, 1);
          } else {
            rhs += " + ";
          }
        }
        rhs += (coeff == "1" ? "" : coeff == "-1" ? "-" : coeff + " ") + labels[k];
      }
      if (!rhs.empty()) out.push_back("[" + labels[i] + "," + labels[j] + "] = " + rhs);
    }
  return out;
}

namespace {

std::vector<std::string> model_labels(int m) {
  std::vector<std::string> l{"h", "g0", "g1", "g2"};
  for (int i = 1; i <= 2 * m; ++i) l.push_back("e" + std::to_string(i));
  l.push_back("eta");
  return l;
}

}  // namespace

StructureTable expected_model_table(int m) {
  StructureTable t;
  t.labels = model_labels(m);
  const std::size_t N = t.labels.size();
  t.c.assign(N, std::vector<VectorXd>(N, VectorXd::Zero(static_cast<Index>(N))));
  const std::size_t H = 0, G0 = 1, G1 = 2, G2 = 3, ETA = N - 1;
  auto E = [](int i) { return static_cast<std::size_t>(3 + i); };
  auto set = [&](std::size_t i, std::size_t j, std::size_t k, double v) {
    t.c[i][j](static_cast<Index>(k)) += v;
    t.c[j][i](static_cast<Index>(k)) -= v;
  };
  set(G1, G2, G2, 2.0);
  set(G1, H, H, -2.0);
  set(G2, H, G1, 1.0);
  for (int i = 1; i < 2 * m; ++i) set(H, E(i), E(i + 1), 1.0);  // e_(i+1) = [h, e_i]
  for (int i = 1; i <= m; ++i) set(E(i), E(2 * m - i + 1), ETA, (i % 2 == 1) ? 1.0 : -1.0);
  for (int i = 1; i <= 2 * m; ++i) {
    set(G1, E(i), E(i), 2.0 * m - 2.0 * i + 1.0);
    if (i > 1) set(G2, E(i), E(i - 1), (i - 1.0) * (2.0 * m + 1.0 - i));
    set(G0, E(i), E(i), -1.0);
  }
  set(G1, ETA, ETA, 2.0 * m);
  set(G0, ETA, ETA, -2.0);
  return t;
}

VectorXd expand_in_frame(const VecField& B, const std::vector<VecField>& frame, const std::vector<VectorXd>& points,
                         double* residual) {
  const Index n = static_cast<Index>(B.dim()), P = static_cast<Index>(points.size());
  MatrixXd A(n * P, static_cast<Index>(frame.size()));
  VectorXd rhs(n * P);
  for (Index p = 0; p < P; ++p) {
    const VectorXd& x = points[static_cast<std::size_t>(p)];
    for (std::size_t j = 0; j < frame.size(); ++j) A.block(p * n, static_cast<Index>(j), n, 1) = frame[j].evaluate(x);
    rhs.segment(p * n, n) = B.evaluate(x);
  }
  VectorXd w = A.colwise().norm().cwiseMax(1e-300).cwiseInverse().transpose();
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A * w.asDiagonal());
  if (qr.rank() < A.cols()) throw NumericalError("frames.dependent", "frame fields are linearly dependent over the sample");
  VectorXd c = w.cwiseProduct(qr.solve(rhs));
  if (residual) *residual = (A * c - rhs).norm();
  return c;
}

namespace {

// zero brackets of large fields come out as rounding noise of size |F||G| eps
double bracket_scale(const VecField& F, const VecField& G, const std::vector<VectorXd>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, F.evaluate(p).norm() * G.evaluate(p).norm());
  return s;
}

}  // namespace

namespace {

struct ModelFields {
  expr::Chart chart;
  VecField X1, X2, T, Sc, Ysc, P, Z;
  std::vector<VecField> Y;
};

// z' = (y^(m))^2 on (x, p0..pm, q0): translations, scalings, the projective
// field P and the 2m fields built from x^j.
ModelFields model_fields(int m) {
  dist::Distribution2 D = dist::maximal_model(m + 3);
  ModelFields f;
  f.chart = D.chart();
  f.X1 = D.X1();
  f.X2 = D.X2();
  const std::size_t n = f.chart.dim(), q0 = n - 1;
  auto p = [](int i) { return "p" + std::to_string(i); };
  auto comps = [&](const std::vector<std::pair<std::size_t, std::string>>& nz) {
    std::vector<std::string> c(n, "0");
    for (const auto& [i, s] : nz) c[i] = s;
    return VecField::parse(f.chart, c);
  };
  auto pi = [](int i) { return static_cast<std::size_t>(1 + i); };
  f.T = comps({{0, "1"}});
  std::vector<std::pair<std::size_t, std::string>> sc{{0, "x"}}, ys, pp{{0, "x^2"}};
  for (int i = 0; i <= m; ++i) {
    sc.emplace_back(pi(i), std::to_string(-i) + "*" + p(i));
    ys.emplace_back(pi(i), p(i));
    std::string s = std::to_string(2 * m - 1 - 2 * i) + "*x*" + p(i);
    if (i > 0) s += " + " + std::to_string(i * (2 * m - i)) + "*" + p(i - 1);
    pp.emplace_back(pi(i), s);
  }
  sc.emplace_back(q0, std::to_string(1 - 2 * m) + "*q0");
  ys.emplace_back(q0, "2*q0");
  pp.emplace_back(q0, std::to_string(m * m) + "*" + p(m - 1) + "^2");
  f.Sc = comps(sc);
  f.Ysc = comps(ys);
  f.P = comps(pp);
  f.Z = comps({{q0, "1"}});
  // d^i/dx^i x^j = j!/(j-i)! x^(j-i)
  auto mono = [](int j, int i) -> std::string {
    if (i > j) return "0";
    double c = 1.0;
    for (int r = j - i + 1; r <= j; ++r) c *= r;
    std::string s = std::to_string(static_cast<long long>(c));
    if (j - i > 0) s += "*x^" + std::to_string(j - i);
    return s;
  };
  for (int j = 0; j < 2 * m; ++j) {
    std::vector<std::pair<std::size_t, std::string>> y;
    for (int i = 0; i <= m; ++i) y.emplace_back(pi(i), mono(j, i));
    if (j >= m) {
      std::string z;
      for (int l = 0; l <= j - m; ++l) {
        std::string term = mono(j, m + l) + "*" + p(m - 1 - l);
        z += (l == 0 ? "2*(" : (l % 2 ? " - " : " + ")) + term;
      }
      y.emplace_back(q0, z + ")");
    }
    f.Y.push_back(comps(y));
  }
  return f;
}

double symmetry_defect(const VecField& F, const ModelFields& mf, const std::vector<VectorXd>& pts) {
  double r = 0.0;
  for (const VecField* X : {&mf.X1, &mf.X2}) {
    VecField B = geom::lie_bracket(F, *X);
    for (const auto& q : pts) {
      MatrixXd D(q.size(), 2);
      D << mf.X1.evaluate(q), mf.X2.evaluate(q);
      VectorXd b = B.evaluate(q);
      VectorXd res = b - D * D.colPivHouseholderQr().solve(b);
      r = std::max(r, res.norm() / std::max(1.0, b.norm()));
    }
  }
  return r;
}

}  // namespace

ModelFrame model_frame(int n, std::uint64_t seed, int points) {
  if (n < 5) throw InputError("frames.dimension", "model_frame needs n >= 5");
  const int m = n - 3;
  ModelFields mf = model_fields(m);
  ModelFrame out;
  out.n = n;
  out.m = m;
  out.labels = model_labels(m);
  VecField g1 = expr::ScalarExpr::constant(2) * mf.Sc + expr::ScalarExpr::constant(2 * m - 1) * mf.Ysc;
  std::vector<VecField> eps{mf.Y[static_cast<std::size_t>(2 * m - 1)]};
  for (int i = 1; i < 2 * m; ++i) eps.push_back(geom::lie_bracket(mf.T, eps.back()));
  VecField eta = geom::lie_bracket(eps.front(), eps.back());
  out.fields = {mf.T, mf.Ysc, g1, -mf.P};
  for (auto& e : eps) out.fields.push_back(e);
  out.fields.push_back(eta);

  auto pts = random_points(n, seed, points);
  for (const auto& F : out.fields) out.symmetry_residual = std::max(out.symmetry_residual, symmetry_defect(F, mf, pts));

  // dimension of the algebra: rank of the stacked evaluations
  MatrixXd A(n * points, static_cast<Index>(out.fields.size()));
  for (int p = 0; p < points; ++p)
    for (std::size_t j = 0; j < out.fields.size(); ++j)
      A.block(p * n, static_cast<Index>(j), n, 1) = out.fields[j].evaluate(pts[static_cast<std::size_t>(p)]);
  out.algebra_dim = numerical_rank(A).rank;

  const std::size_t N = out.fields.size();
  out.table.labels = out.labels;
  out.table.c.assign(N, std::vector<VectorXd>(N, VectorXd::Zero(static_cast<Index>(N))));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      double res = 0.0;
      VectorXd c = expand_in_frame(geom::lie_bracket(out.fields[i], out.fields[j]), out.fields, pts, &res);
      out.table.fit_residual = std::max(out.table.fit_residual, res / bracket_scale(out.fields[i], out.fields[j], pts));
      for (Index k = 0; k < c.size(); ++k)
        if (std::abs(c(k)) < 1e-11) c(k) = 0.0;
      out.table.c[i][j] = c;
      out.table.c[j][i] = -c;
    }

  // Heisenberg part: brackets of e_i, eta stay in span{eta}, eta central
  const std::size_t first = 4, ETA = N - 1;
  for (std::size_t i = first; i < N; ++i)
    for (std::size_t j = first; j < N; ++j) {
      VectorXd c = out.table.c[i][j];
      if (i != ETA && j != ETA) c(static_cast<Index>(ETA)) = 0.0;
      out.heisenberg_residual = std::max(out.heisenberg_residual, c.cwiseAbs().maxCoeff());
    }

  StructureTable expect = expected_model_table(m);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k) {
        double got = out.table.c[i][j](static_cast<Index>(k)), want = expect.c[i][j](static_cast<Index>(k));
        bool integral = std::abs(got - std::round(got)) < 1e-8;
        if (std::abs(got - want) > 1e-8 || !integral)
          out.mismatches.push_back("[" + out.labels[i] + "," + out.labels[j] + "] coefficient of " + out.labels[k] +
                                   ": computed " + format_coeff(got) + ", expected " + format_coeff(want));
      }
  if (out.table.fit_residual > 1e-8) out.mismatches.push_back("bracket table fit residual " + std::to_string(out.table.fit_residual));
  return out;
}

Kappa kappa_coefficients(const ModelFrame& frame, const VecField& eps1, const std::vector<VectorXd>& points) {
  const int m = frame.m;
  const VecField& h = frame.fields[0];
  std::vector<VecField> eps{eps1};
  for (int i = 1; i < 2 * m; ++i) eps.push_back(geom::lie_bracket(h, eps.back()));
  std::vector<VecField> basis(frame.fields.begin(), frame.fields.begin() + 4);
  for (auto& e : eps) basis.push_back(e);
  basis.push_back(geom::lie_bracket(eps.front(), eps.back()));
  Kappa k;
  double r1 = 0.0;
  VectorXd c12 = expand_in_frame(geom::lie_bracket(eps[0], eps[1]), basis, points, &r1);
  k.k1 = c12(5);
  k.fit_residual = r1 / bracket_scale(eps[0], eps[1], points);
  if (frame.n > 5) {
    double r2 = 0.0;
    VectorXd c14 = expand_in_frame(geom::lie_bracket(eps[0], eps[3]), basis, points, &r2);
    k.k2 = c14(6);
    k.k3 = c14(7);
    k.fit_residual = std::max(k.fit_residual, r2 / bracket_scale(eps[0], eps[3], points));
  }
  return k;
}

}  // namespace maxclass::frames
