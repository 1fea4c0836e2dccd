#include "maxclass/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "maxclass/error.hpp"

namespace maxclass::symp {

using expr::ScalarExpr;
using geom::Series;
using geom::VecField;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::VectorXd CotangentPoint::joined() const {
  VectorXd lam(q.size() + p.size());
  lam << q, p;
  return lam;
}

CotangentPoint CotangentPoint::split(const VectorXd& lam) {
  const Index n = lam.size() / 2;
  return {lam.head(n), lam.tail(n)};
}

MatrixXd symplectic_matrix(Index n) {
  MatrixXd J = MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = -MatrixXd::Identity(n, n);
  J.bottomLeftCorner(n, n) = MatrixXd::Identity(n, n);
  return J;
}

double sigma(const VectorXd& v, const VectorXd& w) {
  const Index n = v.size() / 2;
  return v.tail(n).dot(w.head(n)) - v.head(n).dot(w.tail(n));
}

namespace {

expr::Chart cotangent_chart(const expr::Chart& base) {
  std::vector<std::string> names = base.names();
  for (const auto& s : base.names()) names.push_back("xi_" + s);
  return expr::Chart(names);
}

ScalarExpr pairing(const VecField& X, std::size_t n) {
  ScalarExpr h;
  for (std::size_t k = 0; k < n; ++k)
    if (!X[k].is_zero()) h = h + ScalarExpr::variable(n + k) * X[k];
  return h;
}

// Hamiltonian field (dh/dp, -dh/dq) of a function on T*M.
std::vector<ScalarExpr> hamiltonian_field(const ScalarExpr& h, std::size_t n) {
  std::vector<ScalarExpr> c(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = expr::diff(h, n + k);
    c[n + k] = -expr::diff(h, k);
  }
  return c;
}

std::span<const double> as_span(const VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

MatSeries series_matrix(const std::vector<Series>& entries, Index rows, Index cols) {
  const int K = entries.front().order();
  MatSeries m(K, rows, cols);
  for (int k = 0; k <= K; ++k)
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m[k](i, j) = entries[static_cast<std::size_t>(i * cols + j)][k];
  return m;
}

}  // namespace

Symplectification::Symplectification(dist::Distribution2 D) : D_(std::move(D)) {
  const std::size_t n = D_.chart().dim();
  chart_ = cotangent_chart(D_.chart());
  X3_ = geom::lie_bracket(D_.X1(), D_.X2());
  VecField X13 = geom::lie_bracket(D_.X1(), X3_);
  VecField X23 = geom::lie_bracket(D_.X2(), X3_);
  ScalarExpr h1 = pairing(D_.X1(), n), h2 = pairing(D_.X2(), n), h3 = pairing(X3_, n);
  ScalarExpr h13 = pairing(X13, n), h23 = pairing(X23, n);
  ham_ = geom::Tape({h1, h2, h3, h13, h23}, chart_);

  std::vector<ScalarExpr> d;
  for (const auto* h : {&h1, &h2, &h3})
    for (std::size_t j = 0; j < 2 * n; ++j) d.push_back(expr::diff(*h, j));
  dh_ = geom::Tape(d, chart_);

  auto H1 = hamiltonian_field(h1, n), H2 = hamiltonian_field(h2, n);
  std::vector<ScalarExpr> hc(2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    ScalarExpr a = H1[k].is_zero() ? ScalarExpr() : h23 * H1[k];
    ScalarExpr b = H2[k].is_zero() ? ScalarExpr() : h13 * H2[k];
    hc[k] = a - b;
  }
  Hc_ = geom::CompiledField(VecField(chart_, hc));

  std::vector<ScalarExpr> f;
  for (const auto* X : {&D_.X1(), &D_.X2()})
    for (std::size_t k = 0; k < n; ++k) f.push_back((*X)[k]);
  frame_ = geom::Tape(f, chart_);
}

VectorXd Symplectification::hamiltonians(const VectorXd& lam) const {
  auto v = ham_.eval(as_span(lam));
  return Eigen::Map<VectorXd>(v.data(), static_cast<Index>(v.size()));
}

MatrixXd Symplectification::constraint_differential(const VectorXd& lam) const {
  auto v = dh_.eval(as_span(lam));
  const Index m = 2 * n();
  MatrixXd d(3, m);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < m; ++j) d(i, j) = v[static_cast<std::size_t>(i * m + j)];
  return d;
}

MatrixXd Symplectification::pullback_frame(const VectorXd& lam) const {
  const Index nn = n();
  auto v = frame_.eval(as_span(lam));
  MatrixXd A = MatrixXd::Zero(2 * nn, nn + 2);
  for (Index k = 0; k < nn; ++k) {
    A(k, 0) = v[static_cast<std::size_t>(k)];
    A(k, 1) = v[static_cast<std::size_t>(nn + k)];
  }
  A.bottomRightCorner(nn, nn) = MatrixXd::Identity(nn, nn);
  return A;
}

MatSeries Symplectification::constraint_differential(const std::vector<Series>& curve) const {
  return series_matrix(geom::eval_series(dh_, curve), 3, 2 * n());
}

MatSeries Symplectification::pullback_frame(const std::vector<Series>& curve) const {
  const Index nn = n();
  auto v = geom::eval_series(frame_, curve);
  const int K = curve.front().order();
  MatSeries A(K, 2 * nn, nn + 2);
  for (int k = 0; k <= K; ++k)
    for (Index i = 0; i < nn; ++i) {
      A[k](i, 0) = v[static_cast<std::size_t>(i)][k];
      A[k](i, 1) = v[static_cast<std::size_t>(nn + i)][k];
    }
  A[0].bottomRightCorner(nn, nn) = MatrixXd::Identity(nn, nn);
  return A;
}

VectorXd Symplectification::euler(const VectorXd& lam) {
  const Index n = lam.size() / 2;
  VectorXd e = VectorXd::Zero(lam.size());
  e.tail(n) = lam.tail(n);
  return e;
}

SubspaceFrame annihilator(const dist::Distribution2& D, const VectorXd& q, int level) {
  if (level < 1 || level > 3) throw InputError("symp.level", "annihilator level must be 1, 2 or 3");
  auto fields = dist::power_basis(D, level);
  MatrixXd M(D.n(), static_cast<Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) M.col(static_cast<Index>(i)) = fields[i].evaluate(q);
  SubspaceFrame k = SubspaceFrame::kernel_of(M.transpose());
  require_stable(k.record(), "symp.unstable_rank");
  return k;
}

SubspaceFrame tangent_space(const Symplectification& S, const VectorXd& lam) {
  SubspaceFrame T = SubspaceFrame::kernel_of(S.constraint_differential(lam));
  require_stable(T.record(), "symp.unstable_rank");
  if (T.record().rank != 3) throw InputError("symp.stratum", "constraint differentials are dependent at lambda");
  return T;
}

namespace {

void require_on_annihilator(const Symplectification& S, const VectorXd& lam) {
  VectorXd h = S.hamiltonians(lam);
  const Index n = S.n();
  double scale = lam.tail(n).norm() * std::max(1.0, S.pullback_frame(lam).norm());
  if (h.head(3).norm() > 1e-8 * scale) throw InputError("symp.stratum", "lambda does not annihilate D^2");
  if (h.tail(2).norm() <= 1e-9 * scale) throw InputError("symp.stratum", "lambda annihilates D^3");
}

}  // namespace

VectorXd characteristic_direction(const Symplectification& S, const CotangentPoint& pt) {
  VectorXd lam = pt.joined();
  require_on_annihilator(S, lam);
  SubspaceFrame T = tangent_space(S, lam);
  MatrixXd M = T.basis().transpose() * symplectic_matrix(S.n()) * T.basis();
  SubspaceFrame K = SubspaceFrame::kernel_of(M);
  require_stable(K.record(), "symp.unstable_rank");
  if (K.dim() != 1)
    throw InputError("symp.stratum", "kernel dimension != 1 (got " + std::to_string(K.dim()) + ")");
  VectorXd v = T.basis() * K.basis().col(0);
  v.normalize();
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  return v;
}

SubspaceFrame jacobi_subspace(const Symplectification& S, const VectorXd& lam) {
  require_on_annihilator(S, lam);
  MatrixXd A = S.pullback_frame(lam);
  SubspaceFrame K = SubspaceFrame::kernel_of(S.constraint_differential(lam) * A);
  require_stable(K.record(), "symp.unstable_rank");
  if (K.record().rank != 3) throw InputError("symp.stratum", "constraints restricted to pi^{-1}D are dependent");
  return SubspaceFrame::span_of(A * K.basis());
}

SubspaceFrame first_extension_closed_form(const Symplectification& S, const VectorXd& lam) {
  require_on_annihilator(S, lam);
  const Index n = S.n();
  MatrixXd A = MatrixXd::Zero(2 * n, n + 3);
  A.leftCols(2) = S.pullback_frame(lam).leftCols(2);
  A.block(0, 2, n, 1) = S.X3().evaluate(VectorXd(lam.head(n)));
  A.bottomRightCorner(n, n) = MatrixXd::Identity(n, n);
  SubspaceFrame K = SubspaceFrame::kernel_of(S.constraint_differential(lam) * A);
  require_stable(K.record(), "symp.unstable_rank");
  return SubspaceFrame::span_of(A * K.basis());
}

JacobiJet jacobi_series(const Symplectification& S, const VectorXd& lam, int order) {
  JacobiJet J;
  J.flow = S.characteristic().local(lam, order, true);
  MatSeries A = S.pullback_frame(J.flow.x);
  MatSeries C = S.constraint_differential(J.flow.x) * A;
  RankRecord rec;
  MatSeries W = kernel_series(C, rank_tolerance(), &rec);
  require_stable(rec, "symp.unstable_rank");
  J.V = inverse(J.flow.phi) * (A * W);
  return J;
}

namespace {

// Grows an orthonormal basis Q by the part of `block` outside span(Q).
RankRecord extend_basis(MatrixXd& Q, const MatrixXd& block, double rel_tol) {
  MatrixXd R = Q.cols() ? MatrixXd(block - Q * (Q.transpose() * block)) : block;
  double ref = block.norm();
  RankRecord rec = numerical_rank(R, rel_tol, ref > 0.0 ? ref : 1.0);
  if (rec.rank > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(R, Eigen::ComputeThinU);
    MatrixXd grown(Q.rows(), Q.cols() + rec.rank);
    grown << Q, svd.matrixU().leftCols(rec.rank);
    Eigen::HouseholderQR<MatrixXd> qr(grown);
    Q = qr.householderQ() * MatrixXd::Identity(grown.rows(), grown.cols());
  }
  return rec;
}

void check_laws(const ExtensionDims& e, int n) {
  auto fail = [&](const char* code, const std::string& what) {
    std::string s = what + "; dims =";
    for (int d : e.dims) s += " " + std::to_string(d);
    throw NumericalError(code, s);
  };
  if (e.dims.empty() || e.dims[0] != n - 1) fail("symp.jacobi_dim", "dim J(lambda) != n-1");
  for (std::size_t i = 1; i < e.dims.size(); ++i) {
    int inc = e.dims[i] - e.dims[i - 1];
    if (inc != 0 && inc != 1) fail("symp.increment", "extension increment outside {0,1}");
    if (e.dims[i] > 2 * n - 4) fail("symp.bound", "extension dimension above 2n-4");
  }
  if (e.dims.size() > 1 && e.dims[1] - e.dims[0] != 1) fail("symp.first_increment", "dim J^(1) - dim J != 1");
}

ExtensionDims dims_from_blocks(const std::vector<MatrixXd>& blocks, double rel_tol, int n) {
  ExtensionDims out;
  MatrixXd Q(blocks.front().rows(), 0);
  int dim = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    RankRecord rec = extend_basis(Q, blocks[i], rel_tol);
    if (i == 0) rec = numerical_rank(blocks[0], rel_tol);
    require_stable(rec, "symp.unstable_rank");
    dim = static_cast<int>(Q.cols());
    out.dims.push_back(dim);
    out.records.push_back(rec);
  }
  for (std::size_t i = 0; i + 1 < out.dims.size(); ++i)
    if (out.dims[i + 1] == out.dims[i]) {
      out.nu = static_cast<int>(i);
      break;
    }
  check_laws(out, n);
  return out;
}

}  // namespace

ExtensionDims extension_dims(const Symplectification& S, const VectorXd& lam, int imax) {
  if (imax < 0) throw InputError("symp.imax", "imax must be >= 0");
  jacobi_subspace(S, lam);  // stratum checks
  JacobiJet J = jacobi_series(S, lam, std::max(imax, 1));
  std::vector<MatrixXd> blocks;
  for (int i = 0; i <= imax; ++i) blocks.push_back(J.V[i]);
  return dims_from_blocks(blocks, rank_tolerance(), S.n());
}

std::vector<SubspaceFrame> extension_tower(const Symplectification& S, const VectorXd& lam, int imax) {
  if (imax < 0) throw InputError("symp.imax", "imax must be >= 0");
  jacobi_subspace(S, lam);
  JacobiJet J = jacobi_series(S, lam, std::max(imax, 1));
  std::vector<SubspaceFrame> out;
  MatrixXd Q(J.V.rows(), 0);
  for (int i = 0; i <= imax; ++i) {
    RankRecord rec = extend_basis(Q, J.V[i], rank_tolerance());
    if (i == 0) rec = numerical_rank(J.V[0]);
    require_stable(rec, "symp.unstable_rank");
    out.emplace_back(Q, rec);
  }
  return out;
}

ExtensionDims extension_dims_fd(const Symplectification& S, const VectorXd& lam, int imax, double h, double rel_tol) {
  if (imax < 0 || imax > 3) throw InputError("symp.imax", "finite-difference extension dims support imax <= 3");
  jacobi_subspace(S, lam);
  if (h <= 0.0) h = 1e-2 / std::max(1e-12, S.characteristic().eval(lam).norm());
  MatrixXd A0 = S.pullback_frame(lam);
  MatrixXd W0 = SubspaceFrame::kernel_of(S.constraint_differential(lam) * A0).basis();
  auto sample = [&](double tau) {
    geom::FlowResult fr = geom::flow(S.characteristic(), lam, tau);
    MatrixXd A = S.pullback_frame(fr.endpoint);
    MatrixXd C = S.constraint_differential(fr.endpoint) * A;
    MatrixXd P = MatrixXd::Identity(C.cols(), C.cols()) - C.completeOrthogonalDecomposition().pseudoInverse() * C;
    return MatrixXd(fr.differential.lu().solve(A * P * W0));
  };
  auto derivatives = [&](double step) {
    std::vector<MatrixXd> f;
    for (int j = -2; j <= 2; ++j) f.push_back(sample(j * step));
    std::vector<MatrixXd> d{f[2]};
    if (imax >= 1) d.push_back((f[3] - f[1]) / (2 * step));
    if (imax >= 2) d.push_back((f[3] - 2 * f[2] + f[1]) / (step * step));
    if (imax >= 3) d.push_back((f[4] - 2 * f[3] + 2 * f[1] - f[0]) / (2 * step * step * step));
    return d;
  };
  auto coarse = derivatives(h), fine = derivatives(h / 2);
  std::vector<MatrixXd> blocks;
  for (std::size_t i = 0; i < coarse.size(); ++i) blocks.push_back((4 * fine[i] - coarse[i]) / 3);
  return dims_from_blocks(blocks, rel_tol, S.n());
}

SampleSet sample_covectors(const Symplectification& S, const VectorXd& q, std::uint64_t seed, int draws) {
  const int n = S.n();
  if (draws < 1) throw InputError("symp.samples", "need at least one covector draw");
  SubspaceFrame d2 = dist::power_span(S.distribution(), q, 2);
  require_stable(d2.record(), "symp.unstable_rank");
  if (d2.dim() != 3) throw InputError("symp.stratum", "dim D^2(q) != 3");
  MatrixXd B = annihilator(S.distribution(), q, 2).basis();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SampleSet out;
  int best_nu = -1, in_d3 = 0;
  std::string last_error;
  for (int k = 0; k < draws; ++k) {
    VectorXd c(B.cols());
    for (Index i = 0; i < c.size(); ++i) c(i) = gauss(rng);
    CovectorSample s;
    s.lam = {q, B * c};
    try {
      ExtensionDims e = extension_dims(S, s.lam.joined(), n - 2);
      s.nu = e.nu;
      s.dims = e.dims;
    } catch (const InputError& err) {
      ++in_d3;
      last_error = err.what();
      continue;
    } catch (const NumericalError& err) {
      last_error = err.what();
      continue;
    }
    out.draws.push_back(s);
    if (s.nu > best_nu) {
      best_nu = s.nu;
      out.best = out.draws.size() - 1;
    }
  }
  if (out.draws.empty()) {
    if (in_d3 == draws) throw InputError("symp.degenerate", "every sampled covector failed the stratum test: " + last_error);
    throw NumericalError("symp.sampling", "no covector gave stable extension dimensions: " + last_error);
  }
  return out;
}

CotangentPoint sample_regular_covector(const Symplectification& S, const VectorXd& q, std::uint64_t seed, int draws) {
  SampleSet s = sample_covectors(S, q, seed, draws);
  return s.draws[s.best].lam;
}

ClassReport class_at(const Symplectification& S, const VectorXd& q, int samples, std::uint64_t seed) {
  ClassReport r;
  r.q = q;
  SampleSet set = sample_covectors(S, q, seed, samples);
  for (const auto& d : set.draws) r.samples.emplace_back(d.lam.p, d.nu);
  r.m = set.draws[set.best].nu;
  // records of the winning draw
  ExtensionDims e = extension_dims(S, set.draws[set.best].lam.joined(), S.n() - 2);
  r.records = e.records;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  r.regular = true;
  for (int probe = 0; probe < 5; ++probe) {
    VectorXd dq(q.size());
    for (Index i = 0; i < dq.size(); ++i) dq(i) = gauss(rng);
    VectorXd qn = q + 1e-3 * dq / dq.norm();
    int m = -1;
    try {
      SampleSet ns = sample_covectors(S, qn, seed + static_cast<std::uint64_t>(probe) + 1, samples);
      m = ns.draws[ns.best].nu;
    } catch (const Error&) {
    }
    r.neighbour_classes.push_back(m);
    if (m != r.m) r.regular = false;
  }
  return r;
}

}  // namespace maxclass::symp
