#include "maxclass/linalg.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>

#include "maxclass/error.hpp"

namespace maxclass {

double rank_tolerance() {
  static const double tol = [] {
    if (const char* env = std::getenv("MAXCLASS_TOL")) {
      char* end = nullptr;
      double v = std::strtod(env, &end);
      if (end != env && v > 0.0 && v < 1.0) return v;
    }
    return 1e-9;
  }();
  return tol;
}

bool RankRecord::unstable(double band) const {
  if (sigma_max == 0.0) return false;
  double cut = sigma_max * tolerance;
  if (rank > 0 && smallest_retained < cut * band) return true;
  if (largest_discarded > cut / band) return true;
  return false;
}

RankRecord numerical_rank(const Eigen::MatrixXd& m, double rel_tol, double reference) {
  RankRecord r;
  r.tolerance = rel_tol;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  r.sigma_max = s.size() ? s(0) : 0.0;
  if (reference > 0.0) r.sigma_max = reference;
  double cut = r.sigma_max * rel_tol;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) {
      r.rank++;
      r.smallest_retained = s(i);
    } else {
      r.largest_discarded = std::max(r.largest_discarded, s(i));
    }
  }
  return r;
}

void require_stable(const RankRecord& r, const char* code, double band) {
  if (!r.unstable(band)) return;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "rank decision unstable: rank %d, sigma_max %.3e, smallest retained %.3e, largest discarded %.3e, "
                "tolerance %.1e",
                r.rank, r.sigma_max, r.smallest_retained, r.largest_discarded, r.tolerance);
  throw NumericalError(code, buf);
}

SubspaceFrame SubspaceFrame::span_of(const Eigen::MatrixXd& vectors, double rel_tol) {
  RankRecord rec;
  rec.tolerance = rel_tol;
  if (vectors.cols() == 0) return SubspaceFrame(Eigen::MatrixXd(vectors.rows(), 0), rec);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(vectors, Eigen::ComputeThinU);
  rec = numerical_rank(vectors, rel_tol);
  return SubspaceFrame(svd.matrixU().leftCols(rec.rank), rec);
}

SubspaceFrame SubspaceFrame::kernel_of(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) {
    RankRecord rec;
    rec.tolerance = rel_tol;
    return SubspaceFrame(Eigen::MatrixXd::Identity(n, n), rec);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  RankRecord rec = numerical_rank(m, rel_tol);
  return SubspaceFrame(svd.matrixV().rightCols(n - rec.rank), rec);
}

double SubspaceFrame::residual(const Eigen::VectorXd& v) const {
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  Eigen::VectorXd r = v - basis_ * (basis_.transpose() * v);
  return r.norm() / nv;
}

double SubspaceFrame::contains(const SubspaceFrame& other) const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < other.basis().cols(); ++j) worst = std::max(worst, residual(other.basis().col(j)));
  return worst;
}

// ---------------------------------------------------------------------------
// MatSeries

MatSeries::MatSeries(int order, Eigen::Index rows, Eigen::Index cols)
    : c_(static_cast<std::size_t>(order) + 1, Eigen::MatrixXd::Zero(rows, cols)) {}

MatSeries MatSeries::constant(const Eigen::MatrixXd& m, int order) {
  MatSeries s(order, m.rows(), m.cols());
  s[0] = m;
  return s;
}

Eigen::MatrixXd MatSeries::eval(double t) const {
  Eigen::MatrixXd r = c_.back();
  for (std::size_t k = c_.size() - 1; k-- > 0;) r = r * t + c_[k];
  return r;
}

MatSeries MatSeries::derivative() const {
  MatSeries d(order(), rows(), cols());
  for (int k = 1; k <= order(); ++k) d[k - 1] = k * c_[static_cast<std::size_t>(k)];
  return d;
}

MatSeries MatSeries::scaled(double s) const {
  MatSeries out = *this;
  double f = 1.0;
  for (auto& m : out.c_) {
    m *= f;
    f *= s;
  }
  return out;
}

MatSeries MatSeries::truncated(int order) const {
  std::vector<Eigen::MatrixXd> c(c_.begin(), c_.begin() + std::min<std::size_t>(c_.size(), order + 1));
  while (static_cast<int>(c.size()) < order + 1) c.push_back(Eigen::MatrixXd::Zero(rows(), cols()));
  return MatSeries(std::move(c));
}

MatSeries MatSeries::transpose() const {
  std::vector<Eigen::MatrixXd> c;
  c.reserve(c_.size());
  for (const auto& m : c_) c.push_back(m.transpose());
  return MatSeries(std::move(c));
}

MatSeries MatSeries::middle_cols(Eigen::Index first, Eigen::Index count) const {
  std::vector<Eigen::MatrixXd> c;
  c.reserve(c_.size());
  for (const auto& m : c_) c.push_back(m.middleCols(first, count));
  return MatSeries(std::move(c));
}

MatSeries operator*(const MatSeries& a, const MatSeries& b) {
  const int K = std::min(a.order(), b.order());
  MatSeries out(K, a.rows(), b.cols());
  for (int i = 0; i <= K; ++i) {
    if (a[i].isZero(0.0)) continue;
    for (int j = 0; i + j <= K; ++j) out[i + j].noalias() += a[i] * b[j];
  }
  return out;
}

MatSeries operator*(const Eigen::MatrixXd& a, const MatSeries& b) {
  std::vector<Eigen::MatrixXd> c;
  c.reserve(b.c_.size());
  for (const auto& m : b.c_) c.push_back(a * m);
  return MatSeries(std::move(c));
}

MatSeries operator*(const MatSeries& a, const Eigen::MatrixXd& b) {
  std::vector<Eigen::MatrixXd> c;
  c.reserve(a.c_.size());
  for (const auto& m : a.c_) c.push_back(m * b);
  return MatSeries(std::move(c));
}

MatSeries operator+(const MatSeries& a, const MatSeries& b) {
  MatSeries out = a.truncated(std::min(a.order(), b.order()));
  for (int k = 0; k <= out.order(); ++k) out[k] += b[k];
  return out;
}

MatSeries operator-(const MatSeries& a, const MatSeries& b) {
  MatSeries out = a.truncated(std::min(a.order(), b.order()));
  for (int k = 0; k <= out.order(); ++k) out[k] -= b[k];
  return out;
}

MatSeries& MatSeries::operator*=(double s) {
  for (auto& m : c_) m *= s;
  return *this;
}

MatSeries inverse(const MatSeries& m) {
  if (m.rows() != m.cols()) throw InternalError("linalg.inverse", "inverse of a non-square series");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m[0]);
  if (!lu.isInvertible()) throw NumericalError("linalg.singular", "constant term of series is singular");
  Eigen::MatrixXd inv0 = lu.inverse();
  const int K = m.order();
  MatSeries r(K, m.rows(), m.cols());
  r[0] = inv0;
  for (int k = 1; k <= K; ++k) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (int j = 1; j <= k; ++j) s.noalias() += m[j] * r[k - j];
    r[k] = -inv0 * s;
  }
  return r;
}

MatSeries kernel_series(const MatSeries& m, double rel_tol, RankRecord* record) {
  const Eigen::Index n = m.cols();
  SubspaceFrame ker0 = SubspaceFrame::kernel_of(m[0], rel_tol);
  if (record) *record = ker0.record();
  const int rank = ker0.record().rank;
  // Independent subset of rows of M(0), chosen by column-pivoted QR of M(0)^T.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m[0].transpose());
  std::vector<Eigen::Index> rows;
  for (int i = 0; i < rank; ++i) rows.push_back(qr.colsPermutation().indices()(i));
  std::sort(rows.begin(), rows.end());
  const int K = m.order();
  MatSeries mr(K, rank, n);
  for (int k = 0; k <= K; ++k)
    for (int i = 0; i < rank; ++i) mr[k].row(i) = m[k].row(rows[static_cast<std::size_t>(i)]);
  if (rank == 0) return MatSeries::constant(ker0.basis(), K);
  MatSeries mt = mr.transpose();
  MatSeries gram_inv = inverse(mr * mt);
  MatSeries proj = mt * (gram_inv * (mr * MatSeries::constant(ker0.basis(), K)));
  MatSeries out = MatSeries::constant(ker0.basis(), K) - proj;
  return out;
}

namespace {

void permutations(std::vector<int>& perm, std::size_t pos, int sign, const std::function<void(const std::vector<int>&, int)>& f);

}  // namespace

std::vector<double> det_series(const MatSeries& m) {
  const Eigen::Index n = m.rows();
  if (n != m.cols()) throw InternalError("linalg.det", "determinant of non-square series");
  const int K = m.order();
  std::vector<double> out(static_cast<std::size_t>(K) + 1, 0.0);
  if (n == 0) {
    out[0] = 1.0;
    return out;
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> acc, next;
  permutations(perm, 0, 1, [&](const std::vector<int>& p, int sign) {
    acc.assign(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 0; k <= K; ++k) acc[static_cast<std::size_t>(k)] = m[k](0, p[0]);
    for (Eigen::Index r = 1; r < n; ++r) {
      next.assign(static_cast<std::size_t>(K) + 1, 0.0);
      for (int i = 0; i <= K; ++i) {
        double a = acc[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        for (int j = 0; i + j <= K; ++j) next[static_cast<std::size_t>(i + j)] += a * m[j](r, p[static_cast<std::size_t>(r)]);
      }
      acc.swap(next);
    }
    for (int k = 0; k <= K; ++k) out[static_cast<std::size_t>(k)] += sign * acc[static_cast<std::size_t>(k)];
  });
  return out;
}

namespace {

void permutations(std::vector<int>& perm, std::size_t pos, int sign, const std::function<void(const std::vector<int>&, int)>& f) {
  if (pos == perm.size()) {
    f(perm, sign);
    return;
  }
  for (std::size_t i = pos; i < perm.size(); ++i) {
    std::swap(perm[pos], perm[i]);
    permutations(perm, pos + 1, i == pos ? sign : -sign, f);
    std::swap(perm[pos], perm[i]);
  }
}

}  // namespace

}  // namespace maxclass
