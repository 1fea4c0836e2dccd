#pragma once

// Rank decisions, subspaces and matrix-valued power series.

#include <Eigen/Dense>
#include <vector>

namespace maxclass {

/// Relative rank tolerance: MAXCLASS_TOL if set, else 1e-9.
double rank_tolerance();

/// Outcome of one rank decision. Singular values below sigma_max * tolerance
/// count as zero; the neighbours of the cut are kept for diagnosis.
struct RankRecord {
  int rank = 0;
  double sigma_max = 0.0;
  double smallest_retained = 0.0;  // 0 when rank == 0
  double largest_discarded = 0.0;  // 0 when nothing was discarded
  double tolerance = 0.0;          // relative
  /// True when a singular value sits within `band` of the cut on either side.
  bool unstable(double band = 1e3) const;
};

/// A positive `reference` replaces the largest singular value as the scale
/// of the cut (used when m is a residual of something larger).
RankRecord numerical_rank(const Eigen::MatrixXd& m, double rel_tol = rank_tolerance(), double reference = 0.0);

/// Throws NumericalError("<code>") with the singular values if `r` is unstable.
void require_stable(const RankRecord& r, const char* code, double band = 1e3);

/// Orthonormal basis of the column span, plus the decision that produced it.
class SubspaceFrame {
 public:
  SubspaceFrame() = default;
  SubspaceFrame(Eigen::MatrixXd basis, RankRecord record) : basis_(std::move(basis)), record_(record) {}

  static SubspaceFrame span_of(const Eigen::MatrixXd& vectors, double rel_tol = rank_tolerance());
  /// Kernel of `m` (vectors x with m x = 0).
  static SubspaceFrame kernel_of(const Eigen::MatrixXd& m, double rel_tol = rank_tolerance());

  Eigen::Index ambient() const noexcept { return basis_.rows(); }
  int dim() const noexcept { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const RankRecord& record() const noexcept { return record_; }

  /// Norm of the component of v orthogonal to the subspace, relative to |v|.
  double residual(const Eigen::VectorXd& v) const;
  /// Largest relative residual over the columns of `other`.
  double contains(const SubspaceFrame& other) const;

 private:
  Eigen::MatrixXd basis_;
  RankRecord record_;
};

/// Truncated power series with matrix coefficients, M(t) = sum_k c[k] t^k.
class MatSeries {
 public:
  MatSeries() = default;
  MatSeries(int order, Eigen::Index rows, Eigen::Index cols);
  explicit MatSeries(std::vector<Eigen::MatrixXd> c) : c_(std::move(c)) {}
  static MatSeries constant(const Eigen::MatrixXd& m, int order);

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  Eigen::Index rows() const { return c_.front().rows(); }
  Eigen::Index cols() const { return c_.front().cols(); }
  const Eigen::MatrixXd& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  Eigen::MatrixXd& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  const std::vector<Eigen::MatrixXd>& coeffs() const noexcept { return c_; }

  Eigen::MatrixXd eval(double t) const;
  MatSeries derivative() const;
  /// M(s t).
  MatSeries scaled(double s) const;
  MatSeries truncated(int order) const;
  MatSeries transpose() const;
  /// Columns [first, first + count).
  MatSeries middle_cols(Eigen::Index first, Eigen::Index count) const;

  friend MatSeries operator*(const MatSeries& a, const MatSeries& b);
  friend MatSeries operator*(const Eigen::MatrixXd& a, const MatSeries& b);
  friend MatSeries operator*(const MatSeries& a, const Eigen::MatrixXd& b);
  friend MatSeries operator+(const MatSeries& a, const MatSeries& b);
  friend MatSeries operator-(const MatSeries& a, const MatSeries& b);
  MatSeries& operator*=(double s);

 private:
  std::vector<Eigen::MatrixXd> c_;
};

/// Inverse series; the constant term must be invertible.
MatSeries inverse(const MatSeries& m);

/// Smooth basis of ker M(t) near t = 0, assuming constant rank nearby.
/// Rows of M(0) are first reduced to an independent subset; the result is
/// the projector onto the kernel applied to a basis of ker M(0).
MatSeries kernel_series(const MatSeries& m, double rel_tol = rank_tolerance(), RankRecord* record = nullptr);

/// Determinant of a square series matrix as a scalar series (Leibniz).
std::vector<double> det_series(const MatSeries& m);

}  // namespace maxclass
