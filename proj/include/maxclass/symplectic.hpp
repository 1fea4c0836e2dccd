#pragma once

// Lift of a rank-2 distribution to T*M: the annihilator (D^2)^perp, its
// characteristic line field and the Jacobi curves living on it.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "maxclass/distribution.hpp"
#include "maxclass/flow.hpp"
#include "maxclass/linalg.hpp"
#include "maxclass/tape.hpp"

namespace maxclass::symp {

/// lambda = (q, p). Stored joined as (q, p) in the canonical T*M chart.
struct CotangentPoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;

  Eigen::VectorXd joined() const;
  static CotangentPoint split(const Eigen::VectorXd& lam);
};

/// Matrix of sigma = sum dp_i ^ dq_i in (q, p) order: sigma(v, w) = v^T J w.
Eigen::MatrixXd symplectic_matrix(Eigen::Index n);
double sigma(const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// Symbolic data on T*M for one distribution, compiled once.
class Symplectification {
 public:
  explicit Symplectification(dist::Distribution2 D);

  const dist::Distribution2& distribution() const noexcept { return D_; }
  int n() const noexcept { return D_.n(); }
  /// (q names..., xi_<name>...).
  const expr::Chart& chart() const noexcept { return chart_; }
  /// H_c = h23 H1 - h13 H2 with h_ij = p . [X_i, X_j], X3 = [X1, X2].
  const geom::VecField& characteristic_field() const noexcept { return Hc_.field(); }
  const geom::CompiledField& characteristic() const noexcept { return Hc_; }
  /// X3 = [X1, X2] on the base chart.
  const geom::VecField& X3() const noexcept { return X3_; }

  /// (h1, h2, h3, h13, h23) at lambda.
  Eigen::VectorXd hamiltonians(const Eigen::VectorXd& lam) const;
  /// Rows dh1, dh2, dh3 (3 x 2n).
  Eigen::MatrixXd constraint_differential(const Eigen::VectorXd& lam) const;
  /// [[X1 X2 0], [0 0 I]] (2n x (n+2)): its image is pi_*^{-1}(D).
  Eigen::MatrixXd pullback_frame(const Eigen::VectorXd& lam) const;
  MatSeries constraint_differential(const std::vector<geom::Series>& curve) const;
  MatSeries pullback_frame(const std::vector<geom::Series>& curve) const;

  static Eigen::VectorXd euler(const Eigen::VectorXd& lam);

 private:
  dist::Distribution2 D_;
  expr::Chart chart_;
  geom::VecField X3_;
  geom::CompiledField Hc_;
  geom::Tape ham_;   // h1 h2 h3 h13 h23
  geom::Tape dh_;    // 3 x 2n row-major
  geom::Tape frame_; // X1 then X2 components
};

/// Covectors annihilating D^level(q), as columns (level 1, 2 or 3).
SubspaceFrame annihilator(const dist::Distribution2& D, const Eigen::VectorXd& q, int level);

/// T_lambda (D^2)^perp as the kernel of the three constraint differentials.
SubspaceFrame tangent_space(const Symplectification& S, const Eigen::VectorXd& lam);

/// Unit spanning vector of ker(sigma restricted to T_lambda (D^2)^perp), first
/// nonzero component positive. Throws symp.stratum if the kernel is not a line.
Eigen::VectorXd characteristic_direction(const Symplectification& S, const CotangentPoint& lam);

/// J(lambda) = {v tangent to (D^2)^perp : pi_* v in D}.
SubspaceFrame jacobi_subspace(const Symplectification& S, const Eigen::VectorXd& lam);

/// Jacobi curve at lambda in the characteristic flow time tau:
/// V(tau) = Phi(tau)^{-1} J(gamma(tau)) as a (2n) x (n-1) series frame.
struct JacobiJet {
  MatSeries V;
  geom::LocalFlow flow;
};
JacobiJet jacobi_series(const Symplectification& S, const Eigen::VectorXd& lam, int order);

struct ExtensionDims {
  std::vector<int> dims;  // dim J^(0), ..., dim J^(imax)
  std::vector<RankRecord> records;
  int nu = 0;             // first i with dims[i+1] == dims[i]; 0 if not reached
};

/// Extension dimensions from the Taylor coefficients of the Jacobi curve.
/// Checks the dimension laws and throws NumericalError when one fails.
ExtensionDims extension_dims(const Symplectification& S, const Eigen::VectorXd& lam, int imax);

/// The subspaces J^(0) ... J^(imax) themselves (orthonormal bases).
std::vector<SubspaceFrame> extension_tower(const Symplectification& S, const Eigen::VectorXd& lam, int imax);

/// Same quantity from central differences of flowed samples (Richardson over
/// h and h/2). Only meaningful for small imax.
ExtensionDims extension_dims_fd(const Symplectification& S, const Eigen::VectorXd& lam, int imax, double h = 0.0,
                                double rel_tol = 1e-6);

/// J^(1) from its closed form {v tangent to (D^2)^perp : pi_* v in D^2}.
SubspaceFrame first_extension_closed_form(const Symplectification& S, const Eigen::VectorXd& lam);

/// p = B c with B a basis of (D^2)^perp(q); 25 draws, first one reaching
/// the largest nu is returned.
struct CovectorSample {
  CotangentPoint lam;
  int nu = 0;
  std::vector<int> dims;
};
struct SampleSet {
  std::vector<CovectorSample> draws;
  std::size_t best = 0;
};
SampleSet sample_covectors(const Symplectification& S, const Eigen::VectorXd& q, std::uint64_t seed, int draws = 25);
CotangentPoint sample_regular_covector(const Symplectification& S, const Eigen::VectorXd& q, std::uint64_t seed,
                                       int draws = 25);

struct ClassReport {
  Eigen::VectorXd q;
  std::vector<std::pair<Eigen::VectorXd, int>> samples;  // (p, nu)
  int m = 0;
  bool regular = false;
  std::vector<int> neighbour_classes;
  std::vector<RankRecord> records;
};
ClassReport class_at(const Symplectification& S, const Eigen::VectorXd& q, int samples, std::uint64_t seed);

}  // namespace maxclass::symp
