#pragma once

// Skew complements of the Jacobi tower, the epsilon normalization, the gl(2)
// fields on Sigma_D and the canonical frame of the maximally symmetric model.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxclass/linalg.hpp"
#include "maxclass/projective.hpp"
#include "maxclass/symplectic.hpp"
#include "maxclass/vecfield.hpp"

namespace maxclass::frames {

/// J_(i) = sigma-orthogonal of J^(i) inside T_lambda (D^2)^perp, dim n-1-i.
SubspaceFrame skew_complement(const symp::Symplectification& S, const Eigen::VectorXd& lam, int i);
/// V_i = vertical part of J_(i), dim n-2-i.
SubspaceFrame vertical_space(const symp::Symplectification& S, const Eigen::VectorXd& lam, int i);

/// Projective germ at lambda: phi = M o psi with psi the projective parameter
/// normalized at lambda (in the time of H_c) and M(s) = a s / (1 - b s / (2a)),
/// so phi'(0) = a and phi''(0) = b.
struct Germ {
  double a = 1.0;
  double b = 0.0;
};

struct EpsilonResult {
  Eigen::VectorXd epsilon;       // in V_{n-4}(lambda), orthogonal to e
  Eigen::VectorXd euler;         // e(lambda): epsilon is defined up to +-epsilon + mu e
  double raw_pairing = 0.0;      // pairing of the unit-length section before scaling
  double pairing = 0.0;          // recomputed with epsilon, |pairing| = 1
  double scale = 0.0;            // epsilon = scale * unit vector
  double euler_shift_pairing = 0.0;  // pairing of epsilon + e, same section otherwise
};

/// |sigma((ad H)^m E, (ad H)^(m-1) E)| = 1 with H = d/dt phi^{-1}(t) and E a
/// section of J_(n-4) through the returned vector.
EpsilonResult epsilon_normalize(const symp::Symplectification& S, const Eigen::VectorXd& lam, const Germ& germ);

/// Coordinates on Sigma_D: the T*M chart followed by (a, b).
struct SigmaFields {
  expr::Chart chart;
  geom::VecField g0, g1, g2;
  /// h = h_flat + (6/k) rho(lambda) d/db; rho is not symbolic in general.
  geom::VecField h_flat;
  int k = 0;
};
SigmaFields sigma_flow_fields(const symp::Symplectification& S);

struct Gl2Check {
  double g1g2 = 0.0, g1h = 0.0, g2h = 0.0, g0h = 0.0, g0g1 = 0.0, g0g2 = 0.0;
  double max() const;
};
/// Residuals of (gl2) at a point u = (lambda, a, b) of Sigma_D. rho is the
/// density along the characteristic through lambda; e(rho) is taken by a
/// central difference along the Euler field. Each residual is relative to
/// the norm (at least 1) of the field on the right-hand side, h for [g0,h].
using DensityFn = std::function<double(const Eigen::VectorXd& lam)>;
Gl2Check check_gl2(const SigmaFields& F, const Eigen::VectorXd& u, const DensityFn& rho);
/// rho at lambda from its Jacobi curve.
double jacobi_density(const std::shared_ptr<const symp::Symplectification>& S, const Eigen::VectorXd& lam);

/// Bracket coefficients c[i][j] with [F_i, F_j] = sum_k c[i][j](k) F_k.
struct StructureTable {
  std::vector<std::string> labels;
  std::vector<std::vector<Eigen::VectorXd>> c;
  double fit_residual = 0.0;  // misfit of [F_i,F_j] relative to |F_i| |F_j|

  std::size_t size() const { return labels.size(); }
  double antisymmetry_residual() const;
  double jacobi_residual() const;
  /// "[g1,g2] = 2 g2" style lines for the nonzero brackets, i < j.
  std::vector<std::string> lines(double tol = 1e-8) const;
};

/// Table of the model predicted by (gl2) and the commutation relations,
/// in the label order h, g0, g1, g2, e1..e2m, eta.
StructureTable expected_model_table(int m);

struct ModelFrame {
  int n = 0, m = 0;
  std::vector<std::string> labels;
  std::vector<geom::VecField> fields;
  StructureTable table;
  double symmetry_residual = 0.0;  // max over fields and points of dist([F, X_i], D)
  int algebra_dim = 0;
  double heisenberg_residual = 0.0;
  /// Entries where the computed table differs from expected_model_table(m).
  std::vector<std::string> mismatches;
  bool passed() const { return mismatches.empty() && symmetry_residual < 1e-8 && algebra_dim == 2 * n - 1; }
};

/// The symmetry algebra of z' = (y^(n-3))^2 realized on the base chart, with
/// the bracket table fitted at `points` random points.
ModelFrame model_frame(int n, std::uint64_t seed = 1, int points = 20);

/// Expands [F_a, F_b] in a list of fields by least squares over sample
/// points; coefficients are assumed constant (true inside one Lie algebra).
/// `residual` receives the absolute 2-norm of the misfit over all points.
Eigen::VectorXd expand_in_frame(const geom::VecField& B, const std::vector<geom::VecField>& frame,
                                const std::vector<Eigen::VectorXd>& points, double* residual = nullptr);

struct Kappa {
  double k1 = 0.0;
  std::optional<double> k2, k3;  // n > 5 only
  double fit_residual = 0.0;  // misfit relative to |eps_a| |eps_b|
};
/// eps_i = (ad h)^(i-1) eps1; [e1,e2] = k1 e2 mod L1, [e1,e4] = k2 e3 + k3 e4 mod L2.
Kappa kappa_coefficients(const ModelFrame& frame, const geom::VecField& eps1, const std::vector<Eigen::VectorXd>& points);

std::vector<Eigen::VectorXd> random_points(int n, std::uint64_t seed, int count, double radius = 1.0);

}  // namespace maxclass::frames
