#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "maxclass/error.hpp"
#include "maxclass/frames.hpp"

using namespace maxclass;
using namespace maxclass::frames;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::shared_ptr<symp::Symplectification> model(int n) {
  return std::make_shared<symp::Symplectification>(dist::maximal_model(n));
}

std::vector<VectorXd> covectors(const symp::Symplectification& S, int count, std::uint64_t seed = 5) {
  std::vector<VectorXd> out;
  for (const auto& q : random_points(S.n(), seed, count)) out.push_back(symp::sample_regular_covector(S, q, 11).joined());
  return out;
}

bool has_line(const std::vector<std::string>& lines, const std::string& l) {
  return std::find(lines.begin(), lines.end(), l) != lines.end();
}

}  // namespace

TEST(SkewComplement, Dimensions) {
  auto S = model(5);
  VectorXd lam = covectors(*S, 1).front();
  EXPECT_EQ(skew_complement(*S, lam, 0).dim(), 4);
  EXPECT_EQ(skew_complement(*S, lam, 1).dim(), 3);
  EXPECT_THROW(skew_complement(*S, lam, 2), InputError);
}

TEST(SkewComplement, ZeroIsTheJacobiSubspace) {
  auto S = model(6);
  for (const auto& lam : covectors(*S, 3)) {
    SubspaceFrame J0 = skew_complement(*S, lam, 0);
    SubspaceFrame J = symp::extension_tower(*S, lam, 0).front();
    EXPECT_EQ(J0.dim(), J.dim());
    EXPECT_LT(J0.contains(J), 1e-9);
  }
}

TEST(SkewComplement, NestedAndHoldsCharacteristic) {
  for (int n : {5, 6, 7}) {
    auto S = model(n);
    VectorXd lam = covectors(*S, 1, 7).front();
    VectorXd H = symp::characteristic_direction(*S, symp::CotangentPoint::split(lam));
    for (int i = 0; i <= n - 4; ++i) {
      SubspaceFrame Ji = skew_complement(*S, lam, i);
      EXPECT_EQ(Ji.dim(), n - 1 - i);
      EXPECT_LT(Ji.residual(H), 1e-9);
      if (i > 0) {
        EXPECT_LT(skew_complement(*S, lam, i - 1).contains(Ji), 1e-9) << n << " " << i;
      }
      // reduced accounting: both contain the characteristic line
      EXPECT_EQ((Ji.dim() - 1) + (n - 1 + i - 1), 2 * (n - 2));
    }
  }
}

TEST(SkewComplement, IsSkewOrthogonalToTheTower) {
  auto S = model(6);
  VectorXd lam = covectors(*S, 1).front();
  MatrixXd J = symp::symplectic_matrix(6);
  for (int i = 0; i <= 2; ++i) {
    MatrixXd W = symp::extension_tower(*S, lam, i).back().basis();
    MatrixXd L = skew_complement(*S, lam, i).basis();
    EXPECT_LT((W.transpose() * J * L).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(VerticalSpace, TopIndexHoldsEuler) {
  auto S = model(5);
  for (const auto& lam : covectors(*S, 4)) {
    SubspaceFrame V = vertical_space(*S, lam, 1);
    EXPECT_EQ(V.dim(), 2);
    EXPECT_LT(V.residual(symp::Symplectification::euler(lam)), 1e-10);
  }
}

TEST(VerticalSpace, DimensionsAndVerticality) {
  auto S = model(7);
  VectorXd lam = covectors(*S, 1).front();
  // J_(0) = J projects onto all of D, so the vertical part loses two dimensions
  EXPECT_EQ(vertical_space(*S, lam, 0).dim(), 4);
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(vertical_space(*S, lam, i).dim(), 7 - 2 - i);
  for (int i = 0; i <= 3; ++i) EXPECT_LT(vertical_space(*S, lam, i).basis().topRows(7).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Epsilon, NormalizesAtRandomCovectors) {
  auto S = model(5);
  for (const auto& lam : covectors(*S, 20, 11)) {
    EpsilonResult r = epsilon_normalize(*S, lam, {1.0, 0.0});
    EXPECT_TRUE(std::isfinite(r.scale));
    EXPECT_NEAR(std::abs(r.pairing), 1.0, 1e-6);
    EXPECT_LT(vertical_space(*S, lam, 1).residual(r.epsilon), 1e-9);
    EXPECT_LT(std::abs(r.epsilon.dot(r.euler)), 1e-9 * r.epsilon.norm() * r.euler.norm());
    // the Euler direction is invisible to the pairing
    EXPECT_NEAR(r.euler_shift_pairing, r.pairing, 1e-8);
  }
}

TEST(Epsilon, RescaledGermRenormalizes) {
  auto S = model(5);
  VectorXd lam = covectors(*S, 1).front();
  EpsilonResult a = epsilon_normalize(*S, lam, {1.3, 0.4});
  EpsilonResult b = epsilon_normalize(*S, lam, {2.6, -0.7});
  EXPECT_NEAR(std::abs(b.pairing), 1.0, 1e-6);
  // the second jet does not enter; velocity c rescales by c^((2m-1)/2)
  EXPECT_NEAR(b.scale / a.scale, std::pow(2.0, 1.5), 1e-6);
}

TEST(Epsilon, HigherDimensions) {
  for (int n : {6, 7}) {
    auto S = model(n);
    VectorXd lam = covectors(*S, 1).front();
    EpsilonResult r = epsilon_normalize(*S, lam, {1.0, 0.2});
    EXPECT_NEAR(std::abs(r.pairing), 1.0, 1e-6);
  }
}

TEST(Epsilon, Errors) {
  auto S = model(5);
  VectorXd lam = covectors(*S, 1).front();
  EXPECT_THROW(epsilon_normalize(*S, lam, {0.0, 1.0}), InputError);
  auto S4 = std::make_shared<symp::Symplectification>(dist::from_ode({1, 1, "p1^2"}));
  EXPECT_THROW(epsilon_normalize(*S4, VectorXd::Ones(8), {1.0, 0.0}), InputError);
}

TEST(Gl2, ModelFlatDensity) {
  auto S = model(5);
  SigmaFields F = sigma_flow_fields(*S);
  EXPECT_EQ(F.chart.dim(), 12u);
  int i = 0;
  for (const auto& lam : covectors(*S, 10)) {
    VectorXd u(12);
    u << lam, 0.5 + 0.1 * i, -0.3 + 0.05 * i;
    ++i;
    Gl2Check r = check_gl2(F, u, [](const VectorXd&) { return 0.0; });
    EXPECT_LT(r.max(), 1e-8);
  }
}

TEST(Gl2, WithJacobiDensity) {
  // z' = y''^2 + y''^3 is not flat: rho does not vanish
  auto S = std::make_shared<symp::Symplectification>(dist::from_ode({1, 2, "p2^2 + p2^3"}));
  SigmaFields F = sigma_flow_fields(*S);
  std::shared_ptr<const symp::Symplectification> Sc = S;
  VectorXd lam = covectors(*S, 1, 3).front();
  EXPECT_GT(std::abs(jacobi_density(Sc, lam)), 1e-6);
  VectorXd u(12);
  u << lam, 0.8, 0.25;
  Gl2Check r = check_gl2(F, u, [&](const VectorXd& l) { return jacobi_density(Sc, l); });
  EXPECT_LT(r.max(), 1e-8);
}

TEST(Gl2, WrongDensityBreaksHomogeneity) {
  auto S = model(5);
  SigmaFields F = sigma_flow_fields(*S);
  VectorXd u(12);
  u << covectors(*S, 1).front(), 1.0, 0.0;
  // a density with e(rho) = 0 but rho != 0 cannot commute with g0
  Gl2Check r = check_gl2(F, u, [](const VectorXd&) { return 1.0; });
  EXPECT_GT(r.g0h, 1e-3);
}

TEST(StructureTable, ExpectedModelTable) {
  StructureTable t = expected_model_table(2);
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(t.antisymmetry_residual(), 0.0);
  auto lines = t.lines();
  EXPECT_TRUE(has_line(lines, "[g1,g2] = 2 g2"));
  EXPECT_TRUE(has_line(lines, "[h,g1] = 2 h"));
  EXPECT_TRUE(has_line(lines, "[e1,e4] = eta"));
  EXPECT_TRUE(has_line(lines, "[e2,e3] = -eta"));
  EXPECT_TRUE(has_line(lines, "[g1,eta] = 4 eta"));
}

TEST(ModelFrame, FiveDimensional) {
  ModelFrame f = model_frame(5);
  EXPECT_EQ(f.fields.size(), 9u);
  EXPECT_EQ(f.algebra_dim, 9);
  EXPECT_LT(f.symmetry_residual, 1e-8);
  EXPECT_LT(f.heisenberg_residual, 1e-8);
  EXPECT_LT(f.table.fit_residual, 1e-8);
  auto lines = f.table.lines();
  for (const char* l : {"[g1,g2] = 2 g2", "[h,g1] = 2 h", "[h,g2] = -g1", "[e1,e4] = eta", "[e2,e3] = -eta",
                        "[g1,e1] = 3 e1", "[g1,e4] = -3 e4", "[g2,e3] = 4 e2", "[g0,e2] = -e2", "[g0,eta] = -2 eta"})
    EXPECT_TRUE(has_line(lines, l)) << l;
}

TEST(ModelFrame, EtaBracketWithG1) {
  // Jacobi: [g1,eta] = [[g1,e1],e2m] + [e1,[g1,e2m]] = ((2m-1) - (2m-1)) eta = 0
  for (int n : {5, 6, 7}) {
    ModelFrame f = model_frame(n);
    ASSERT_EQ(f.mismatches.size(), 1u) << n;
    EXPECT_NE(f.mismatches.front().find("[g1,eta]"), std::string::npos);
    EXPECT_EQ(f.table.c[2].back().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ModelFrame, SixAndSeven) {
  for (int n : {6, 7}) {
    ModelFrame f = model_frame(n);
    const int m = n - 3;
    EXPECT_EQ(f.algebra_dim, 2 * n - 1);
    EXPECT_LT(f.symmetry_residual, 1e-8);
    EXPECT_LT(f.table.antisymmetry_residual(), 1e-8);
    EXPECT_LT(f.table.jacobi_residual(), 1e-8);
    EXPECT_LT(f.heisenberg_residual, 1e-8);
    auto lines = f.table.lines();
    for (int i = 1; i <= m; ++i) {
      std::string rhs = i % 2 ? "eta" : "-eta";
      EXPECT_TRUE(has_line(lines, "[e" + std::to_string(i) + ",e" + std::to_string(2 * m - i + 1) + "] = " + rhs));
    }
    // eta is central in the Heisenberg part
    for (int i = 4; i < 4 + 2 * m; ++i) EXPECT_EQ(f.table.c[static_cast<std::size_t>(i)].back().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ModelFrame, SeedIndependentTable) {
  ModelFrame a = model_frame(6, 1), b = model_frame(6, 42);
  EXPECT_EQ(a.table.lines(), b.table.lines());
}

TEST(Kappa, ModelVanishes) {
  for (int n : {5, 6, 7}) {
    ModelFrame f = model_frame(n);
    Kappa k = kappa_coefficients(f, f.fields[4], random_points(n, 9, 20));
    EXPECT_LT(std::abs(k.k1), 1e-6);
    if (n == 5) {
      EXPECT_FALSE(k.k2.has_value());
      EXPECT_FALSE(k.k3.has_value());
    } else {
      EXPECT_LT(std::abs(*k.k2), 1e-6);
      EXPECT_LT(std::abs(*k.k3), 1e-6);
    }
    EXPECT_LT(k.fit_residual, 1e-8);
  }
}

TEST(Kappa, PerturbationIsDetected) {
  for (int n : {5, 6, 7}) {
    ModelFrame f = model_frame(n);
    const int m = n - 3;
    geom::VecField eps = f.fields[4] + expr::ScalarExpr::constant(expr::Rational{1, 10}) * f.fields[2];
    Kappa k = kappa_coefficients(f, eps, random_points(n, 9, 20));
    // values read off the model table, g1 weights shift the diagonal
    EXPECT_NEAR(k.k1, 0.1 * (2 * m - 5), 1e-8);
    if (n > 5) {
      EXPECT_NEAR(*k.k2, 0.0, 1e-8);
      EXPECT_NEAR(*k.k3, 0.1 * (2 * m - 7), 1e-8);
    }
  }
}
