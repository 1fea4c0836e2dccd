#include <gtest/gtest.h>

#include <random>

#include "maxclass/error.hpp"
#include "maxclass/symplectic.hpp"

using namespace maxclass;
using namespace maxclass::symp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_point(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = u(rng);
  return q;
}

struct Model {
  explicit Model(int n, std::uint64_t seed = 1)
      : S(dist::maximal_model(n)), q(random_point(n, seed)), lam(sample_regular_covector(S, q, seed)) {}
  Symplectification S;
  VectorXd q;
  CotangentPoint lam;
};

}  // namespace

TEST(Annihilator, Dimensions) {
  auto D5 = dist::maximal_model(5);
  VectorXd q = random_point(5, 2);
  EXPECT_EQ(annihilator(D5, q, 2).dim(), 2);
  EXPECT_EQ(annihilator(D5, q, 1).dim(), 3);
  auto D6 = dist::maximal_model(6);
  VectorXd q6 = random_point(6, 3);
  EXPECT_EQ(annihilator(D6, q6, 3).dim(), 1);
  MatrixXd B = annihilator(D6, q6, 1).basis();
  EXPECT_LT((B.transpose() * D6.X1().evaluate(q6)).norm(), 1e-12);
  EXPECT_THROW(annihilator(D6, q6, 4), InputError);
}

TEST(Covector, CartanSampleIsMaximal) {
  Model m(5);
  auto e = extension_dims(m.S, m.lam.joined(), 3);
  EXPECT_EQ(e.nu, 2);
  EXPECT_LT(m.S.hamiltonians(m.lam.joined()).head(3).norm(), 1e-12);
}

TEST(Covector, DeterministicGivenSeed) {
  Symplectification S(dist::maximal_model(6));
  VectorXd q = random_point(6, 9);
  auto a = sample_regular_covector(S, q, 77), b = sample_regular_covector(S, q, 77);
  EXPECT_EQ(a.p, b.p);
}

TEST(Covector, SmallestClassEverywhere) {
  Symplectification S(dist::from_ode({2, 0, "p0"}));
  VectorXd q = random_point(4, 4);
  auto set = sample_covectors(S, q, 5);
  EXPECT_EQ(set.draws.size(), 25u);
  for (const auto& d : set.draws) EXPECT_EQ(d.nu, 1);
}

TEST(Characteristic, KernelIsALine) {
  Model m(5);
  VectorXd v = characteristic_direction(m.S, m.lam);
  VectorXd lam = m.lam.joined();
  MatrixXd T = tangent_space(m.S, lam).basis();
  for (Eigen::Index j = 0; j < T.cols(); ++j) EXPECT_LT(std::abs(sigma(v, T.col(j))), 1e-10);
  // parallel to the characteristic Hamiltonian field
  VectorXd h = m.S.characteristic().eval(lam).normalized();
  EXPECT_NEAR(std::abs(h.dot(v)), 1.0, 1e-10);
}

TEST(Characteristic, FailsOffTheStratum) {
  Symplectification S(dist::maximal_model(6));
  VectorXd q = random_point(6, 5);
  VectorXd p = annihilator(S.distribution(), q, 3).basis().col(0);
  EXPECT_THROW(characteristic_direction(S, {q, p}), InputError);
}

TEST(Jacobi, SubspaceIsIsotropicAndHoldsEuler) {
  for (int n : {5, 6}) {
    Model m(n, 10 + static_cast<std::uint64_t>(n));
    VectorXd lam = m.lam.joined();
    SubspaceFrame J = jacobi_subspace(m.S, lam);
    EXPECT_EQ(J.dim(), n - 1);
    MatrixXd G = J.basis().transpose() * symplectic_matrix(n) * J.basis();
    EXPECT_LT(G.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(J.residual(Symplectification::euler(lam)), 1e-10);
    EXPECT_LT(J.residual(m.S.characteristic().eval(lam)), 1e-10);
  }
}

TEST(Extension, ModelDimensions) {
  Model m5(5), m6(6);
  EXPECT_EQ(extension_dims(m5.S, m5.lam.joined(), 3).dims, (std::vector<int>{4, 5, 6, 6}));
  EXPECT_EQ(extension_dims(m6.S, m6.lam.joined(), 4).dims, (std::vector<int>{5, 6, 7, 8, 8}));
}

TEST(Extension, FirstStepMatchesClosedForm) {
  for (int n : {5, 6, 7}) {
    Model m(n, 20 + static_cast<std::uint64_t>(n));
    VectorXd lam = m.lam.joined();
    JacobiJet J = jacobi_series(m.S, lam, 1);
    MatrixXd both(J.V[0].rows(), 2 * J.V[0].cols());
    both << J.V[0], J.V[1];
    SubspaceFrame J1 = SubspaceFrame::span_of(both);
    SubspaceFrame closed = first_extension_closed_form(m.S, lam);
    ASSERT_EQ(J1.dim(), n);
    ASSERT_EQ(closed.dim(), n);
    EXPECT_LT(closed.contains(J1), 1e-9);
    EXPECT_LT(J1.contains(closed), 1e-9);
  }
}

TEST(Extension, FiniteDifferencesAgreeAndAreStepStable) {
  Model m(6, 31);
  VectorXd lam = m.lam.joined();
  auto jets = extension_dims(m.S, lam, 2);
  double h = 1e-2 / m.S.characteristic().eval(lam).norm();
  auto fd = extension_dims_fd(m.S, lam, 2, h);
  auto fd_half = extension_dims_fd(m.S, lam, 2, h / 2);
  EXPECT_EQ(fd.dims, jets.dims);
  EXPECT_EQ(fd_half.dims, fd.dims);
}

TEST(Extension, HomothetyInvariance) {
  Model m(6, 40);
  int nu = extension_dims(m.S, m.lam.joined(), 4).nu;
  for (double c : {2.0, -1.0, 10.0}) {
    CotangentPoint scaled{m.lam.q, c * m.lam.p};
    EXPECT_EQ(extension_dims(m.S, scaled.joined(), 4).nu, nu) << "c = " << c;
  }
}

TEST(Class, Examples) {
  Symplectification S5(dist::maximal_model(5));
  auto r5 = class_at(S5, random_point(5, 50), 25, 1);
  EXPECT_EQ(r5.m, 2);
  EXPECT_TRUE(r5.regular);
  Symplectification S7(dist::maximal_model(7));
  EXPECT_EQ(class_at(S7, random_point(7, 51), 25, 2).m, 4);
  Symplectification S4(dist::from_ode({2, 0, "p0"}));
  EXPECT_EQ(class_at(S4, random_point(4, 52), 25, 3).m, 1);
}

TEST(Flow, StepHalvingOnCharacteristicField) {
  Model m(5, 60);
  VectorXd lam = m.lam.joined();
  geom::FlowResult a = geom::flow(m.S.characteristic(), lam, 0.5);
  geom::FlowOptions opt;
  opt.max_step = a.largest_step / 2;
  geom::FlowResult b = geom::flow(m.S.characteristic(), lam, 0.5, opt);
  EXPECT_LT((a.endpoint - b.endpoint).norm(), 1e-10);
}
