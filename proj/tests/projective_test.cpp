#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maxclass/error.hpp"
#include "maxclass/projective.hpp"

using namespace maxclass;
using namespace maxclass::proj;
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

std::shared_ptr<const JacobiCurve> model_curve(int n, std::uint64_t seed = 3) {
  auto S = std::make_shared<symp::Symplectification>(dist::maximal_model(n));
  auto lam = symp::sample_regular_covector(*S, random_point(n, seed), 11);
  return std::make_shared<JacobiCurve>(S, lam.joined());
}

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// S(t) = int_0^t w w^T with w = (1, t, t^2, ...): flat rank-one curve.
std::shared_ptr<PolynomialCurve> flat_rank_one(int m) {
  std::vector<MatrixXd> c(static_cast<std::size_t>(2 * m), MatrixXd::Zero(m, m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) c[static_cast<std::size_t>(a + b + 1)](a, b) = 1.0 / (a + b + 1);
  return std::make_shared<PolynomialCurve>(c, std::make_pair(-1.0, 1.0));
}

// Same with w = (1 + 0.2 t, t + 0.3 t^2): not flat.
std::shared_ptr<PolynomialCurve> bent_rank_one() {
  std::vector<MatrixXd> c(6, MatrixXd::Zero(2, 2));
  c[1] = mat({{1.0, 0.0}, {0.0, 0.0}});
  c[2] = mat({{0.2, 0.5}, {0.5, 0.0}});
  c[3] = mat({{0.04 / 3, 0.5 / 3}, {0.5 / 3, 1.0 / 3}});
  c[4] = mat({{0.0, 0.015}, {0.015, 0.15}});
  c[5] = mat({{0.0, 0.0}, {0.0, 0.018}});
  return std::make_shared<PolynomialCurve>(c, std::make_pair(-0.5, 0.5));
}

// C S C^T: the same curve in another splitting.
class Congruent : public GrassCurve {
 public:
  Congruent(std::shared_ptr<const GrassCurve> base, MatrixXd C) : base_(std::move(base)), C_(std::move(C)) {}
  int m() const override { return base_->m(); }
  MatrixXd sample(double t) const override { return C_ * base_->sample(t) * C_.transpose(); }
  std::optional<MatSeries> local_series(double t0, int order) const override {
    auto B = base_->local_series(t0, order);
    if (!B) return std::nullopt;
    MatSeries r(order, m(), m());
    for (int l = 0; l <= order; ++l) r[l] = C_ * (*B)[l] * C_.transpose();
    return r;
  }
  std::pair<double, double> window() const override { return base_->window(); }

 private:
  std::shared_ptr<const GrassCurve> base_;
  MatrixXd C_;
};

// Only samples, no series: forces the finite-stencil path.
class SampledOnly : public GrassCurve {
 public:
  explicit SampledOnly(std::shared_ptr<const GrassCurve> base) : base_(std::move(base)) {}
  int m() const override { return base_->m(); }
  MatrixXd sample(double t) const override { return base_->sample(t); }
  std::pair<double, double> window() const override { return base_->window(); }

 private:
  std::shared_ptr<const GrassCurve> base_;
};

double expect_code(const std::function<void()>& f, const std::string& code) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code);
    return 1.0;
  }
  ADD_FAILURE() << "expected " << code;
  return 0.0;
}

}  // namespace

TEST(CrossRatio, FrozenNumbers) {
  EXPECT_NEAR(number_cross_ratio(0, 1, 2, 3), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(number_cross_ratio(0.5, 1.5, -1, 2), 0.8, 1e-15);
}

TEST(CrossRatio, OneByOneMatchesNumber) {
  auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  double t1 = 0.3, t2 = -1.2, t3 = 2.5, t4 = 0.9;
  auto ev = cross_ratio(one(t1), one(t2), one(t3), one(t4));
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_NEAR(ev[0].real(), number_cross_ratio(t1, t2, t3, t4), 1e-14);
  EXPECT_NEAR(cross_ratio_det(one(t1), one(t2), one(t3), one(t4)), number_cross_ratio(t1, t2, t3, t4), 1e-14);
}

TEST(CrossRatio, InvariantUnderChangeOfSplitting) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto rnd = [&] {
    MatrixXd A(3, 3);
    for (int i = 0; i < 9; ++i) A.data()[i] = g(rng);
    return MatrixXd(A + A.transpose());
  };
  MatrixXd S1 = rnd(), S2 = rnd(), S3 = rnd(), S4 = rnd();
  MatrixXd C(3, 3);
  for (int i = 0; i < 9; ++i) C.data()[i] = g(rng);
  C += 3.0 * MatrixXd::Identity(3, 3);
  auto a = cross_ratio(S1, S2, S3, S4);
  auto b = cross_ratio(C * S1 * C.transpose(), C * S2 * C.transpose(), C * S3 * C.transpose(),
                       C * S4 * C.transpose());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-9 * (1.0 + std::abs(a[i])));
}

TEST(CrossRatio, SingularDifferenceThrows) {
  MatrixXd S = MatrixXd::Identity(2, 2);
  expect_code([&] { cross_ratio(S, S, 2 * S, 3 * S); }, "proj.singular_difference");
  expect_code([&] { cross_ratio_det(S, 2 * S, 3 * S, S); }, "proj.singular_difference");
}

TEST(Schwarzian, Examples) {
  EXPECT_NEAR(schwarzian(SmoothMap::identity(), 0.4), 0.0, 1e-15);
  MobiusMap mb(2.0, 1.0, 0.5, 3.0);
  for (double t : {-1.0, 0.0, 0.7}) {
    EXPECT_LT(std::abs(schwarzian(mb, t)), 1e-12);
    EXPECT_LT(std::abs(schwarzian(mb.as_map(), t)), 1e-12);
  }
  EXPECT_NEAR(schwarzian(SmoothMap::parse("exp(2*t)"), 0.3), -1.0, 1e-12);
  EXPECT_NEAR(schwarzian(SmoothMap::parse("sin(t)/cos(t)"), 0.3), 1.0, 1e-12);
}

TEST(Schwarzian, Cocycle) {
  auto f = SmoothMap::parse("t + t^3/5");
  auto g = SmoothMap::parse("exp(t/2) - 1");
  auto fg = f.compose(g);
  for (double t : {-0.5, 0.1, 0.8}) {
    double gp = g.series(t, 1)[1];
    double rhs = schwarzian(f, g.value(t)) * gp * gp + schwarzian(g, t);
    EXPECT_LT(std::abs(schwarzian(fg, t) - rhs), 1e-8);
  }
}

TEST(Schwarzian, MobiusRejectsDegenerate) { expect_code([] { MobiusMap(1, 2, 2, 4); }, "proj.mobius"); }

TEST(ZeroOrder, Examples) {
  std::vector<MatrixXd> line{MatrixXd::Identity(2, 2), mat({{2.0, 1.0}, {1.0, 3.0}})};
  PolynomialCurve affine(line, {-1.0, 1.0});
  EXPECT_NEAR(zero_order(affine, 0.2).k, 2.0, 1e-6);
  EXPECT_NEAR(zero_order(SampledOnly(std::make_shared<PolynomialCurve>(affine)), 0.2).k, 2.0, 1e-3);
  EXPECT_NEAR(zero_order(*flat_rank_one(3), 0.1).k, 9.0, 1e-2);
  EXPECT_NEAR(zero_order(*model_curve(5), 0.0).k, 4.0, 1e-2);
  EXPECT_NEAR(zero_order(*model_curve(6), 0.0).k, 9.0, 1e-2);
}

TEST(Rho, FlatCurvesVanish) {
  PolynomialCurve line({MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 2.0)}, {-1.0, 1.0});
  for (double t : {-0.5, 0.0, 0.6}) {
    EXPECT_LT(std::abs(rho(line, t).value), 1e-12);
    EXPECT_LT(std::abs(rho(SampledOnly(std::make_shared<PolynomialCurve>(line)), t).value), 1e-6);
  }
  for (int m : {2, 3})
    for (double t : {-0.3, 0.0, 0.4}) EXPECT_LT(std::abs(rho(*flat_rank_one(m), t).value), 1e-9) << m;
}

TEST(Rho, CartanModelIsFlat) {
  auto C = model_curve(5);
  auto [a, b] = C->window();
  for (double t : {a, 0.0, b}) {
    RhoResult r = rho(*C, t);
    EXPECT_TRUE(r.from_series);
    EXPECT_LT(std::abs(r.value), 1e-10);
  }
}

TEST(Rho, ScalarCurveIsOneThirdSchwarzian) {
  // S(t) = t + t^3 is the flat line in the parameter S
  PolynomialCurve c({MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1)},
                    {-1.0, 1.0});
  auto psi = SmoothMap::parse("t + t^3");
  for (double t : {-0.4, 0.0, 0.3}) {
    EXPECT_NEAR(rho(c, t).value, schwarzian(psi, t) / 3.0, 1e-10);
    EXPECT_NEAR(rho(SampledOnly(std::make_shared<PolynomialCurve>(c)), t).value, schwarzian(psi, t) / 3.0, 1e-5);
  }
}

TEST(Rho, InvariantUnderChangeOfSplitting) {
  auto base = bent_rank_one();
  MatrixXd C = mat({{1.5, -0.4}, {0.3, 0.8}});
  Congruent other(base, C);
  for (double t : {-0.2, 0.0, 0.25}) {
    double r0 = rho(*base, t).value, r1 = rho(other, t).value;
    EXPECT_GT(std::abs(r0), 1e-3);
    EXPECT_LT(std::abs(r0 - r1), 1e-8 * std::max(1.0, std::abs(r0)));
  }
}

TEST(Rho, JacobiCurveInvariantUnderCongruence) {
  auto C = model_curve(5);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + t^2/2"));
  auto bent = std::make_shared<ReparameterizedCurve>(C, psi);
  Congruent other(bent, mat({{2.0, 0.1}, {-0.7, 1.0}}));
  double r0 = rho(*bent, 0.1).value, r1 = rho(other, 0.1).value;
  EXPECT_GT(std::abs(r0), 1e-2);
  EXPECT_LT(std::abs(r0 - r1), 1e-8 * std::max(1.0, std::abs(r0)));
}

TEST(Rho, GTransformsByLogCrossRatio) {
  auto C = model_curve(5);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + t^2/2 + t^3/4"));
  ReparameterizedCurve R(C, psi);
  const int k = C->k();
  double t[4] = {-0.2, 0.05, 0.3, -0.1};
  double s[4];
  for (int i = 0; i < 4; ++i) s[i] = psi->value(t[i]);
  double lhs = g_function(*C, t[0], t[1], t[2], t[3]);
  double rhs = g_function(R, s[0], s[1], s[2], s[3]) +
               k * std::log(number_cross_ratio(s[0], s[1], s[2], s[3]) / number_cross_ratio(t[0], t[1], t[2], t[3]));
  EXPECT_LT(std::abs(lhs - rhs), 1e-8);

  // Mobius maps preserve the cross-ratio, so the correction vanishes
  MobiusMap mb(1.0, 0.2, 0.3, 1.0);
  double u[4];
  for (int i = 0; i < 4; ++i) u[i] = mb(t[i]);
  EXPECT_LT(std::abs(std::log(number_cross_ratio(u[0], u[1], u[2], u[3]) / number_cross_ratio(t[0], t[1], t[2], t[3]))),
            1e-12);
}

TEST(Rho, ReparameterizationLaw) {
  auto C = model_curve(5);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + 3*t^2/10 + exp(t)/10"));
  ReparameterizedCurve R(C, psi);
  const double k = C->k();
  for (double t : {-0.3, 0.0, 0.2, 0.4}) {
    double before = rho(*C, t).value;
    geom::Series p = psi->series(t, 3);
    double after = rho(R, p[0]).value;
    EXPECT_LT(std::abs(before - (after * p[1] * p[1] + k / 3.0 * schwarzian(p))), 1e-5) << t;
  }
}

TEST(Rho, ReparameterizationLawN6) {
  auto C = model_curve(6);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + t^2/2"));
  ReparameterizedCurve R(C, psi);
  const double k = C->k();
  for (double t : {-0.1, 0.0, 0.15}) {
    geom::Series p = psi->series(t, 3);
    double after = rho(R, p[0]).value;
    EXPECT_LT(std::abs(after * p[1] * p[1] + k / 3.0 * schwarzian(p)), 1e-5) << t;
  }
}

TEST(Projective, ZeroRhoGivesIdentity) {
  ProjectiveParameter p(std::vector<double>(41, 0.0), -1.0, 1.0, 4, 0.0);
  for (double t : {-0.9, -0.2, 0.0, 0.55, 1.0}) EXPECT_NEAR(p.value(t), t, 1e-12);
}

TEST(Projective, ConstantRho) {
  for (double c : {0.8, -1.5}) {
    const int k = 4;
    ProjectiveParameter p(std::vector<double>(61, c), -0.6, 0.6, k, 0.1);
    geom::Series s0 = p.series(0.1, 3);
    EXPECT_NEAR(s0[0], 0.0, 1e-14);
    EXPECT_NEAR(s0[1], 1.0, 1e-12);
    EXPECT_NEAR(s0[2], 0.0, 1e-12);
    for (double t : {-0.55, -0.1, 0.1, 0.33, 0.6}) EXPECT_NEAR(schwarzian(p, t), 3.0 * c / k, 1e-8) << c << " " << t;
    // closed form for c > 0: tan(w (t - t0)) / w, w^2 = 3c/k
    if (c > 0) {
      double w = std::sqrt(3.0 * c / k);
      EXPECT_NEAR(p.value(0.45), std::tan(w * 0.35) / w, 1e-10);
    }
  }
}

TEST(Projective, KillsRhoOnReparameterizedModel) {
  auto C = model_curve(5);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + t^2/2 + t^3/4"));
  auto R = std::make_shared<ReparameterizedCurve>(C, psi);
  auto [a, b] = R->window();
  Projectivization pz = projectivize(R, a, b);
  double before = 0.0;
  for (double v : pz.rho_before) before = std::max(before, std::abs(v));
  EXPECT_GT(before, 1e-2);
  EXPECT_LT(pz.max_residual, 1e-5);
}

TEST(Projective, TwoNormalizationsDifferByMobius) {
  auto C = model_curve(5);
  auto psi = std::make_shared<SmoothMap>(SmoothMap::parse("t + t^2/2"));
  auto R = std::make_shared<ReparameterizedCurve>(C, psi);
  auto [a, b] = R->window();
  std::vector<double> samples;
  for (int i = 0; i <= 100; ++i) samples.push_back(rho(*R, a + (b - a) * i / 100.0).value);
  ProjectiveParameter p1(samples, a, b, R->k(), a + 0.3 * (b - a));
  ProjectiveParameter p2(samples, a, b, R->k(), a + 0.7 * (b - a));
  // S(p2 o p1^{-1}) at p1(t) is (S p2 - S p1)(t) / p1'(t)^2
  for (double f : {0.1, 0.5, 0.9}) {
    double t = a + f * (b - a);
    double d1 = p1.series(t, 1)[1];
    EXPECT_LT(std::abs(schwarzian(p2, t) - schwarzian(p1, t)) / (d1 * d1), 1e-6);
  }
}

TEST(Projective, Errors) {
  expect_code([] { ProjectiveParameter(std::vector<double>(3, 0.0), 0.0, 1.0, 4, 0.5); }, "proj.samples");
  expect_code([] { ProjectiveParameter(std::vector<double>(11, 0.0), 1.0, 0.0, 4, 0.5); }, "proj.window");
  // u'' + 40 u = 0 on [-1, 1]: u2 = cos(sqrt(40) t) vanishes inside
  expect_code([] { ProjectiveParameter(std::vector<double>(101, 40.0 * 4 / 3), -1.0, 1.0, 4, 0.0); }, "proj.u2_zero");
  ProjectiveParameter p(std::vector<double>(11, 0.0), 0.0, 1.0, 4, 0.5);
  expect_code([&] { p.value(1.5); }, "proj.window");
}

TEST(JacobiCurve, SeriesMatchesSamples) {
  auto C = model_curve(5);
  double w = C->window().second;
  auto B = C->local_series(0.0, 16);
  ASSERT_TRUE(B.has_value());
  for (double f : {-0.5, 0.2, 0.6}) EXPECT_LT((B->eval(f * w) - C->sample(f * w)).norm(), 1e-12);
  auto B1 = C->local_series(0.3 * w, 16);
  EXPECT_LT((B1->eval(0.1 * w) - C->sample(0.4 * w)).norm(), 1e-12);
}

TEST(JacobiCurve, NeedsDimensionFour) {
  auto S = std::make_shared<symp::Symplectification>(
      dist::from_fields(expr::Chart({"x", "y", "z"}), {"1", "0", "y"}, {"0", "1", "0"}));
  VectorXd lam = VectorXd::Zero(6);
  lam(5) = 1.0;
  expect_code([&] { JacobiCurve(S, lam); }, "proj.dimension");
}
