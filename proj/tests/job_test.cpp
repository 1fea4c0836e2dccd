#include <gtest/gtest.h>

#include <algorithm>

#include "maxclass/error.hpp"
#include "maxclass/job.hpp"

using namespace maxclass;
using namespace maxclass::job;

namespace {

const char* kCartan = R"(
seed = 7
[distribution]
ode = { r = 1, s = 2, F = "p2^2" }
[sampling]
random_points = 2
)";

const char* kContact = R"(
[distribution]
chart = ["x", "y", "z"]
X1 = ["1", "0", "y"]
X2 = ["0", "1", "0"]
[sampling]
points = [[0, 0, 0], [0.5, -1, 2]]
)";

void expect_code(const std::function<void()>& f, const std::string& code) {
  try {
    f();
    ADD_FAILURE() << "no error, expected " << code;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Job, ParsesOdeAndFields) {
  JobSpec a = parse_job(kCartan);
  ASSERT_TRUE(a.ode.has_value());
  EXPECT_EQ(a.ode->s, 2);
  EXPECT_EQ(*a.seed, 7u);
  EXPECT_EQ(a.random_points, 2);
  JobSpec b = parse_job(kContact);
  EXPECT_FALSE(b.ode.has_value());
  EXPECT_EQ(b.points.size(), 2u);
  EXPECT_EQ(b.distribution().n(), 3);
}

TEST(Job, RejectsBadInput) {
  expect_code([] { parse_job("seed = "); }, "cli.toml");
  expect_code([] { parse_job("seed = 1"); }, "cli.job");
  expect_code([] { parse_job("[distribution]\node = { s = 1, F = \"p1^2\" }\nX1 = [\"1\"]"); }, "cli.job");
  expect_code([] { parse_job("[distribution]\node = { s = 1, F = \"p1^2\" }\n[sampling]\nbogus = 1"); }, "cli.job");
  expect_code([] { parse_job("seed = -3\n[distribution]\node = { s = 1, F = \"p1^2\" }"); }, "cli.job");
  expect_code([] { load_job("/nonexistent/job.toml"); }, "cli.io");
}

TEST(Job, MalformedExpressionIsAnInputError) {
  JobSpec j = parse_job("[distribution]\node = { s = 2, F = \"p2^^2\" }\n[sampling]\npoints = [[0,0,0,0,0]]");
  EXPECT_THROW(growth(j), InputError);
}

TEST(Job, SeedAndPointChecks) {
  JobSpec j = parse_job(kCartan);
  j.seed.reset();
  expect_code([&] { class_report(j); }, "cli.seed");
  JobSpec k = parse_job(kContact);
  k.points.push_back(Eigen::VectorXd::Zero(4));
  expect_code([&] { growth(k); }, "cli.point");
}

TEST(Job, Growth) {
  Json g = growth(parse_job(kContact));
  ASSERT_EQ(g["points"].size(), 2u);
  for (const auto& p : g["points"]) {
    EXPECT_EQ(p["growth"], Json({2, 3}));
    EXPECT_FALSE(p["rank_records"].empty());
  }
}

TEST(Job, ClassOfCartan) {
  Json c = class_report(parse_job(kCartan));
  EXPECT_EQ(c["max_class"], 2);
  for (const auto& p : c["points"]) EXPECT_EQ(p["class"], 2);
}

TEST(Job, VerifyModel) {
  Json v = verify_model(5);
  auto table = v["table"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(table.begin(), table.end(), "[g1,g2] = 2 g2"), table.end());
  EXPECT_TRUE(v["structure_ok"].get<bool>());
  EXPECT_THROW(verify_model(4), InputError);
}

TEST(Job, EnvelopeAndDeterminism) {
  JobSpec j = parse_job(kCartan);
  std::string a = dump(envelope("class", class_report(j))), b = dump(envelope("class", class_report(j)));
  EXPECT_EQ(a, b);
  Json e = Json::parse(a);
  EXPECT_EQ(e["version"], kReportVersion);
  EXPECT_EQ(e["command"], "class");
  // keys sorted
  EXPECT_LT(a.find("\"command\""), a.find("\"rank_tolerance\""));
  EXPECT_LT(a.find("\"result\""), a.find("\"version\""));
}

TEST(Job, Csv) {
  EXPECT_EQ(to_csv({{0.1, -2.0}}), "t,value\n0.10000000000000001,-2\n");
}

TEST(Job, RhoProfileOnCartanIsFlat) {
  JobSpec j = parse_job(kCartan);
  j.profile_samples = 5;
  std::vector<std::pair<double, double>> rows;
  Json r = rho_profile(j, &rows);
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& [t, v] : rows) EXPECT_LT(std::abs(v), 1e-8) << t;
  EXPECT_EQ(r["k"], 4);
}
