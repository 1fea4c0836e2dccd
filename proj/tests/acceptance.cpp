// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "maxclass/error.hpp"
#include "maxclass/frames.hpp"
#include "maxclass/job.hpp"
#include "maxclass/projective.hpp"

using namespace maxclass;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::shared_ptr<symp::Symplectification> model(int n) {
  return std::make_shared<symp::Symplectification>(dist::maximal_model(n));
}

std::shared_ptr<const proj::JacobiCurve> model_curve(int n, std::uint64_t seed = 3) {
  auto S = model(n);
  VectorXd q = frames::random_points(n, seed, 1).front();
  return std::make_shared<proj::JacobiCurve>(S, symp::sample_regular_covector(*S, q, 11).joined());
}

Outcome growth_vectors() {
  auto t0 = Clock::now();
  struct Case {
    const char* name;
    dist::Distribution2 D;
    std::vector<int> expect;
  };
  std::vector<Case> cases{
      {"Darboux", dist::from_fields(expr::Chart({"x", "y", "z"}), {"1", "0", "y"}, {"0", "1", "0"}), {2, 3}},
      {"Cartan", dist::maximal_model(5), {2, 3, 5}},
      {"n=6 model", dist::maximal_model(6), {2, 3, 5, 6}}};
  std::string bad;
  for (const auto& c : cases)
    for (const auto& q : frames::random_points(c.D.n(), 101, 10))
      if (dist::growth_vector(c.D, q).dims != c.expect) bad = c.name;
  double s = seconds_since(t0);
  if (!bad.empty()) return {false, "wrong growth vector for " + bad};
  return {s < 5.0, "Darboux (2,3), Cartan (2,3,5), n=6 (2,3,5,6) at 10 points each in " + fmt("%.2f s", s)};
}

Outcome classes() {
  auto t0 = Clock::now();
  std::ostringstream d;
  bool ok = true;
  for (int n : {5, 6, 7}) {
    symp::Symplectification S(dist::maximal_model(n));
    for (const auto& q : frames::random_points(n, 200 + static_cast<std::uint64_t>(n), 5))
      ok &= symp::class_at(S, q, 25, 17).m == n - 3;
  }
  symp::Symplectification low(dist::from_ode({2, 0, "p0"}));  // dim D^3 = 4
  for (const auto& q : frames::random_points(4, 7, 5)) ok &= symp::class_at(low, q, 25, 17).m == 1;
  double s = seconds_since(t0);
  d << "m = n-3 for n = 5,6,7 and m = 1 for z'' = y at 5 points each in " << fmt("%.2f s", s);
  return {ok && s < 60.0, ok ? d.str() : "class mismatch"};
}

Outcome extension_laws() {
  int checked = 0, regular = 0;
  for (int n : {5, 6, 7}) {
    symp::Symplectification S(dist::maximal_model(n));
    for (const auto& q : frames::random_points(n, 300 + static_cast<std::uint64_t>(n), 2)) {
      symp::SampleSet set = symp::sample_covectors(S, q, 23, 10);
      for (const auto& draw : set.draws) {
        VectorXd lam = draw.lam.joined();
        symp::ExtensionDims e = symp::extension_dims(S, lam, n - 2);
        const auto& d = e.dims;
        if (d[1] - d[0] != 1) return {false, "dim J^(1) - dim J^(0) != 1"};
        for (std::size_t i = 1; i < d.size(); ++i)
          if (d[i] - d[i - 1] < 0 || d[i] - d[i - 1] > 1) return {false, "increment outside {0,1}"};
        if (d.back() > 2 * n - 4) return {false, "dimension above 2n-4"};
        if (e.nu == n - 3) {
          ++regular;
          for (int i = 0; i <= n - 3; ++i)
            if (d[static_cast<std::size_t>(i)] != n - 1 + i) return {false, "dim J^(i) != n-1+i on the regular set"};
        }
        ++checked;
      }
      // finite differences at h and h/2 against the jets
      VectorXd lam = set.draws[set.best].lam.joined();
      double h = 1e-2 / S.characteristic().eval(lam).norm();
      auto jets = symp::extension_dims(S, lam, 2);
      auto fd = symp::extension_dims_fd(S, lam, 2, h), half = symp::extension_dims_fd(S, lam, 2, h / 2);
      if (fd.dims != jets.dims || half.dims != jets.dims) return {false, "step halving changed a dimension"};
    }
  }
  return {true, std::to_string(checked) + " covectors (" + std::to_string(regular) + " regular), step halving stable"};
}

Outcome zero_orders() {
  auto t0 = Clock::now();
  double k5 = proj::zero_order(*model_curve(5), 0.0).k, k6 = proj::zero_order(*model_curve(6), 0.0).k;
  double s = seconds_since(t0);
  bool ok = std::abs(k5 - 4.0) < 0.1 && std::abs(k6 - 9.0) < 0.1 && s < 30.0;
  return {ok, "k = " + fmt("%.5f", k5) + " (m=2), " + fmt("%.5f", k6) + " (m=3) in " + fmt("%.2f s", s)};
}

Outcome reparameterization() {
  auto C = model_curve(5);
  const double k = C->k();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_mobius = 0.0, worst_g = 0.0;
  for (int r = 0; r < 5; ++r) {
    double a = 0.3 * u(rng), b = 0.2 * u(rng), c = 0.1 * u(rng);
    std::string e = "t + " + num(a) + "*t^2 + " + num(b) + "*t^3 + " + num(c) + "*sin(3*t)";
    auto psi = std::make_shared<proj::SmoothMap>(proj::SmoothMap::parse(e));
    proj::ReparameterizedCurve R(C, psi);
    for (double t : {-0.3, 0.0, 0.25}) {
      geom::Series p = psi->series(t, 3);
      double lhs = proj::rho(*C, t).value;
      double rhs = proj::rho(R, p[0]).value * p[1] * p[1] + k / 3.0 * proj::schwarzian(p);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  for (int r = 0; r < 5; ++r) {
    proj::MobiusMap mb(1.0 + 0.3 * u(rng), 0.1 * u(rng), 0.4 * u(rng), 1.0);
    double t[4] = {-0.3 + 0.05 * u(rng), -0.05 + 0.05 * u(rng), 0.15 + 0.05 * u(rng), 0.35 + 0.05 * u(rng)};
    double s[4];
    for (int i = 0; i < 4; ++i) s[i] = mb(t[i]);
    double corr = std::log(proj::number_cross_ratio(s[0], s[1], s[2], s[3]) / proj::number_cross_ratio(t[0], t[1], t[2], t[3]));
    worst_mobius = std::max(worst_mobius, std::abs(corr));
    // with no correction G itself is unchanged
    proj::ReparameterizedCurve R(C, std::make_shared<proj::SmoothMap>(mb.as_map()));
    double g0 = proj::g_function(*C, t[0], t[1], t[2], t[3]), g1 = proj::g_function(R, s[0], s[1], s[2], s[3]);
    worst_g = std::max(worst_g, std::abs(g0 - g1));
  }
  bool ok = worst < 1e-5 && worst_mobius < 1e-8;
  return {ok, "law residual " + fmt("%.2e", worst) + ", Mobius log-correction " + fmt("%.2e", worst_mobius) +
                  " (G change " + fmt("%.2e", worst_g) + ")"};
}

Outcome schwarzians() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double mob = 0.0, cocycle = 0.0;
  for (int i = 0; i < 100; ++i) {
    proj::MobiusMap m(1.0 + 0.5 * u(rng), u(rng), 0.3 * u(rng), 1.0 + 0.2 * u(rng));
    double t = 0.5 * u(rng);
    mob = std::max(mob, std::abs(proj::schwarzian(m, t)));
    mob = std::max(mob, std::abs(proj::schwarzian(m.as_map(), t)));
  }
  for (int i = 0; i < 10; ++i) {
    auto f = proj::SmoothMap::parse("t + " + num(0.3 * u(rng)) + "*t^3 + " + num(0.2 * u(rng)) + "*t^2");
    auto g = proj::SmoothMap::parse("exp(" + num(0.5 + 0.3 * u(rng)) + "*t) - 1 + " + num(0.1 * u(rng)) + "*t^2");
    auto fg = f.compose(g);
    for (double t : {-0.4, 0.0, 0.3}) {
      double gp = g.series(t, 1)[1];
      double rhs = proj::schwarzian(f, g.value(t)) * gp * gp + proj::schwarzian(g, t);
      cocycle = std::max(cocycle, std::abs(proj::schwarzian(fg, t) - rhs));
    }
  }
  return {mob < 1e-12 && cocycle < 1e-8, "S(Mobius) " + fmt("%.1e", mob) + " at 100 points, cocycle " + fmt("%.1e", cocycle)};
}

Outcome projectivization() {
  auto C = model_curve(5);
  auto [a, b] = C->window();
  proj::Projectivization P = proj::projectivize(C, a, b);
  // a curve with rho != 0: the Cartan curve in a bent parameter
  auto psi = std::make_shared<proj::SmoothMap>(proj::SmoothMap::parse("t + t^2/2"));
  auto R = std::make_shared<proj::ReparameterizedCurve>(C, psi);
  auto [ra, rb] = R->window();
  proj::Projectivization Q = proj::projectivize(R, ra, rb);
  std::vector<double> samples;
  for (int i = 0; i <= 100; ++i) samples.push_back(proj::rho(*R, ra + (rb - ra) * i / 100.0).value);
  proj::ProjectiveParameter p1(samples, ra, rb, R->k(), ra + 0.3 * (rb - ra));
  proj::ProjectiveParameter p2(samples, ra, rb, R->k(), ra + 0.7 * (rb - ra));
  double transition = 0.0;
  for (int i = 1; i < 20; ++i) {
    double t = ra + (rb - ra) * i / 20.0;
    double d1 = p1.series(t, 1)[1];
    transition = std::max(transition, std::abs(proj::schwarzian(p2, t) - proj::schwarzian(p1, t)) / (d1 * d1));
  }
  bool ok = P.max_residual < 1e-5 && Q.max_residual < 1e-5 && transition < 1e-6;
  return {ok, "rho after: Cartan " + fmt("%.1e", P.max_residual) + ", bent Cartan " + fmt("%.1e", Q.max_residual) +
                  "; transition S " + fmt("%.1e", transition)};
}

Outcome frame_relations() {
  auto t0 = Clock::now();
  // (gl2) with the density of a non-flat (2,5) distribution
  auto S = std::make_shared<symp::Symplectification>(dist::from_ode({1, 2, "p2^2 + p2^3"}));
  std::shared_ptr<const symp::Symplectification> Sc = S;
  frames::SigmaFields F = frames::sigma_flow_fields(*S);
  double gl2 = 0.0;
  int i = 0;
  for (const auto& q : frames::random_points(5, 8, 10)) {
    VectorXd u(12);
    u << symp::sample_regular_covector(*S, q, 11).joined(), 0.5 + 0.1 * i, 0.2 - 0.05 * i;
    ++i;
    gl2 = std::max(gl2, frames::check_gl2(F, u, [&](const VectorXd& l) { return frames::jacobi_density(Sc, l); }).max());
  }
  bool ok = gl2 < 1e-8;
  std::string detail = "gl2 " + fmt("%.1e", gl2);
  for (int n : {5, 6, 7}) {
    frames::ModelFrame f = frames::model_frame(n);
    ok &= f.passed();
    detail += "; n=" + std::to_string(n) + " dim " + std::to_string(f.algebra_dim) + " sym " + fmt("%.0e", f.symmetry_residual);
    for (const auto& m : f.mismatches) detail += "; " + m;
  }
  double s = seconds_since(t0);
  return {ok && s < 120.0, detail + "; " + fmt("%.1f s", s)};
}

Outcome kappas() {
  std::string detail;
  bool ok = true;
  for (int n : {6, 7}) {
    frames::ModelFrame f = frames::model_frame(n);
    frames::Kappa k = frames::kappa_coefficients(f, f.fields[4], frames::random_points(n, 9, 20));
    double worst = std::max({std::abs(k.k1), std::abs(*k.k2), std::abs(*k.k3)});
    ok &= worst < 1e-6;
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + " max |kappa| " + fmt("%.1e", worst);
  }
  return {ok, detail};
}

Outcome determinism() {
  const char* text = R"(
seed = 7
[distribution]
ode = { r = 1, s = 2, F = "p2^2" }
[sampling]
random_points = 2
[rho_profile]
samples = 9
[projectivize]
samples = 41
checks = 5
[verify]
n = 5
)";
  auto run = [&] {
    job::JobSpec j = job::parse_job(text);
    std::vector<std::pair<double, double>> rows;
    job::rho_profile(j, &rows);
    return job::dump(job::envelope("report", job::report(j))) + job::to_csv(rows);
  };
  std::string a = run(), b = run();
  return {a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"growth vectors", growth_vectors},
      {"class", classes},
      {"extension dimension laws", extension_laws},
      {"order of zero", zero_orders},
      {"reparameterization law", reparameterization},
      {"Schwarzian", schwarzians},
      {"projectivization", projectivization},
      {"frame relations", frame_relations},
      {"kappa normalization", kappas},
      {"determinism", determinism}};
  int failed = 0, i = 0;
  for (const auto& [name, fn] : criteria) {
    ++i;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << i << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail << std::endl;
  }
  std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
