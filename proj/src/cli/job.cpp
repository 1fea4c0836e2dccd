#include "maxclass/job.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "maxclass/error.hpp"
#include "maxclass/frames.hpp"
#include "maxclass/projective.hpp"
#include "maxclass/symplectic.hpp"
#include "toml.hpp"

namespace maxclass::job {

using Eigen::VectorXd;

namespace {

[[noreturn]] void bad(const std::string& what) { throw InputError("cli.job", what); }

void only_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : t) {
    (void)v;
    if (!allowed.count(std::string(k.str()))) bad("unknown key '" + std::string(k.str()) + "' in " + where);
  }
}

template <class T>
T get_or(const toml::table& t, const char* key, T fallback) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = n->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = n->value<std::string>()) return *v;
  } else {
    if (auto v = n->value<std::int64_t>()) return static_cast<T>(*v);
  }
  bad(std::string("key '") + key + "' has the wrong type");
}

std::vector<std::string> strings(const toml::table& t, const char* key) {
  std::vector<std::string> out;
  const toml::array* a = t.get_as<toml::array>(key);
  if (!a) bad(std::string("'") + key + "' must be an array of strings");
  for (const auto& e : *a) {
    auto s = e.value<std::string>();
    if (!s) bad(std::string("'") + key + "' must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

VectorXd numbers(const toml::node& node, const std::string& where) {
  const toml::array* a = node.as_array();
  if (!a) bad(where + " must be an array of numbers");
  VectorXd v(static_cast<Eigen::Index>(a->size()));
  Eigen::Index i = 0;
  for (const auto& e : *a) {
    auto x = e.value<double>();
    if (!x) bad(where + " must be an array of numbers");
    v(i++) = *x;
  }
  return v;
}

Json record_json(const RankRecord& r) {
  return Json{{"rank", r.rank},
              {"sigma_max", r.sigma_max},
              {"smallest_retained", r.smallest_retained},
              {"largest_discarded", r.largest_discarded},
              {"tolerance", r.tolerance},
              {"unstable", r.unstable()}};
}

Json records_json(const std::vector<RankRecord>& rs) {
  Json a = Json::array();
  for (const auto& r : rs) a.push_back(record_json(r));
  return a;
}

Json vec_json(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::uint64_t require_seed(const JobSpec& job, const char* command) {
  if (!job.seed) throw InputError("cli.seed", std::string(command) + " samples covectors: give seed in the job or --seed");
  return *job.seed;
}

struct Setup {
  std::shared_ptr<symp::Symplectification> S;
  VectorXd q, lam;
};

// symplectification and a regular covector over the first base point
Setup first_covector(const JobSpec& job, const char* command) {
  Setup s;
  s.S = std::make_shared<symp::Symplectification>(job.distribution());
  std::uint64_t seed = require_seed(job, command);
  s.q = base_points(job, s.S->n()).front();
  s.lam = symp::sample_regular_covector(*s.S, s.q, seed, job.covector_draws).joined();
  return s;
}

std::pair<double, double> inner_window(const proj::GrassCurve& c) {
  auto [a, b] = c.window();
  return {0.9 * a, 0.9 * b};
}

}  // namespace

dist::Distribution2 JobSpec::distribution() const {
  if (ode) return dist::from_ode(*ode);
  return dist::from_fields(expr::Chart(chart), X1, X2, label);
}

JobSpec parse_job(const std::string& text, const std::string& origin) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line << ", column " << e.source().begin.column;
    throw InputError("cli.toml", msg.str());
  }
  only_keys(root, {"seed", "distribution", "sampling", "characteristic", "rho_profile", "projectivize", "verify"},
            "the job");
  JobSpec job;
  if (const toml::node* s = root.get("seed")) {
    auto v = s->value<std::int64_t>();
    if (!v || *v < 0) bad("seed must be a nonnegative integer");
    job.seed = static_cast<std::uint64_t>(*v);
  }

  const toml::table* d = root.get_as<toml::table>("distribution");
  if (!d) bad("missing [distribution]");
  only_keys(*d, {"ode", "chart", "X1", "X2", "label"}, "[distribution]");
  job.label = get_or<std::string>(*d, "label", "");
  const bool has_ode = d->contains("ode"), has_fields = d->contains("X1") || d->contains("X2") || d->contains("chart");
  if (has_ode == has_fields) bad("[distribution] needs exactly one of 'ode' or 'chart'/'X1'/'X2'");
  if (has_ode) {
    const toml::table* o = d->get_as<toml::table>("ode");
    if (!o) bad("'ode' must be a table {r, s, F}");
    only_keys(*o, {"r", "s", "F"}, "ode");
    dist::OdeModel m;
    m.r = get_or<int>(*o, "r", 1);
    m.s = get_or<int>(*o, "s", -1);
    m.F = get_or<std::string>(*o, "F", "");
    if (m.s < 0 || m.F.empty()) bad("ode needs s and F");
    job.ode = m;
  } else {
    job.chart = strings(*d, "chart");
    job.X1 = strings(*d, "X1");
    job.X2 = strings(*d, "X2");
  }

  if (const toml::table* s = root.get_as<toml::table>("sampling")) {
    only_keys(*s, {"points", "random_points", "radius", "covector_draws"}, "[sampling]");
    if (const toml::node* p = s->get("points")) {
      const toml::array* a = p->as_array();
      if (!a) bad("points must be an array of arrays");
      for (const auto& e : *a) job.points.push_back(numbers(e, "each point"));
    }
    job.random_points = get_or<int>(*s, "random_points", 0);
    job.radius = get_or<double>(*s, "radius", 1.0);
    job.covector_draws = get_or<int>(*s, "covector_draws", 25);
  }
  if (const toml::table* c = root.get_as<toml::table>("characteristic")) {
    only_keys(*c, {"time", "samples"}, "[characteristic]");
    job.char_time = get_or<double>(*c, "time", job.char_time);
    job.char_samples = get_or<int>(*c, "samples", job.char_samples);
  }
  if (const toml::table* c = root.get_as<toml::table>("rho_profile")) {
    only_keys(*c, {"samples"}, "[rho_profile]");
    job.profile_samples = get_or<int>(*c, "samples", job.profile_samples);
  }
  if (const toml::table* c = root.get_as<toml::table>("projectivize")) {
    only_keys(*c, {"samples", "checks"}, "[projectivize]");
    job.proj_samples = get_or<int>(*c, "samples", job.proj_samples);
    job.proj_checks = get_or<int>(*c, "checks", job.proj_checks);
  }
  if (const toml::table* c = root.get_as<toml::table>("verify")) {
    only_keys(*c, {"n"}, "[verify]");
    job.verify_n = get_or<int>(*c, "n", 0);
  }

  if (job.points.empty() && job.random_points <= 0) job.random_points = 1;
  if (job.covector_draws < 1 || job.char_samples < 2 || job.profile_samples < 2) bad("sample counts are too small");
  if (!(job.radius > 0.0)) bad("radius must be positive");
  return job;
}

JobSpec load_job(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cli.io", "cannot read job file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_job(ss.str(), path);
}

std::vector<VectorXd> base_points(const JobSpec& job, int n) {
  std::vector<VectorXd> pts = job.points;
  if (pts.empty()) pts = frames::random_points(n, require_seed(job, "random base points"), job.random_points, job.radius);
  for (const auto& p : pts)
    if (p.size() != n) throw InputError("cli.point", "base point of size " + std::to_string(p.size()) + " in dimension " + std::to_string(n));
  return pts;
}

// ---------------------------------------------------------------------------

Json growth(const JobSpec& job) {
  dist::Distribution2 D = job.distribution();
  Json pts = Json::array();
  for (const auto& q : base_points(job, D.n())) {
    dist::GrowthResult g = dist::growth_vector(D, q);
    pts.push_back({{"q", vec_json(q)}, {"growth", g.dims}, {"rank_records", records_json(g.records)}});
  }
  return {{"n", D.n()}, {"points", pts}};
}

Json class_report(const JobSpec& job) {
  symp::Symplectification S(job.distribution());
  std::uint64_t seed = require_seed(job, "class");
  Json pts = Json::array();
  int m = -1;
  for (const auto& q : base_points(job, S.n())) {
    symp::ClassReport r = symp::class_at(S, q, job.covector_draws, seed);
    Json samples = Json::array();
    for (const auto& [p, nu] : r.samples) samples.push_back({{"p", vec_json(p)}, {"nu", nu}});
    pts.push_back({{"q", vec_json(q)},
                   {"class", r.m},
                   {"regular", r.regular},
                   {"neighbour_classes", r.neighbour_classes},
                   {"samples", samples},
                   {"rank_records", records_json(r.records)}});
    m = std::max(m, r.m);
  }
  return {{"n", S.n()}, {"max_class", m}, {"points", pts}};
}

Json characteristic(const JobSpec& job) {
  Setup s = first_covector(job, "characteristic");
  const int n = s.S->n();
  Json samples = Json::array();
  double drift = 0.0;
  for (int i = 0; i < job.char_samples; ++i) {
    double t = job.char_time * i / (job.char_samples - 1);
    VectorXd x = i == 0 ? s.lam : geom::flow(s.S->characteristic(), s.lam, t).endpoint;
    // stays on (D^2)^perp: h1 = h2 = h3 = 0
    double h = s.S->hamiltonians(x).head(3).cwiseAbs().maxCoeff() / std::max(1.0, x.tail(n).norm());
    drift = std::max(drift, h);
    samples.push_back({{"t", t}, {"point", vec_json(x)}});
  }
  symp::ExtensionDims ext = symp::extension_dims(*s.S, s.lam, n - 3);
  return {{"n", n},
          {"q", vec_json(s.q)},
          {"lambda", vec_json(s.lam)},
          {"samples", samples},
          {"constraint_drift", drift},
          {"extension_dims", ext.dims},
          {"rank_records", records_json(ext.records)}};
}

Json rho_profile(const JobSpec& job, std::vector<std::pair<double, double>>* profile) {
  Setup s = first_covector(job, "rho-profile");
  auto curve = std::make_shared<proj::JacobiCurve>(s.S, s.lam);
  auto [a, b] = inner_window(*curve);
  std::vector<double> ts, rs;
  for (int i = 0; i < job.profile_samples; ++i) {
    double t = a + (b - a) * i / (job.profile_samples - 1);
    ts.push_back(t);
    rs.push_back(proj::rho(*curve, t).value);
    if (profile) profile->emplace_back(t, rs.back());
  }
  symp::ExtensionDims ext = symp::extension_dims(*s.S, s.lam, s.S->n() - 3);
  return {{"n", s.S->n()},
          {"k", curve->k()},
          {"lambda", vec_json(s.lam)},
          {"window", {a, b}},
          {"t", ts},
          {"rho", rs},
          {"rank_records", records_json(ext.records)}};
}

Json projectivize(const JobSpec& job, std::vector<std::pair<double, double>>* psi) {
  Setup s = first_covector(job, "projectivize");
  auto curve = std::make_shared<proj::JacobiCurve>(s.S, s.lam);
  auto [a, b] = inner_window(*curve);
  proj::Projectivization P = proj::projectivize(curve, a, b, job.proj_samples, job.proj_checks);
  std::vector<double> ts, vs;
  for (int i = 0; i < job.profile_samples; ++i) {
    double t = a + (b - a) * i / (job.profile_samples - 1);
    ts.push_back(t);
    vs.push_back(P.psi->value(t));
    if (psi) psi->emplace_back(t, vs.back());
  }
  symp::ExtensionDims ext = symp::extension_dims(*s.S, s.lam, s.S->n() - 3);
  return {{"n", s.S->n()},
          {"lambda", vec_json(s.lam)},
          {"window", {a, b}},
          {"t", ts},
          {"psi", vs},
          {"check_t", P.t},
          {"rho_before", P.rho_before},
          {"rho_after", P.rho_after},
          {"max_residual", P.max_residual},
          {"rank_records", records_json(ext.records)}};
}

Json verify_model(int n) {
  frames::ModelFrame f = frames::model_frame(n);
  const bool structure_ok = f.symmetry_residual < 1e-8 && f.algebra_dim == 2 * n - 1 && f.heisenberg_residual < 1e-8 &&
                            f.table.antisymmetry_residual() < 1e-8 && f.table.jacobi_residual() < 1e-8;
  return {{"n", n},
          {"labels", f.labels},
          {"table", f.table.lines()},
          {"symmetry_residual", f.symmetry_residual},
          {"algebra_dim", f.algebra_dim},
          {"heisenberg_residual", f.heisenberg_residual},
          {"fit_residual", f.table.fit_residual},
          {"antisymmetry_residual", f.table.antisymmetry_residual()},
          {"jacobi_residual", f.table.jacobi_residual()},
          {"mismatches", f.mismatches},
          {"structure_ok", structure_ok},
          {"passed", structure_ok && f.passed()}};
}

Json report(const JobSpec& job) {
  Json out = Json::object();
  Json errors = Json::array();
  auto section = [&](const char* name, auto&& fn) {
    try {
      out[name] = fn();
    } catch (const NumericalError& e) {
      out[name] = {{"error", {{"code", e.code()}, {"message", e.what()}}}};
      errors.push_back(e.code());
    }
  };
  section("growth", [&] { return growth(job); });
  section("class", [&] { return class_report(job); });
  section("characteristic", [&] { return characteristic(job); });
  section("rho_profile", [&] { return rho_profile(job); });
  section("projectivize", [&] { return projectivize(job); });
  if (job.verify_n > 0) section("verify_model", [&] { return verify_model(job.verify_n); });
  out["errors"] = errors;
  return out;
}

Json envelope(const std::string& command, Json body) {
  Json j = Json::object();
  j["version"] = kReportVersion;
  j["command"] = command;
  j["rank_tolerance"] = rank_tolerance();
  j["result"] = std::move(body);
  return j;
}

std::string to_csv(const std::vector<std::pair<double, double>>& rows) {
  std::string out = "t,value\n";
  char buf[80];
  for (const auto& [t, v] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, v);
    out += buf;
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace maxclass::job
