#include "maxclass/distribution.hpp"

#include "maxclass/error.hpp"

namespace maxclass::dist {

using expr::ScalarExpr;
using geom::VecField;

Distribution2::Distribution2(VecField X1, VecField X2, std::string label)
    : X1_(std::move(X1)), X2_(std::move(X2)), label_(std::move(label)) {
  if (!(X1_.chart() == X2_.chart())) throw InputError("dist.chart_mismatch", "spanning fields live on different charts");
  if (X1_.dim() < 3) throw InputError("dist.dimension", "a rank-2 distribution needs n >= 3");
}

expr::Chart ode_chart(int r, int s) {
  if (r < 1 || s < 0) throw InputError("dist.model", "need r >= 1 and s >= 0");
  std::vector<std::string> names{"x"};
  for (int i = 0; i <= s; ++i) names.push_back("p" + std::to_string(i));
  for (int j = 0; j < r; ++j) names.push_back("q" + std::to_string(j));
  return expr::Chart(names);
}

namespace {

std::size_t p_index(int i) { return 1 + static_cast<std::size_t>(i); }
std::size_t q_index(int s, int j) { return 2 + static_cast<std::size_t>(s) + static_cast<std::size_t>(j); }

}  // namespace

Distribution2 from_ode(const OdeModel& model) {
  expr::Chart chart = ode_chart(model.r, model.s);
  if (chart.dim() < 3) throw InputError("dist.dimension", "model dimension below 3");
  ScalarExpr F = expr::parse(model.F, chart);
  const int r = model.r, s = model.s;
  std::vector<ScalarExpr> x1(chart.dim()), x2(chart.dim());
  x1[0] = ScalarExpr::constant(1);
  for (int i = 0; i < s; ++i) x1[p_index(i)] = ScalarExpr::variable(p_index(i + 1));
  for (int j = 0; j + 1 < r; ++j) x1[q_index(s, j)] = ScalarExpr::variable(q_index(s, j + 1));
  x1[q_index(s, r - 1)] = F;
  x2[p_index(s)] = ScalarExpr::constant(1);
  Distribution2 D(VecField(chart, x1), VecField(chart, x2),
                  "z^(" + std::to_string(r) + ") = " + expr::to_string(F, chart) + ", s = " + std::to_string(s));
  // the contact forms must annihilate both fields identically
  for (const auto& form : ode_one_forms(model, D)) {
    for (const VecField* X : {&D.X1(), &D.X2()}) {
      ScalarExpr pairing;
      for (std::size_t k = 1; k <= chart.dim(); ++k) {
        std::size_t i = k % chart.dim();  // dx term last so that F - F folds
        if (!form[i].is_zero() && !(*X)[i].is_zero()) pairing = pairing + form[i] * (*X)[i];
      }
      if (!pairing.is_zero()) throw InternalError("dist.contact", "contact form does not annihilate the distribution");
    }
  }
  return D;
}

Distribution2 maximal_model(int n) {
  if (n < 4) throw InputError("dist.dimension", "maximal model needs n >= 4");
  OdeModel m{1, n - 3, "p" + std::to_string(n - 3) + "^2"};
  return from_ode(m);
}

Distribution2 from_fields(const expr::Chart& chart, const std::vector<std::string>& X1,
                          const std::vector<std::string>& X2, std::string label) {
  return Distribution2(VecField::parse(chart, X1), VecField::parse(chart, X2), std::move(label));
}

std::vector<std::vector<ScalarExpr>> ode_one_forms(const OdeModel& model, const Distribution2& D) {
  const int r = model.r, s = model.s;
  const std::size_t n = D.chart().dim();
  std::vector<std::vector<ScalarExpr>> forms;
  auto form = [&](std::size_t target, const ScalarExpr& rhs) {
    std::vector<ScalarExpr> w(n);
    w[target] = ScalarExpr::constant(1);
    w[0] = -rhs;
    forms.push_back(w);
  };
  // reuse the exact subexpressions of X1 so that cancellation is structural
  const VecField& X1 = D.X1();
  for (int i = 0; i < s; ++i) form(p_index(i), X1[p_index(i)]);
  for (int j = 0; j < r; ++j) form(q_index(s, j), X1[q_index(s, j)]);
  return forms;
}

namespace {

bool same_up_to_sign(const VecField& a, const VecField& b) {
  return geom::structurally_equal(a, b) || geom::structurally_equal(a, -b);
}

}  // namespace

std::vector<VecField> power_basis(const Distribution2& D, int level) {
  if (level < 1) throw InputError("dist.level", "level must be >= 1");
  std::vector<VecField> all{D.X1(), D.X2()};
  std::vector<VecField> fresh = all;
  for (int l = 2; l <= level; ++l) {
    std::vector<VecField> next;
    for (const VecField* X : {&D.X1(), &D.X2()}) {
      for (const auto& Y : fresh) {
        VecField b = geom::lie_bracket(*X, Y);
        if (b.is_zero()) continue;
        bool dup = false;
        for (const auto& Z : all)
          if (same_up_to_sign(Z, b)) dup = true;
        for (const auto& Z : next)
          if (same_up_to_sign(Z, b)) dup = true;
        if (!dup) next.push_back(b);
      }
    }
    for (auto& f : next) all.push_back(f);
    fresh = std::move(next);
    if (fresh.empty()) break;
  }
  return all;
}

SubspaceFrame power_span(const Distribution2& D, const Eigen::VectorXd& q, int level) {
  auto fields = power_basis(D, level);
  Eigen::MatrixXd M(D.n(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = fields[i].evaluate(q);
  return SubspaceFrame::span_of(M);
}

GrowthResult growth_vector(const Distribution2& D, const Eigen::VectorXd& q, int depth) {
  if (q.size() != D.n()) throw InputError("dist.dimension", "base point has wrong dimension");
  if (depth <= 0) depth = D.n();
  GrowthResult out;
  std::vector<VecField> all{D.X1(), D.X2()};
  std::vector<VecField> fresh = all;
  Eigen::MatrixXd M(D.n(), 0);
  for (int level = 1; level <= depth; ++level) {
    if (level > 1) {
      std::vector<VecField> next;
      for (const VecField* X : {&D.X1(), &D.X2()}) {
        for (const auto& Y : fresh) {
          VecField b = geom::lie_bracket(*X, Y);
          if (b.is_zero()) continue;
          bool dup = false;
          for (const auto& Z : next)
            if (same_up_to_sign(Z, b)) dup = true;
          if (!dup) next.push_back(b);
        }
      }
      fresh = std::move(next);
    }
    Eigen::MatrixXd grown(D.n(), M.cols() + static_cast<Eigen::Index>(fresh.size()));
    grown.leftCols(M.cols()) = M;
    for (std::size_t i = 0; i < fresh.size(); ++i) grown.col(M.cols() + static_cast<Eigen::Index>(i)) = fresh[i].evaluate(q);
    M = std::move(grown);
    RankRecord rec = numerical_rank(M);
    require_stable(rec, "dist.unstable_rank");
    if (level == 1 && rec.rank != 2)
      throw InputError("dist.degenerate", "X1 and X2 are linearly dependent at the base point");
    out.dims.push_back(rec.rank);
    out.records.push_back(rec);
    if (rec.rank == D.n()) break;
    std::size_t k = out.dims.size();
    if (k >= 2 && out.dims[k - 1] == out.dims[k - 2]) break;
    if (fresh.empty()) break;
  }
  return out;
}

}  // namespace maxclass::dist
