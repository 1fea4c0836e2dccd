#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "maxclass/expr.hpp"
#include "maxclass/linalg.hpp"
#include "maxclass/vecfield.hpp"

namespace maxclass::dist {

/// z^(r) = F(x, y, ..., y^(s), z, ..., z^(r-1)) on the chart
/// (x, p0..ps, q0..q(r-1)) of dimension r + s + 2.
struct OdeModel {
  int r = 1;
  int s = 0;
  std::string F;
};

/// Rank-2 distribution spanned by two vector fields.
class Distribution2 {
 public:
  Distribution2() = default;
  Distribution2(geom::VecField X1, geom::VecField X2, std::string label = {});

  const expr::Chart& chart() const noexcept { return X1_.chart(); }
  int n() const noexcept { return static_cast<int>(X1_.dim()); }
  const geom::VecField& X1() const noexcept { return X1_; }
  const geom::VecField& X2() const noexcept { return X2_; }
  const std::string& label() const noexcept { return label_; }

 private:
  geom::VecField X1_, X2_;
  std::string label_;
};

expr::Chart ode_chart(int r, int s);
Distribution2 from_ode(const OdeModel& model);
/// z' = (y^(n-3))^2, the maximally symmetric model.
Distribution2 maximal_model(int n);
Distribution2 from_fields(const expr::Chart& chart, const std::vector<std::string>& X1,
                          const std::vector<std::string>& X2, std::string label = {});

/// Covector coefficients of the n-2 contact forms of an ODE model:
/// dp_i - p_(i+1) dx, dq_j - q_(j+1) dx, dq_(r-1) - F dx.
std::vector<std::vector<expr::ScalarExpr>> ode_one_forms(const OdeModel& model, const Distribution2& D);

/// Fields spanning D^level pointwise (may over-span).
std::vector<geom::VecField> power_basis(const Distribution2& D, int level);

struct GrowthResult {
  std::vector<int> dims;
  std::vector<RankRecord> records;
};

/// (dim D^1(q), ..., ) up to `depth` (0 means n); stops once n is reached or
/// two consecutive entries agree.
GrowthResult growth_vector(const Distribution2& D, const Eigen::VectorXd& q, int depth = 0);

/// Evaluated span of D^level at q.
SubspaceFrame power_span(const Distribution2& D, const Eigen::VectorXd& q, int level);

}  // namespace maxclass::dist
