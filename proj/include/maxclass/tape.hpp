#pragma once

// Compiled evaluation of a batch of expressions. Common subexpressions are
// merged (pointer identity first, then structure), so a vector field and its
// Jacobian share work. The same tape evaluates doubles, univariate series and
// multivariate jets.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "maxclass/error.hpp"
#include "maxclass/expr.hpp"
#include "maxclass/jet.hpp"

namespace maxclass::geom {

template <class T>
T ipow(const T& x, int e) {
  if (e < 0) {
    T one = lift_like(x, 1.0);
    return one / ipow(x, -e);
  }
  T result = lift_like(x, 1.0);
  T base = x;
  bool first = true;
  while (e > 0) {
    if (e & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = result * base;
      }
    }
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

class Tape {
 public:
  Tape() = default;
  Tape(const std::vector<expr::ScalarExpr>& outputs, const expr::Chart& chart);

  std::size_t num_inputs() const noexcept { return chart_.dim(); }
  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  std::size_t size() const noexcept { return code_.size(); }

  /// Evaluates all outputs. `proto` supplies the shape of constants.
  template <class T>
  std::vector<T> eval(std::span<const T> x, const T& proto) const;
  template <class T>
  std::vector<T> eval(const std::vector<T>& x, const T& proto) const {
    return eval<T>(std::span<const T>(x), proto);
  }
  std::vector<double> eval(std::span<const double> x) const { return eval<double>(x, 0.0); }

 private:
  enum class Code { Input, Const, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Ln };
  struct Instr {
    Code code;
    int a = -1, b = -1;
    int exponent = 0;
    std::size_t var = 0;
    double value = 0.0;
    expr::NodePtr node;  // for diagnostics
  };

  expr::Chart chart_;
  std::vector<Instr> code_;
  std::vector<int> outputs_;

  [[noreturn]] void domain_error(const Instr& in, const char* what) const;
  friend class TapeBuilder;
};

template <class T>
std::vector<T> Tape::eval(std::span<const T> x, const T& proto) const {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  if (x.size() != chart_.dim())
    throw InputError("geom.dimension", "tape expects " + std::to_string(chart_.dim()) + " inputs, got " +
                                           std::to_string(x.size()));
  std::vector<T> v;
  v.reserve(code_.size());
  for (const Instr& in : code_) {
    switch (in.code) {
      case Code::Input: v.push_back(x[in.var]); break;
      case Code::Const: v.push_back(lift_like(proto, in.value)); break;
      case Code::Neg: v.push_back(-v[in.a]); break;
      case Code::Add: v.push_back(v[in.a] + v[in.b]); break;
      case Code::Sub: v.push_back(v[in.a] - v[in.b]); break;
      case Code::Mul: v.push_back(v[in.a] * v[in.b]); break;
      case Code::Div:
        if (leading(v[in.b]) == 0.0) domain_error(in, "division by zero");
        v.push_back(v[in.a] / v[in.b]);
        break;
      case Code::Pow:
        if (in.exponent < 0 && leading(v[in.a]) == 0.0) domain_error(in, "division by zero");
        v.push_back(ipow(v[in.a], in.exponent));
        break;
      case Code::Sin: v.push_back(sin(v[in.a])); break;
      case Code::Cos: v.push_back(cos(v[in.a])); break;
      case Code::Exp: v.push_back(exp(v[in.a])); break;
      case Code::Ln:
        if (!(leading(v[in.a]) > 0.0)) domain_error(in, "logarithm of non-positive value");
        v.push_back(log(v[in.a]));
        break;
    }
  }
  std::vector<T> out;
  out.reserve(outputs_.size());
  for (int o : outputs_) out.push_back(v[o]);
  return out;
}

}  // namespace maxclass::geom
