#include "maxclass/expr.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

#include "maxclass/error.hpp"

namespace maxclass::expr {

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InputError("expr.chart", "empty coordinate name");
    if (!seen.insert(n).second) throw InputError("expr.chart", "duplicate coordinate name '" + n + "'");
  }
}

std::optional<std::size_t> Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t Chart::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw InputError("expr.undeclared", "undeclared variable '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Rationals

std::optional<Rational> Rational::make(std::int64_t n, std::int64_t d) {
  if (d == 0) return std::nullopt;
  if (d < 0) {
    if (n == INT64_MIN || d == INT64_MIN) return std::nullopt;
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational{n, d};
}

std::optional<Rational> add(Rational a, Rational b) {
  std::int64_t x, y, d;
  if (__builtin_mul_overflow(a.num, b.den, &x) || __builtin_mul_overflow(b.num, a.den, &y) ||
      __builtin_mul_overflow(a.den, b.den, &d) || __builtin_add_overflow(x, y, &x))
    return std::nullopt;
  return Rational::make(x, d);
}

std::optional<Rational> mul(Rational a, Rational b) {
  std::int64_t n, d;
  if (__builtin_mul_overflow(a.num, b.num, &n) || __builtin_mul_overflow(a.den, b.den, &d))
    return std::nullopt;
  return Rational::make(n, d);
}

std::optional<Rational> div(Rational a, Rational b) {
  auto inv = Rational::make(b.den, b.num);
  if (!inv) return std::nullopt;
  return mul(a, *inv);
}

std::optional<Rational> pow(Rational a, int e) {
  if (e < 0) {
    if (a.num == 0) return std::nullopt;
    auto inv = Rational::make(a.den, a.num);
    if (!inv) return std::nullopt;
    a = *inv;
    e = -e;
  }
  Rational r{1, 1};
  for (int i = 0; i < e; ++i) {
    auto next = mul(r, a);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Construction

namespace {

NodePtr make_const(Rational q) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->exact = true;
  n->q = q;
  return n;
}

NodePtr make_float(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->exact = false;
  n->f = v;
  return n;
}

NodePtr make_unary(Op op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = make_const(Rational{0, 1});
  return z;
}

const NodePtr& one_node() {
  static const NodePtr o = make_const(Rational{1, 1});
  return o;
}

double value_of(const Node& n) { return n.exact ? n.q.to_double() : n.f; }

bool is_const(const ScalarExpr& e) { return e.op() == Op::Const; }

// Folds a binary operation on two constants; exact when both operands are.
std::optional<ScalarExpr> fold(Op op, const ScalarExpr& a, const ScalarExpr& b) {
  if (!is_const(a) || !is_const(b)) return std::nullopt;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.exact && y.exact) {
    std::optional<Rational> r;
    switch (op) {
      case Op::Add: r = add(x.q, y.q); break;
      case Op::Sub: r = add(x.q, Rational{-y.q.num, y.q.den}); break;
      case Op::Mul: r = mul(x.q, y.q); break;
      case Op::Div:
        if (y.q.is_zero()) return std::nullopt;
        r = div(x.q, y.q);
        break;
      default: return std::nullopt;
    }
    if (r) return ScalarExpr::constant(*r);
  }
  double u = value_of(x), v = value_of(y);
  switch (op) {
    case Op::Add: return ScalarExpr::constant_float(u + v);
    case Op::Sub: return ScalarExpr::constant_float(u - v);
    case Op::Mul: return ScalarExpr::constant_float(u * v);
    case Op::Div:
      if (v == 0.0) return std::nullopt;
      return ScalarExpr::constant_float(u / v);
    default: return std::nullopt;
  }
}

bool is_minus_one(const ScalarExpr& e) {
  if (!is_const(e)) return false;
  const Node& n = e.node();
  return n.exact ? (n.q.num == -1 && n.q.den == 1) : n.f == -1.0;
}

}  // namespace

ScalarExpr::ScalarExpr() : node_(zero_node()) {}

ScalarExpr ScalarExpr::constant(Rational q) {
  if (q.is_zero()) return ScalarExpr(zero_node());
  if (q.is_one()) return ScalarExpr(one_node());
  return ScalarExpr(make_const(q));
}

ScalarExpr ScalarExpr::constant_float(double v) { return ScalarExpr(make_float(v)); }

ScalarExpr ScalarExpr::variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = index;
  return ScalarExpr(n);
}

bool ScalarExpr::is_zero() const noexcept {
  return node_->op == Op::Const && (node_->exact ? node_->q.is_zero() : node_->f == 0.0);
}

bool ScalarExpr::is_one() const noexcept {
  return node_->op == Op::Const && (node_->exact ? node_->q.is_one() : node_->f == 1.0);
}

double ScalarExpr::constant_value() const {
  if (node_->op != Op::Const) throw InternalError("expr.not_constant", "constant_value on non-constant");
  return value_of(*node_);
}

ScalarExpr operator-(const ScalarExpr& a) {
  if (is_const(a)) {
    const Node& n = a.node();
    if (n.exact) {
      if (n.q.num != INT64_MIN) return ScalarExpr::constant(Rational{-n.q.num, n.q.den});
    } else {
      return ScalarExpr::constant_float(-n.f);
    }
  }
  if (a.op() == Op::Neg) return ScalarExpr(a.node().a);
  if (a.op() == Op::Sub) return ScalarExpr(make_binary(Op::Sub, a.node().b, a.node().a));
  return ScalarExpr(make_unary(Op::Neg, a.ptr()));
}

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Op::Add, a, b)) return *f;
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.op() == Op::Neg) return a - ScalarExpr(b.node().a);
  return ScalarExpr(make_binary(Op::Add, a.ptr(), b.ptr()));
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Op::Sub, a, b)) return *f;
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.ptr() == b.ptr()) return ScalarExpr();
  if (b.op() == Op::Neg) return a + ScalarExpr(b.node().a);
  return ScalarExpr(make_binary(Op::Sub, a.ptr(), b.ptr()));
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Op::Mul, a, b)) return *f;
  if (a.is_zero() || b.is_zero()) return ScalarExpr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (is_minus_one(a)) return -b;
  if (is_minus_one(b)) return -a;
  return ScalarExpr(make_binary(Op::Mul, a.ptr(), b.ptr()));
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Op::Div, a, b)) return *f;
  if (b.is_one()) return a;
  if (a.is_zero() && !b.is_zero()) return ScalarExpr();
  return ScalarExpr(make_binary(Op::Div, a.ptr(), b.ptr()));
}

ScalarExpr pow(const ScalarExpr& a, int exponent) {
  if (exponent == 0) return ScalarExpr::constant(1);
  if (exponent == 1) return a;
  if (is_const(a)) {
    const Node& n = a.node();
    if (n.exact) {
      if (auto r = pow(n.q, exponent)) return ScalarExpr::constant(*r);
    } else if (n.f != 0.0 || exponent > 0) {
      return ScalarExpr::constant_float(std::pow(n.f, exponent));
    }
  }
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->a = a.ptr();
  n->exponent = exponent;
  return ScalarExpr(n);
}

namespace {

ScalarExpr unary_fn(Op op, const ScalarExpr& a) {
  if (is_const(a)) {
    const Node& n = a.node();
    if (n.exact) {
      // Exact constants stay symbolic except at the trivial points.
      if (n.q.is_zero()) {
        if (op == Op::Sin) return ScalarExpr();
        if (op == Op::Cos || op == Op::Exp) return ScalarExpr::constant(1);
      }
      if (n.q.is_one() && op == Op::Ln) return ScalarExpr();
    } else {
      switch (op) {
        case Op::Sin: return ScalarExpr::constant_float(std::sin(n.f));
        case Op::Cos: return ScalarExpr::constant_float(std::cos(n.f));
        case Op::Exp: return ScalarExpr::constant_float(std::exp(n.f));
        case Op::Ln:
          if (n.f > 0.0) return ScalarExpr::constant_float(std::log(n.f));
          break;
        default: break;
      }
    }
  }
  return ScalarExpr(make_unary(op, a.ptr()));
}

}  // namespace

ScalarExpr sin(const ScalarExpr& a) { return unary_fn(Op::Sin, a); }
ScalarExpr cos(const ScalarExpr& a) { return unary_fn(Op::Cos, a); }
ScalarExpr exp(const ScalarExpr& a) { return unary_fn(Op::Exp, a); }
ScalarExpr ln(const ScalarExpr& a) { return unary_fn(Op::Ln, a); }

// ---------------------------------------------------------------------------
// Differentiation and substitution

namespace {

struct DiffCache {
  std::size_t var;
  std::unordered_map<const Node*, ScalarExpr> memo;

  ScalarExpr run(const ScalarExpr& e) {
    auto it = memo.find(e.ptr().get());
    if (it != memo.end()) return it->second;
    ScalarExpr r = compute(e);
    memo.emplace(e.ptr().get(), r);
    return r;
  }

  ScalarExpr compute(const ScalarExpr& e) {
    const Node& n = e.node();
    ScalarExpr a = n.a ? ScalarExpr(n.a) : ScalarExpr();
    ScalarExpr b = n.b ? ScalarExpr(n.b) : ScalarExpr();
    switch (n.op) {
      case Op::Const: return ScalarExpr();
      case Op::Var: return n.var == var ? ScalarExpr::constant(1) : ScalarExpr();
      case Op::Neg: return -run(a);
      case Op::Add: return run(a) + run(b);
      case Op::Sub: return run(a) - run(b);
      case Op::Mul: return run(a) * b + a * run(b);
      case Op::Div: {
        ScalarExpr da = run(a), db = run(b);
        if (db.is_zero()) return da / b;
        return da / b - a * db / pow(b, 2);
      }
      case Op::Pow: {
        ScalarExpr da = run(a);
        if (da.is_zero()) return ScalarExpr();
        return ScalarExpr::constant(n.exponent) * pow(a, n.exponent - 1) * da;
      }
      case Op::Sin: return cos(a) * run(a);
      case Op::Cos: return -(sin(a) * run(a));
      case Op::Exp: return e * run(a);
      case Op::Ln: return run(a) / a;
    }
    return ScalarExpr();
  }
};

ScalarExpr rebuild(const Node& n, const ScalarExpr& a, const ScalarExpr& b) {
  switch (n.op) {
    case Op::Neg: return -a;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return pow(a, n.exponent);
    case Op::Sin: return sin(a);
    case Op::Cos: return cos(a);
    case Op::Exp: return exp(a);
    case Op::Ln: return ln(a);
    default: break;
  }
  throw InternalError("expr.rebuild", "unexpected node");
}

}  // namespace

ScalarExpr diff(const ScalarExpr& e, std::size_t var) {
  DiffCache cache{var, {}};
  return cache.run(e);
}

ScalarExpr diff(const ScalarExpr& e, std::string_view var, const Chart& chart) {
  return diff(e, chart.require(var));
}

ScalarExpr substitute(const ScalarExpr& e, std::span<const ScalarExpr> replacements) {
  std::unordered_map<const Node*, ScalarExpr> memo;
  auto go = [&](auto&& self, const ScalarExpr& x) -> ScalarExpr {
    auto it = memo.find(x.ptr().get());
    if (it != memo.end()) return it->second;
    const Node& n = x.node();
    ScalarExpr r;
    if (n.op == Op::Const) {
      r = x;
    } else if (n.op == Op::Var) {
      if (n.var >= replacements.size())
        throw InputError("expr.substitute", "no replacement for variable " + std::to_string(n.var));
      r = replacements[n.var];
    } else {
      ScalarExpr a = self(self, ScalarExpr(n.a));
      ScalarExpr b = n.b ? self(self, ScalarExpr(n.b)) : ScalarExpr();
      r = rebuild(n, a, b);
    }
    memo.emplace(x.ptr().get(), r);
    return r;
  };
  return go(go, e);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const:
      if (n.exact) {
        if (n.q.num < 0) return 3;
        if (n.q.den != 1) return 2;
      } else if (std::signbit(n.f)) {
        return 3;
      }
      return 5;
    default: return 5;
  }
}

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep floats recognizable as floats so that a round trip preserves kind.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(const Node& n, const Chart& chart, std::string& out);

void print_child(const Node& child, int min_prec, const Chart& chart, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print(child, chart, out);
    out += ')';
  } else {
    print(child, chart, out);
  }
}

void print(const Node& n, const Chart& chart, std::string& out) {
  switch (n.op) {
    case Op::Const:
      if (n.exact) {
        out += std::to_string(n.q.num);
        if (n.q.den != 1) out += "/" + std::to_string(n.q.den);
      } else {
        out += format_float(n.f);
      }
      return;
    case Op::Var:
      out += n.var < chart.dim() ? chart.name(n.var) : "$" + std::to_string(n.var);
      return;
    case Op::Neg:
      out += '-';
      print_child(*n.a, 4, chart, out);
      return;
    case Op::Add:
    case Op::Sub:
      print_child(*n.a, 1, chart, out);
      out += n.op == Op::Add ? " + " : " - ";
      print_child(*n.b, 2, chart, out);
      return;
    case Op::Mul:
    case Op::Div:
      print_child(*n.a, 2, chart, out);
      out += n.op == Op::Mul ? "*" : "/";
      print_child(*n.b, 3, chart, out);
      return;
    case Op::Pow:
      print_child(*n.a, 5, chart, out);
      out += '^';
      if (n.exponent < 0)
        out += "(" + std::to_string(n.exponent) + ")";
      else
        out += std::to_string(n.exponent);
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Ln: {
      static const char* names[] = {"sin", "cos", "exp", "ln"};
      out += names[static_cast<int>(n.op) - static_cast<int>(Op::Sin)];
      out += '(';
      print(*n.a, chart, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const ScalarExpr& e, const Chart& chart) {
  std::string out;
  print(e.node(), chart, out);
  return out;
}

bool structurally_equal(const ScalarExpr& a, const ScalarExpr& b) {
  const Node& x = a.node();
  const Node& y = b.node();
  if (&x == &y) return true;
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::Const:
      if (x.exact != y.exact) return false;
      return x.exact ? x.q == y.q : x.f == y.f;
    case Op::Var: return x.var == y.var;
    case Op::Pow:
      return x.exponent == y.exponent && structurally_equal(ScalarExpr(x.a), ScalarExpr(y.a));
    default:
      if (!structurally_equal(ScalarExpr(x.a), ScalarExpr(y.a))) return false;
      if (x.b || y.b) {
        if (!x.b || !y.b) return false;
        return structurally_equal(ScalarExpr(x.b), ScalarExpr(y.b));
      }
      return true;
  }
}

std::size_t variable_bound(const ScalarExpr& e) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return 0;
    case Op::Var: return n.var + 1;
    default: {
      std::size_t r = variable_bound(ScalarExpr(n.a));
      if (n.b) r = std::max(r, variable_bound(ScalarExpr(n.b)));
      return r;
    }
  }
}

double evaluate(const ScalarExpr& e, std::span<const double> point, const Chart& chart) {
  const Node& n = e.node();
  auto sub = [&](const NodePtr& p) { return evaluate(ScalarExpr(p), point, chart); };
  switch (n.op) {
    case Op::Const: return value_of(n);
    case Op::Var:
      if (n.var >= point.size()) throw InputError("expr.dimension", "point dimension too small");
      return point[n.var];
    case Op::Neg: return -sub(n.a);
    case Op::Add: return sub(n.a) + sub(n.b);
    case Op::Sub: return sub(n.a) - sub(n.b);
    case Op::Mul: return sub(n.a) * sub(n.b);
    case Op::Div: {
      double d = sub(n.b);
      if (d == 0.0) throw DomainError(to_string(e, chart), "division by zero");
      return sub(n.a) / d;
    }
    case Op::Pow: {
      double base = sub(n.a);
      if (base == 0.0 && n.exponent < 0) throw DomainError(to_string(e, chart), "division by zero");
      return std::pow(base, n.exponent);
    }
    case Op::Sin: return std::sin(sub(n.a));
    case Op::Cos: return std::cos(sub(n.a));
    case Op::Exp: return std::exp(sub(n.a));
    case Op::Ln: {
      double v = sub(n.a);
      if (!(v > 0.0)) throw DomainError(to_string(e, chart), "logarithm of non-positive value");
      return std::log(v);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Polynomial normal form

namespace {

bool poly_add_into(Polynomial& acc, const Polynomial& p, bool negate) {
  for (const auto& [mono, c] : p) {
    Rational v = c;
    if (negate) {
      if (v.num == INT64_MIN) return false;
      v.num = -v.num;
    }
    auto it = acc.find(mono);
    if (it == acc.end()) {
      acc.emplace(mono, v);
      continue;
    }
    auto s = add(it->second, v);
    if (!s) return false;
    if (s->is_zero())
      acc.erase(it);
    else
      it->second = *s;
  }
  return true;
}

std::optional<Polynomial> poly_mul(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      auto c = mul(ca, cb);
      if (!c) return std::nullopt;
      std::vector<int> m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      Polynomial term{{m, *c}};
      if (!poly_add_into(out, term, false)) return std::nullopt;
    }
  }
  return out;
}

}  // namespace

std::optional<Polynomial> as_polynomial(const ScalarExpr& e, std::size_t nvars) {
  std::unordered_map<const Node*, std::optional<Polynomial>> memo;
  std::function<std::optional<Polynomial>(const NodePtr&)> go = [&](const NodePtr& p) -> std::optional<Polynomial> {
    if (auto it = memo.find(p.get()); it != memo.end()) return it->second;
    const Node& n = *p;
    std::optional<Polynomial> r;
    switch (n.op) {
      case Op::Const:
        if (n.exact) {
          r = Polynomial{};
          if (!n.q.is_zero()) r->emplace(std::vector<int>(nvars, 0), n.q);
        }
        break;
      case Op::Var:
        if (n.var < nvars) {
          std::vector<int> m(nvars, 0);
          m[n.var] = 1;
          r = Polynomial{{m, Rational{1, 1}}};
        }
        break;
      case Op::Neg:
        if (auto a = go(n.a)) {
          Polynomial out;
          if (poly_add_into(out, *a, true)) r = out;
        }
        break;
      case Op::Add:
      case Op::Sub: {
        auto a = go(n.a);
        auto b = go(n.b);
        if (a && b) {
          Polynomial out = *a;
          if (poly_add_into(out, *b, n.op == Op::Sub)) r = out;
        }
        break;
      }
      case Op::Mul: {
        auto a = go(n.a);
        auto b = go(n.b);
        if (a && b) r = poly_mul(*a, *b);
        break;
      }
      case Op::Div: {
        auto a = go(n.a);
        auto b = go(n.b);
        if (a && b && b->size() == 1 && b->begin()->first == std::vector<int>(nvars, 0)) {
          auto inv = div(Rational{1, 1}, b->begin()->second);
          if (inv) r = poly_mul(*a, Polynomial{{std::vector<int>(nvars, 0), *inv}});
        }
        break;
      }
      case Op::Pow:
        if (n.exponent >= 0) {
          if (auto a = go(n.a)) {
            Polynomial acc{{std::vector<int>(nvars, 0), Rational{1, 1}}};
            bool ok = true;
            for (int k = 0; k < n.exponent && ok; ++k) {
              auto next = poly_mul(acc, *a);
              if (next)
                acc = std::move(*next);
              else
                ok = false;
            }
            if (ok) r = acc;
          }
        }
        break;
      default: break;
    }
    memo.emplace(p.get(), r);
    return r;
  };
  return go(e.ptr());
}

}  // namespace maxclass::expr
