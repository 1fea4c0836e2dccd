#pragma once

// Symbolic scalar expressions over a coordinate chart.
//
// Expressions are immutable trees shared through reference counting. The
// smart constructors fold constants and apply the 0/1 identities; nothing
// beyond that is simplified, so structurally different trees may denote the
// same function. Semantic equality is checked by comparing jets.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maxclass::expr {

/// Ordered list of unique coordinate names.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> names);

  std::size_t dim() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Index of `name`; throws InputError("expr.undeclared") if absent.
  std::size_t require(std::string_view name) const;

  bool operator==(const Chart& other) const = default;

 private:
  std::vector<std::string> names_;
};

/// Exact rational number with int64 parts, normalized (den > 0, gcd 1).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static std::optional<Rational> make(std::int64_t n, std::int64_t d);
  double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const noexcept { return num == 0; }
  bool is_one() const noexcept { return num == 1 && den == 1; }
  bool operator==(const Rational&) const = default;
};

std::optional<Rational> add(Rational a, Rational b);
std::optional<Rational> mul(Rational a, Rational b);
std::optional<Rational> div(Rational a, Rational b);
std::optional<Rational> pow(Rational a, int e);

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Ln };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  bool exact = true;       // Const: rational (true) or float (false)
  Rational q;              // Const, exact
  double f = 0.0;          // Const, float
  std::size_t var = 0;     // Var
  int exponent = 0;        // Pow
  NodePtr a, b;            // operands
};

class ScalarExpr {
 public:
  ScalarExpr();  // exact zero
  explicit ScalarExpr(NodePtr node) : node_(std::move(node)) {}

  static ScalarExpr constant(Rational q);
  static ScalarExpr constant(std::int64_t n) { return constant(Rational{n, 1}); }
  static ScalarExpr constant_float(double v);
  static ScalarExpr variable(std::size_t index);

  const Node& node() const noexcept { return *node_; }
  const NodePtr& ptr() const noexcept { return node_; }
  Op op() const noexcept { return node_->op; }

  bool is_constant() const noexcept { return node_->op == Op::Const; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;
  /// Value of a constant node (rational converted to double).
  double constant_value() const;

 private:
  NodePtr node_;
};

ScalarExpr operator-(const ScalarExpr& a);
ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr pow(const ScalarExpr& a, int exponent);
ScalarExpr sin(const ScalarExpr& a);
ScalarExpr cos(const ScalarExpr& a);
ScalarExpr exp(const ScalarExpr& a);
ScalarExpr ln(const ScalarExpr& a);

/// Parses infix text; see README for the grammar. Every identifier that is
/// not a function name must be a coordinate of `chart`.
ScalarExpr parse(std::string_view text, const Chart& chart);

/// Exact partial derivative with respect to coordinate `var`.
ScalarExpr diff(const ScalarExpr& e, std::size_t var);
/// Partial derivative by coordinate name; throws on undeclared names.
ScalarExpr diff(const ScalarExpr& e, std::string_view var, const Chart& chart);

/// Replaces each variable i by replacements[i].
ScalarExpr substitute(const ScalarExpr& e, std::span<const ScalarExpr> replacements);

/// Re-parseable infix text (floats with 17 significant digits).
std::string to_string(const ScalarExpr& e, const Chart& chart);

/// Tree equality (same shape, same constants, same variables).
bool structurally_equal(const ScalarExpr& a, const ScalarExpr& b);

/// Largest variable index referenced plus one (0 for constants).
std::size_t variable_bound(const ScalarExpr& e);

/// Exact polynomial normal form: exponent vector (length nvars) -> coefficient.
using Polynomial = std::map<std::vector<int>, Rational>;

/// Expands `e` into a polynomial with rational coefficients. Returns nullopt
/// for anything that is not an exact polynomial (floats, division by a
/// non-constant, negative powers, transcendental functions) or on overflow.
std::optional<Polynomial> as_polynomial(const ScalarExpr& e, std::size_t nvars);

/// Plain floating-point evaluation; throws DomainError outside the domain.
double evaluate(const ScalarExpr& e, std::span<const double> point, const Chart& chart);

}  // namespace maxclass::expr
