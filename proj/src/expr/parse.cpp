// Recursive-descent parser for the expression grammar:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)*
//   integer := ['+' | '-'] digits | '(' ['+' | '-'] digits ')'
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//   func    := 'sin' | 'cos' | 'exp' | 'ln'

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "maxclass/error.hpp"
#include "maxclass/expr.hpp"

namespace maxclass::expr {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Chart& chart) : text_(text), chart_(chart) {}

  ScalarExpr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "empty expression");
    ScalarExpr e = expr();
    skip_ws();
    if (pos_ < text_.size()) throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  std::string_view text_;
  const Chart& chart_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail_here(const std::string& what) {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of input, expected " + what);
    throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "', expected " + what);
  }

  ScalarExpr expr() {
    ScalarExpr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + term();
      else if (accept('-'))
        lhs = lhs - term();
      else
        return lhs;
    }
  }

  ScalarExpr term() {
    ScalarExpr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        ScalarExpr rhs = unary();
        if (rhs.is_zero()) throw SyntaxError(at, "division by constant zero");
        lhs = lhs / rhs;
      } else {
        return lhs;
      }
    }
  }

  ScalarExpr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  ScalarExpr power() {
    ScalarExpr base = primary();
    while (accept('^')) base = pow(base, integer_exponent());
    return base;
  }

  int integer_exponent() {
    bool paren = accept('(');
    skip_ws();
    bool neg = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      neg = text_[pos_] == '-';
      ++pos_;
      skip_ws();
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) {
      pos_ = start;
      fail_here("integer exponent");
    }
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw SyntaxError(start, "non-integer exponent");
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) throw SyntaxError(start, "exponent out of range");
    if (paren && !accept(')')) fail_here("')'");
    return neg ? -value : value;
  }

  ScalarExpr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail_here("operand");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    if (accept('(')) {
      ScalarExpr e = expr();
      if (!accept(')')) fail_here("')'");
      return e;
    }
    fail_here("operand");
  }

  ScalarExpr number() {
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        is_float = true;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    if (token == ".") throw SyntaxError(start, "malformed number");
    if (!is_float) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec == std::errc()) return ScalarExpr::constant(Rational{v, 1});
    }
    return ScalarExpr::constant_float(std::strtod(token.c_str(), nullptr));
  }

  ScalarExpr name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string id(text_.substr(start, pos_ - start));
    skip_ws();
    bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (call && (id == "sin" || id == "cos" || id == "exp" || id == "ln")) {
      accept('(');
      ScalarExpr arg = expr();
      if (!accept(')')) fail_here("')'");
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      if (id == "exp") return exp(arg);
      return ln(arg);
    }
    if (call && !chart_.index_of(id)) throw SyntaxError(start, "unknown function '" + id + "'");
    auto index = chart_.index_of(id);
    if (!index) throw InputError("expr.undeclared", "undeclared variable '" + id + "' at offset " + std::to_string(start));
    return ScalarExpr::variable(*index);
  }
};

}  // namespace

ScalarExpr parse(std::string_view text, const Chart& chart) { return Parser(text, chart).run(); }

}  // namespace maxclass::expr
