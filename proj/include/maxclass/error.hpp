#pragma once

#include <stdexcept>
#include <string>

namespace maxclass {

/// Failure category; the CLI maps it onto the process exit status.
enum class ErrorKind {
  Input,      // malformed or inconsistent user input (exit 1)
  Numerical,  // rank/step/tolerance instability (exit 2)
  Internal,   // verification failure that indicates a bug
};

/// Base error carrying a module-qualified code such as "expr.syntax".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

class InputError : public Error {
 public:
  InputError(std::string code, const std::string& message)
      : Error(ErrorKind::Input, std::move(code), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(ErrorKind::Numerical, std::move(code), message) {}
};

class InternalError : public Error {
 public:
  InternalError(std::string code, const std::string& message)
      : Error(ErrorKind::Internal, std::move(code), message) {}
};

/// Syntax error with the byte offset of the offending token.
class SyntaxError : public InputError {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : InputError("expr.syntax", message + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation outside the domain of an elementary function.
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& subexpr, const std::string& message)
      : NumericalError("expr.domain", message + " in '" + subexpr + "'"), subexpr_(subexpr) {}
  const std::string& subexpression() const noexcept { return subexpr_; }

 private:
  std::string subexpr_;
};

}  // namespace maxclass
