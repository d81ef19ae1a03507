#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strathom {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind { syntax, unknown_identifier, arity };

  ParseError(Kind kind, const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        kind_(kind),
        line_(line),
        column_(column) {}
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

/// Point outside the declared open domain of a map or chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate (log of a negative, division by zero, ...).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A non-smooth primitive was differentiated at its kink.
class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConstantRankViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericalInconsistency : public Error {
 public:
  using Error::Error;
};

class ConstructionFailure : public Error {
 public:
  using Error::Error;
};

/// Scene document does not match the schema; `pointer` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace strathom
