#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glt {

/** Base of every error raised by the library. */
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/** Malformed expression text; `position` is the 0-based byte offset. */
class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error("syntax error at position " + std::to_string(position) + ": " + what),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/** A variable that is not allowed for the expression's role. */
class VariableError : public Error {
public:
  VariableError(std::size_t position, const std::string& what)
      : Error("variable error at position " + std::to_string(position) + ": " + what),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/** Non-finite value produced while sampling a function. */
class EvalError : public Error {
public:
  using Error::Error;
};

/** Precondition on sizes, degrees or shapes violated. */
class DomainError : public Error {
public:
  using Error::Error;
};

/** A dense decomposition did not converge. */
class NumericalError : public Error {
public:
  using Error::Error;
};

class UnknownName : public Error {
public:
  using Error::Error;
};

class HermitianError : public Error {
public:
  using Error::Error;
};

/** Invalid experiment configuration (maps to exit code 2). */
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace glt
