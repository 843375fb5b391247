#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forma {

// Base of every error raised by the library. Callers that only care about
// "something in the pipeline failed" can catch this one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Violated input contract (bad radius, boundary off the base plane, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

// A configured resource cap was exceeded.
class LimitError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

class DivergenceError : public Error {
public:
  using Error::Error;
};

class RigidBodyError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class SelectionError : public Error {
public:
  using Error::Error;
};

class SizingError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace forma
