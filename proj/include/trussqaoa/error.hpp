#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trussqaoa {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class Inconsistency : public Error {
 public:
  using Error::Error;
};

/// Qubit count above the dense-enumeration guard.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class ReferenceUnavailable : public Error {
 public:
  using Error::Error;
};

/// Model/schedule file could not be read or validated. `line` is 0 when the
/// problem is not tied to a specific line.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The design loop lost its load path.
class StructuralFailure : public Error {
 public:
  StructuralFailure(const std::string& what, int iteration)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace trussqaoa
