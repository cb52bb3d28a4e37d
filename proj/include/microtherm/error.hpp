#pragma once

#include <stdexcept>
#include <string>

namespace microtherm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public Error { using Error::Error; };
class InvalidMaterialError : public Error { using Error::Error; };
class InvalidGridError : public Error { using Error::Error; };
class DimensionMismatchError : public Error { using Error::Error; };
class SolveFailureError : public Error { using Error::Error; };
class SizeLimitError : public Error { using Error::Error; };
class EigenFailureError : public Error { using Error::Error; };
class DegenerateTrajectoryError : public Error { using Error::Error; };
class IndefiniteFormError : public Error { using Error::Error; };
class RootFailureError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

/// Malformed scenario text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace microtherm
