#pragma once

#include <stdexcept>
#include <string>

namespace momgen {

/// Failure classes; each maps onto one CLI exit code.
enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error(stage.empty() ? what : "[" + stage + "] " + what),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what, std::string stage = "validation")
      : Error(ErrorKind::Validation, std::move(stage), what) {}
};

struct NumericalError : Error {
  NumericalError(std::string stage, const std::string& what)
      : Error(ErrorKind::Numerical, std::move(stage), what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, "io", what) {}
};

/// Raised when exact polynomial growth passes the configured term budget.
struct TermCapExceeded : NumericalError {
  explicit TermCapExceeded(const std::string& what) : NumericalError("exact", what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Io: return 4;
  }
  return 1;
}

}  // namespace momgen
