#pragma once

#include <stdexcept>
#include <string>

namespace evplan {

// Error categories map onto CLI exit codes (validation 2, infeasible 3,
// not converged 4). Everything else is a plain runtime failure.
enum class ErrorKind { Validation, Infeasible, NotConverged, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::Validation, w) {}
};

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct NotRadial : ValidationError {
  using ValidationError::ValidationError;
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& w) : Error(ErrorKind::Infeasible, w) {}
};

struct NotConverged : Error {
  explicit NotConverged(const std::string& w) : Error(ErrorKind::NotConverged, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Infeasible: return 3;
    case ErrorKind::NotConverged: return 4;
    case ErrorKind::Io: return 1;
  }
  return 1;
}

}  // namespace evplan
