#pragma once

#include <stdexcept>
#include <string>

namespace dioph {

// Error kinds map one-to-one onto the C API status codes.
enum class ErrorKind {
  InvalidArgument = 1,
  Domain = 2,
  Budget = 3,
  Unsupported = 4,
  Io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};

/// A point was outside the chart domain (or a segment left it).
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::Domain, w) {}
};

/// An enumeration hit its configured work limit. Never a silent truncation.
struct BudgetExceeded : Error {
  explicit BudgetExceeded(const std::string& w) : Error(ErrorKind::Budget, w) {}
};

struct Unsupported : Error {
  explicit Unsupported(const std::string& w) : Error(ErrorKind::Unsupported, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

}  // namespace dioph
