#pragma once

#include <stdexcept>
#include <string>

namespace starhub {

enum class ErrorKind {
  dimension_mismatch,
  parse_error,
  invariant_violation,
  invalid_argument,
  limit_exceeded,
  internal_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::parse_error: return "parse error";
    case ErrorKind::invariant_violation: return "invariant violation";
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::limit_exceeded: return "limit exceeded";
    case ErrorKind::internal_error: return "internal error";
  }
  return "error";
}

// Every failure raised by the library carries a kind so callers (and the
// CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace starhub
