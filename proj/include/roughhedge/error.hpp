#pragma once

#include <stdexcept>
#include <string>

namespace roughhedge {

enum class ErrorKind {
  InvalidArgument,
  Domain,
  Overflow,
  Structural,
  Numerical,
  Divergence,
  Validation,
  Io,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. The kind is what the CLI reports in
// its machine-readable error payload.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace roughhedge
