#pragma once

#include <stdexcept>
#include <string>

namespace lscs {

// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgument,    // bad parameter value or precondition violation
  DimensionMismatch,  // operand shapes disagree
  Io,                 // file could not be opened, read or written
  Format,             // file contents are malformed
  Infeasible,         // no solution within the requested bounds
};

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

}  // namespace lscs
