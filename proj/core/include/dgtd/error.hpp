#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgtd {

enum class ErrorKind {
  InvalidModel,
  NonErgodic,
  SingularGram,
  SingularB,
  DimensionMismatch,
  NotConnected,
  DomainError,
  NoConvergence,
  SingularSystem,
  UnknownPreset,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception; `kind()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace dgtd
