#pragma once

#include <stdexcept>
#include <string>

namespace risloc {

enum class ErrorKind {
  DegenerateGeometry,
  CapacityExceeded,
  OutOfRange,
  ShadowedPath,
  NoSignal,
  UnderDetermined,
  InitFailure,
  AmbiguousGeometry,
  InvalidArgument,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateGeometry: return "degenerate geometry";
    case ErrorKind::CapacityExceeded: return "capacity exceeded";
    case ErrorKind::OutOfRange: return "out of range";
    case ErrorKind::ShadowedPath: return "shadowed path";
    case ErrorKind::NoSignal: return "no signal";
    case ErrorKind::UnderDetermined: return "under-determined";
    case ErrorKind::InitFailure: return "init failure";
    case ErrorKind::AmbiguousGeometry: return "ambiguous geometry";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Config: return "config";
  }
  return "error";
}

}  // namespace risloc
