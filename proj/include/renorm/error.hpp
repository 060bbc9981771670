#pragma once

#include <stdexcept>
#include <string>

namespace renorm {

enum class ErrorKind {
  InvalidGrid,
  GridMismatch,
  DegenerateBall,
  NonFinite,
  UnsupportedRegularity,
  ScaleRange,
  MalformedExpansion,
  InvalidVariant,
  InvalidArgument,
  TooFewSamples,
  SingularSystem,
  ZeroMassMollifier,
  MomentCheckFailed,
  SupportViolation,
  EmptyRange,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers branch
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace renorm
