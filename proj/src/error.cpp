#include "renorm/error.hpp"

namespace renorm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidGrid: return "invalid grid";
    case ErrorKind::GridMismatch: return "grid mismatch";
    case ErrorKind::DegenerateBall: return "degenerate ball";
    case ErrorKind::NonFinite: return "non-finite samples";
    case ErrorKind::UnsupportedRegularity: return "unsupported regularity";
    case ErrorKind::ScaleRange: return "scale out of range";
    case ErrorKind::MalformedExpansion: return "malformed expansion";
    case ErrorKind::InvalidVariant: return "invalid variant";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::TooFewSamples: return "too few samples";
    case ErrorKind::SingularSystem: return "singular system";
    case ErrorKind::ZeroMassMollifier: return "zero-mass mollifier";
    case ErrorKind::MomentCheckFailed: return "mollifier moment check failed";
    case ErrorKind::SupportViolation: return "support violation";
    case ErrorKind::EmptyRange: return "empty range";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace renorm
