#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace pbq {

enum class ErrorKind {
  NonZeroMean,
  DegenerateBranch,
  GapViolation,
  StencilOutsideGap,
  BlowUp,
  ShockTooClose,
  HyperbolicityLoss,
  NoContraction,
  CutoffViolation,
  NotPositiveDefinite,
  NonPositiveValue,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

// Compact number for messages (std::to_string rounds small values to zero).
inline std::string num_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pbq
