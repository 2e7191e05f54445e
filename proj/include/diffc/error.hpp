#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffc {

enum class Errc {
  Precondition,
  ShapeMismatch,
  NonSymmetric,
  NoConvergence,
  NotPSD,
  TooFewSamples,
  KernelTooLarge,
  BadDetailLevel,
  BadRange,
  StepOutOfRange,
  NonZeroFinalNoise,
  BadSubsequence,
  SingularSystem,
  EmptyDataset,
  DimMismatch,
  DimensionCap,
  BadMagic,
  TruncatedFile,
  DimOverflow,
  UnsupportedFormat,
  DomainMismatch,
  BadSide,
  IoError,
  ConfigError,
  InsufficientSeries,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure in the library surfaces as this exception; `code()` lets
/// callers route on the failure class without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace diffc
