#pragma once

#include <stdexcept>
#include <string>

namespace dage {

// Every failure the library can signal. One enum across modules so callers
// (and the CLI exit-code mapping) can switch on a single type.
enum class ErrorCode {
  // dataset / CSV
  MissingFile,
  MalformedHeader,
  RaggedRow,
  NonFiniteValue,
  UnknownDomainTag,
  InvalidLabel,
  // graph construction
  NegativeWeight,
  NonZeroDiagonal,
  NonPositiveMargin,
  NonPositiveSigma,
  MissingSameClassSource,
  MissingDifferentClassSource,
  KTooLarge,
  // spectral solvers
  DimensionMismatch,
  SingularNumerator,
  DimensionTooLarge,
  // losses
  DegenerateDenominator,
  NonFiniteProbe,
  // training
  NonFiniteLoss,
  EmptyPairSet,
  MissingClass,
  // experiment protocol
  ClassTooSmall,
  InsufficientPool,
  InsufficientSource,
  NoSameClassPairs,
  ManifestMismatch,
  // configuration
  InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownDomainTag: return "UnknownDomainTag";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonZeroDiagonal: return "NonZeroDiagonal";
    case ErrorCode::NonPositiveMargin: return "NonPositiveMargin";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::MissingSameClassSource: return "MissingSameClassSource";
    case ErrorCode::MissingDifferentClassSource: return "MissingDifferentClassSource";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularNumerator: return "SingularNumerator";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NonFiniteProbe: return "NonFiniteProbe";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyPairSet: return "EmptyPairSet";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::InsufficientPool: return "InsufficientPool";
    case ErrorCode::InsufficientSource: return "InsufficientSource";
    case ErrorCode::NoSameClassPairs: return "NoSameClassPairs";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dage
