#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatpat {

enum class ErrorCode {
  InvalidWindow,
  Unrepairable,
  EmptySeason,
  DegenerateProfile,
  ShapeError,
  ZeroNormInput,
  ShiftOutOfRange,
  DegenerateCluster,
  TooFewProfiles,
  SilhouetteUndefined,
  MissingMetadata,
  StaleLabeling,
  ParseError,
  InputError,
  InvalidConfig,
  MissingArtifact,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Every failure path in the
/// library throws this type so callers can dispatch on `code()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace heatpat
