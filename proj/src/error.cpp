#include "heatpat/error.hpp"

namespace heatpat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::Unrepairable: return "Unrepairable";
    case ErrorCode::EmptySeason: return "EmptySeason";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::ZeroNormInput: return "ZeroNormInput";
    case ErrorCode::ShiftOutOfRange: return "ShiftOutOfRange";
    case ErrorCode::DegenerateCluster: return "DegenerateCluster";
    case ErrorCode::TooFewProfiles: return "TooFewProfiles";
    case ErrorCode::SilhouetteUndefined: return "SilhouetteUndefined";
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::StaleLabeling: return "StaleLabeling";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InputError: return "InputError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

}  // namespace heatpat
