#include "geopin/error.hpp"

namespace geopin {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::PoleDegenerate: return "PoleDegenerate";
    case ErrorCode::DistanceOutOfRange: return "DistanceOutOfRange";
    case ErrorCode::InvalidPixel: return "InvalidPixel";
    case ErrorCode::VerticalRay: return "VerticalRay";
    case ErrorCode::OutOfProjectionDomain: return "OutOfProjectionDomain";
    case ErrorCode::PixelOutOfBounds: return "PixelOutOfBounds";
    case ErrorCode::FThetaInversionFailure: return "FThetaInversionFailure";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::OutsideFieldOfView: return "OutsideFieldOfView";
    case ErrorCode::AboveHorizon: return "AboveHorizon";
    case ErrorCode::NegativeHeight: return "NegativeHeight";
    case ErrorCode::OutOfTrack: return "OutOfTrack";
    case ErrorCode::MissingHeading: return "MissingHeading";
    case ErrorCode::StationaryAmbiguous: return "StationaryAmbiguous";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::SchemaDrift: return "SchemaDrift";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace geopin
