#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geopin {

enum class ErrorCode {
  InvalidArgument,
  CoincidentPoints,
  PoleDegenerate,
  DistanceOutOfRange,
  InvalidPixel,
  VerticalRay,
  OutOfProjectionDomain,
  PixelOutOfBounds,
  FThetaInversionFailure,
  BehindCamera,
  OutsideFieldOfView,
  AboveHorizon,
  NegativeHeight,
  OutOfTrack,
  MissingHeading,
  StationaryAmbiguous,
  ParseError,
  DanglingReference,
  IoError,
  HttpError,
  SchemaDrift,
  EmptySession,
  InvalidSpec,
};

/// Stable name of an error code, e.g. "AboveHorizon". These names are part of
/// the HTTP and report wire formats.
std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace geopin
