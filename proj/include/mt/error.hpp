#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mt {

enum class ErrorCode {
  // imaging
  TruncatedInput,
  UnsupportedFormat,
  CorruptInput,
  DimensionBound,
  DimensionMismatch,
  // landmarks
  MalformedDocument,
  WrongPointCount,
  NonFiniteCoordinate,
  OutOfBounds,
  // geometry / raster
  DegenerateRegion,
  TooFewIndices,
  InvalidRegion,
  NotConvex,
  NegativeSigma,
  // makeup
  InvalidArtifact,
  ArtifactFailed,
  PerturbationFailed,
  // dataset
  DuplicateId,
  UnknownLabel,
  UnknownMethod,
  MissingColumn,
  Io,
  // adapters
  ProtocolError,
  MissingResponse,
  ScoreOutOfRange,
  // metrics / mtcore
  UnknownId,
  IdSetMismatch,
  ConfigError,
  UnknownFormat,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedInput: return "TruncatedInput";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptInput: return "CorruptInput";
    case ErrorCode::DimensionBound: return "DimensionBound";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::WrongPointCount: return "WrongPointCount";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::TooFewIndices: return "TooFewIndices";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::NegativeSigma: return "NegativeSigma";
    case ErrorCode::InvalidArtifact: return "InvalidArtifact";
    case ErrorCode::ArtifactFailed: return "ArtifactFailed";
    case ErrorCode::PerturbationFailed: return "PerturbationFailed";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::MissingResponse: return "MissingResponse";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::IdSetMismatch: return "IdSetMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
  }
  return "Unknown";
}

/// Classified failure. `detail` carries the numeric payload some codes
/// report (point index, row number, point count, line number); -1 if unused.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, long detail = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  long detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  long detail_;
};

}  // namespace mt
