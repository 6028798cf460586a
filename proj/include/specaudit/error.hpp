#pragma once

#include <stdexcept>
#include <string>

namespace specaudit {

/// Stable error codes surfaced by every module. The CLI prints the code
/// name verbatim so callers can grep diagnostics.
enum class ErrorCode {
  // audio-io
  MalformedContainer,
  UnsupportedEncoding,
  EmptyAudio,
  RateMismatch,
  TooShort,
  DurationTooShort,
  // dsp
  EmptyFrame,
  NotPowerOfTwo,
  BadHop,
  EmptyMatrix,
  // neural net
  ShapeMismatch,
  StaleCache,
  BadMagic,
  VersionMismatch,
  ChecksumFailure,
  TruncatedFile,
  // pipeline
  MalformedLine,
  UnknownKey,
  DuplicateTrack,
  MissingAudio,
  ProtocolError,
  TooFew,
  EmptySplit,
  AudioError,
  // metrics
  LengthMismatch,
  Empty,
  SingleClass,
  TooFewPoints,
  UnsortedX,
  // cli
  UnknownVerb,
  MissingRequired,
  BadValue,
};

constexpr const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DurationTooShort: return "DurationTooShort";
    case ErrorCode::EmptyFrame: return "EmptyFrame";
    case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorCode::BadHop: return "BadHop";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumFailure: return "ChecksumFailure";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::DuplicateTrack: return "DuplicateTrack";
    case ErrorCode::MissingAudio: return "MissingAudio";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::AudioError: return "AudioError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::UnsortedX: return "UnsortedX";
    case ErrorCode::UnknownVerb: return "UnknownVerb";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::BadValue: return "BadValue";
  }
  return "UnknownError";
}

/// Domain error; what() reads "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace specaudit
