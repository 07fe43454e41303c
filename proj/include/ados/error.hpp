#pragma once

#include <stdexcept>
#include <string>

namespace ados {

enum class ErrorKind {
    // transcript
    MalformedLine,
    UnknownSpeaker,
    EmptySession,
    DuplicateHeader,
    // features
    NoChildSpeech,
    LexiconLoadError,
    // rules
    UnknownFeatureName,
    EmptyGrid,
    InsufficientStrata,
    // prompts
    MissingFewShot,
    MissingItem,
    ScoreOutOfRange,
    DuplicateItem,
    Unparseable,
    // gateway
    AuthError,
    RateLimitedExhausted,
    TimeoutExhausted,
    ProtocolError,
    ReplayMiss,
    // fusion
    ZeroMae,
    // assessment
    OutOfRangeTotal,
    LengthMismatch,
    EmptyInput,
    MissingPrediction,
    // synth
    InvalidProfile,
    // pipeline
    ConfigError,
    MissingStage,
    IoError,
};

const char* error_kind_name(ErrorKind kind);

/// Single exception type for the whole pipeline; `kind` carries the
/// machine-checkable category, `what()` the human-readable context.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ados
