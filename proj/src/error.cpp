#include "ados/error.hpp"

namespace ados {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedLine: return "MalformedLine";
        case ErrorKind::UnknownSpeaker: return "UnknownSpeaker";
        case ErrorKind::EmptySession: return "EmptySession";
        case ErrorKind::DuplicateHeader: return "DuplicateHeader";
        case ErrorKind::NoChildSpeech: return "NoChildSpeech";
        case ErrorKind::LexiconLoadError: return "LexiconLoadError";
        case ErrorKind::UnknownFeatureName: return "UnknownFeatureName";
        case ErrorKind::EmptyGrid: return "EmptyGrid";
        case ErrorKind::InsufficientStrata: return "InsufficientStrata";
        case ErrorKind::MissingFewShot: return "MissingFewShot";
        case ErrorKind::MissingItem: return "MissingItem";
        case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorKind::DuplicateItem: return "DuplicateItem";
        case ErrorKind::Unparseable: return "Unparseable";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::RateLimitedExhausted: return "RateLimitedExhausted";
        case ErrorKind::TimeoutExhausted: return "TimeoutExhausted";
        case ErrorKind::ProtocolError: return "ProtocolError";
        case ErrorKind::ReplayMiss: return "ReplayMiss";
        case ErrorKind::ZeroMae: return "ZeroMae";
        case ErrorKind::OutOfRangeTotal: return "OutOfRangeTotal";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::MissingPrediction: return "MissingPrediction";
        case ErrorKind::InvalidProfile: return "InvalidProfile";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::MissingStage: return "MissingStage";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace ados
