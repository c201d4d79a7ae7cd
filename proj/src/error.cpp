#include "tutor/error.hpp"

namespace tutor {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::InvalidMark: return "InvalidMark";
        case ErrorCode::FailedPrerequisite: return "FailedPrerequisite";
        case ErrorCode::DuplicateAssessment: return "DuplicateAssessment";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::InvalidMapping: return "InvalidMapping";
        case ErrorCode::DuplicateSnippet: return "DuplicateSnippet";
        case ErrorCode::InvalidSnippet: return "InvalidSnippet";
        case ErrorCode::ConfigurationError: return "ConfigurationError";
        case ErrorCode::PromptTooLarge: return "PromptTooLarge";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::BackendError: return "BackendError";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::BatchFailed: return "BatchFailed";
        case ErrorCode::NoCandidates: return "NoCandidates";
        case ErrorCode::NoProse: return "NoProse";
        case ErrorCode::MissingTier: return "MissingTier";
        case ErrorCode::IncompleteReport: return "IncompleteReport";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace tutor
