#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tutor {

// Every failure the engine reports maps to exactly one of these codes. The
// C API returns them as integers, so the numbering is part of the ABI.
enum class ErrorCode : int {
    Ok = 0,
    InvalidMark = 1,
    FailedPrerequisite = 2,
    DuplicateAssessment = 3,
    InsufficientData = 4,
    InvalidMapping = 5,
    DuplicateSnippet = 6,
    InvalidSnippet = 7,
    ConfigurationError = 8,
    PromptTooLarge = 9,
    Timeout = 10,
    BackendError = 11,
    EmptyCompletion = 12,
    BatchFailed = 13,
    NoCandidates = 14,
    NoProse = 15,
    MissingTier = 16,
    IncompleteReport = 17,
    IoError = 18,
    ParseError = 19,
    NotFound = 20,
    Conflict = 21,
    InvalidArgument = 22,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace tutor
