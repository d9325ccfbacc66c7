#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agora {

enum class ErrorCode {
    // configuration
    ConfigError,
    OutputLocked,
    StageDependencyMissing,
    // corpus
    FileNotFound,
    MalformedRow,
    DuplicateId,
    InsufficientCorpus,
    // generation / backends
    BackendTransient,
    BackendUnavailable,
    EmptyCompletion,
    CountMismatch,
    EmptyItem,
    // scoring
    EmptyText,
    EmptyCandidates,
    EmptyOpinions,
    // dataset
    ModeMismatch,
    IoFailure,
    SchemaViolation,
    // evaluation
    EmptySampleList,
    EmbedderMismatch,
    // cache
    CacheCorrupt,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `code()` tells callers
/// which contract was violated; the message carries the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

/// CLI exit status for an error: 2 config, 3 backend, 4 validation.
int exit_code_for(ErrorCode code);

}  // namespace agora
