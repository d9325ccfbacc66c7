#include "agora/error.hpp"

namespace agora {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::OutputLocked: return "OutputLocked";
        case ErrorCode::StageDependencyMissing: return "StageDependencyMissing";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
        case ErrorCode::BackendTransient: return "BackendTransient";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::EmptyCompletion: return "EmptyCompletion";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::EmptyItem: return "EmptyItem";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyCandidates: return "EmptyCandidates";
        case ErrorCode::EmptyOpinions: return "EmptyOpinions";
        case ErrorCode::ModeMismatch: return "ModeMismatch";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::EmptySampleList: return "EmptySampleList";
        case ErrorCode::EmbedderMismatch: return "EmbedderMismatch";
        case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    }
    return "Unknown";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::OutputLocked:
        case ErrorCode::StageDependencyMissing:
            return 2;
        case ErrorCode::BackendTransient:
        case ErrorCode::BackendUnavailable:
        case ErrorCode::EmptyCompletion:
        case ErrorCode::CountMismatch:
        case ErrorCode::EmptyItem:
            return 3;
        default:
            return 4;
    }
}

}  // namespace agora
