#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agora/backend.hpp"
#include "agora/corpus.hpp"

namespace agora {

enum class ConflictMode { WithoutConflict, WithConflict };

std::string_view to_string(ConflictMode mode);
/// Accepts "without"/"with" and the enumerator names.
std::optional<ConflictMode> parse_conflict_mode(std::string_view s);

struct GenerationConfig {
    int n_opinions = 3;
    int m_candidates = 4;
    DecodingParams decoding_params = default_decoding_params();
    std::size_t max_concurrency = 4;
    int retry_limit = 2;

    /// Throws ConfigError unless n_opinions >= 2, m_candidates >= 1,
    /// max_concurrency >= 1 and retry_limit >= 0.
    void validate() const;
};

struct OpinionSet {
    std::string question_id;
    ConflictMode conflict_mode = ConflictMode::WithoutConflict;
    std::vector<std::string> opinions;

    bool operator==(const OpinionSet&) const = default;
};

struct CandidateSet {
    std::string question_id;
    ConflictMode conflict_mode = ConflictMode::WithoutConflict;
    std::vector<std::string> candidates;

    bool operator==(const CandidateSet&) const = default;
};

/// One question together with its generated opinions and agreement
/// candidates under a single conflict mode.
struct ConsensusInstance {
    Question question;
    ConflictMode conflict_mode = ConflictMode::WithoutConflict;
    OpinionSet opinions;
    CandidateSet candidates;

    /// Ids and modes agree across the parts; throws SchemaViolation.
    void validate() const;
    bool operator==(const ConsensusInstance&) const = default;
};

/// "three", "four", ... for 1..10; decimal digits otherwise.
std::string number_word(int n);

/// Title, plus " — " and the content when the content is non-blank.
/// Newlines are flattened to spaces.
std::string topic_text(const Question& question);

std::string render_opinion_prompt(const Question& question, ConflictMode mode, int n);

inline constexpr std::string_view kCandidatePromptHeader = "Please generate an agreement of the following opinions.";

std::string render_candidate_prompt(const OpinionSet& opinions);

/// "Opinion 1: ...\nOpinion 2: ..." with inner newlines flattened.
std::string format_opinion_lines(const std::vector<std::string>& opinions);

/// Splits an enumerated completion into items. An item starts on a line
/// whose first token is "<digits>." or "<digits>)" or "Opinion <k>:";
/// unmarked lines continue the current item (or are dropped before the
/// first marker). Throws EmptyItem or CountMismatch.
std::vector<std::string> parse_enumerated_list(std::string_view raw, std::size_t expected_n);

/// One completion of the opinion prompt, parsed into exactly n_opinions
/// items. Parse failures are retried up to retry_limit times with fresh
/// (differently-nonced) completions.
OpinionSet generate_opinions(CompletionClient& client, const Question& question, ConflictMode mode,
                             const GenerationConfig& cfg);

/// m_candidates independent completions of the agreement prompt; each
/// trimmed completion is one candidate, duplicates kept.
CandidateSet generate_candidates(CompletionClient& client, const Question& question,
                                 const OpinionSet& opinions, const GenerationConfig& cfg);

}  // namespace agora
