#include "agora/generation.hpp"

#include <cctype>

#include "agora/error.hpp"
#include "agora/parallel.hpp"
#include "agora/text.hpp"

namespace agora {

std::string_view to_string(ConflictMode mode) {
    return mode == ConflictMode::WithConflict ? "WithConflict" : "WithoutConflict";
}

std::optional<ConflictMode> parse_conflict_mode(std::string_view s) {
    if (s == "without" || s == "WithoutConflict") return ConflictMode::WithoutConflict;
    if (s == "with" || s == "WithConflict") return ConflictMode::WithConflict;
    return std::nullopt;
}

void GenerationConfig::validate() const {
    if (n_opinions < 2) throw Error(ErrorCode::ConfigError, "n_opinions must be >= 2");
    if (m_candidates < 1) throw Error(ErrorCode::ConfigError, "m_candidates must be >= 1");
    if (max_concurrency < 1) throw Error(ErrorCode::ConfigError, "max_concurrency must be >= 1");
    if (retry_limit < 0) throw Error(ErrorCode::ConfigError, "retry_limit must be >= 0");
}

void ConsensusInstance::validate() const {
    if (opinions.question_id != question.id || candidates.question_id != question.id) {
        throw Error(ErrorCode::SchemaViolation, "instance parts disagree on question id '" + question.id + "'");
    }
    if (opinions.conflict_mode != conflict_mode || candidates.conflict_mode != conflict_mode) {
        throw Error(ErrorCode::SchemaViolation, "instance parts disagree on conflict mode for '" + question.id + "'");
    }
}

std::string number_word(int n) {
    static constexpr std::string_view kWords[] = {"one", "two", "three", "four", "five",
                                                  "six", "seven", "eight", "nine", "ten"};
    if (n >= 1 && n <= 10) return std::string(kWords[n - 1]);
    return std::to_string(n);
}

std::string topic_text(const Question& question) {
    std::string topic = flatten_newlines(trim(question.title));
    const auto content = trim(question.content);
    if (!content.empty()) {
        topic += " — ";
        topic += flatten_newlines(content);
    }
    return topic;
}

std::string render_opinion_prompt(const Question& question, ConflictMode mode, int n) {
    std::string prompt = "Generate " + number_word(n) + " opinions for the topic of " + topic_text(question);
    prompt += mode == ConflictMode::WithConflict ? " which have a conflict" : " which do not have a conflict";
    return prompt;
}

std::string format_opinion_lines(const std::vector<std::string>& opinions) {
    std::string out;
    for (std::size_t k = 0; k < opinions.size(); ++k) {
        if (k) out += '\n';
        out += "Opinion " + std::to_string(k + 1) + ": " + flatten_newlines(opinions[k]);
    }
    return out;
}

std::string render_candidate_prompt(const OpinionSet& opinions) {
    if (opinions.opinions.empty()) throw Error(ErrorCode::EmptyOpinions, "no opinions to agree on");
    return std::string(kCandidatePromptHeader) + "\n" + format_opinion_lines(opinions.opinions);
}

namespace {

// Length of the item marker at the start of `line` (after leading blanks),
// or 0 when the line does not start an item.
std::size_t marker_length(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;

    auto followed_by_space = [&](std::size_t pos) {
        return pos >= line.size() || line[pos] == ' ' || line[pos] == '\t';
    };

    if (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i < line.size() && (line[i] == '.' || line[i] == ')') && followed_by_space(i + 1)) return i + 1;
        return 0;
    }

    constexpr std::string_view kOpinion = "opinion";
    if (line.size() - start <= kOpinion.size()) return 0;
    for (std::size_t k = 0; k < kOpinion.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(line[start + k])) != kOpinion[k]) return 0;
    }
    i = start + kOpinion.size();
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits || i >= line.size() || line[i] != ':') return 0;
    return i + 1;
}

}  // namespace

std::vector<std::string> parse_enumerated_list(std::string_view raw, std::size_t expected_n) {
    std::vector<std::string> items;
    bool started = false;
    for (const auto& line : split_lines(raw)) {
        if (const auto m = marker_length(line); m > 0) {
            items.emplace_back(trim(std::string_view(line).substr(m)));
            started = true;
        } else if (started && !is_blank(line)) {
            auto& cur = items.back();
            if (!cur.empty()) cur += ' ';
            cur += trim(line);
        }
    }
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (items[k].empty()) throw Error(ErrorCode::EmptyItem, "item " + std::to_string(k + 1) + " is empty");
    }
    if (items.size() != expected_n) {
        throw Error(ErrorCode::CountMismatch,
                    "expected " + std::to_string(expected_n) + " items, found " + std::to_string(items.size()));
    }
    return items;
}

OpinionSet generate_opinions(CompletionClient& client, const Question& question, ConflictMode mode,
                             const GenerationConfig& cfg) {
    cfg.validate();
    CompletionRequest request{render_opinion_prompt(question, mode, cfg.n_opinions), cfg.decoding_params, ""};

    for (int attempt = 0;; ++attempt) {
        request.nonce = attempt == 0 ? "" : "opinions-retry-" + std::to_string(attempt);
        const auto raw = client.complete(request);
        try {
            auto items = parse_enumerated_list(raw, static_cast<std::size_t>(cfg.n_opinions));
            return OpinionSet{question.id, mode, std::move(items)};
        } catch (const Error& e) {
            const bool parse_error = e.code() == ErrorCode::CountMismatch || e.code() == ErrorCode::EmptyItem;
            if (!parse_error || attempt >= cfg.retry_limit) {
                throw Error(e.code(), "question '" + question.id + "': " + e.detail());
            }
        }
    }
}

CandidateSet generate_candidates(CompletionClient& client, const Question& question,
                                 const OpinionSet& opinions, const GenerationConfig& cfg) {
    cfg.validate();
    if (opinions.question_id != question.id) {
        throw Error(ErrorCode::SchemaViolation, "opinion set belongs to '" + opinions.question_id + "'");
    }
    const auto prompt = render_candidate_prompt(opinions);
    const auto m = static_cast<std::size_t>(cfg.m_candidates);

    auto candidates = parallel_map<std::string>(m, cfg.max_concurrency, [&](std::size_t j) {
        CompletionRequest request{prompt, cfg.decoding_params, "candidate-" + std::to_string(j)};
        return std::string(trim(client.complete(request)));
    });
    return CandidateSet{question.id, opinions.conflict_mode, std::move(candidates)};
}

}  // namespace agora
