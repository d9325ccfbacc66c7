#include "agora/backend.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "agora/cache.hpp"
#include "agora/error.hpp"
#include "agora/generation.hpp"
#include "agora/random.hpp"
#include "agora/text.hpp"

namespace agora {

DecodingParams default_decoding_params() {
    return {{"max_tokens", 512}, {"temperature", 0.7}};
}

nlohmann::ordered_json params_to_json(const DecodingParams& params) {
    auto out = nlohmann::ordered_json::object();
    for (const auto& [name, value] : params) {
        if (std::isfinite(value) && value == std::trunc(value) && std::fabs(value) < 9.0e15) {
            out[name] = static_cast<long long>(value);
        } else {
            out[name] = value;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// MockBackend

namespace {

using WordList = std::vector<std::string_view>;

const WordList kSharedStance = {"balanced", "moderation", "evidence", "sensible", "practical", "informed",
                                "careful",  "benefit",    "common",   "shared",   "reasonable", "healthy"};

// One vocabulary per dissenting voice; opinion k in conflict mode draws from
// pool k modulo the number of pools.
const std::vector<WordList> kConflictPools = {
    {"strongly", "support", "favor", "embrace", "essential", "progress", "positive", "encourage"},
    {"oppose", "reject", "harmful", "dangerous", "against", "ban", "risky", "negative"},
    {"uncertain", "depends", "context", "tradeoff", "nuanced", "unclear", "mixed", "situational"},
    {"costly", "expensive", "budget", "economic", "price", "afford", "money", "market"},
    {"tradition", "history", "culture", "heritage", "custom", "ancestors", "ritual", "legacy"},
};

const WordList kFiller = {"people", "should", "consider", "because", "often", "important", "many", "think",
                          "always", "believe", "matter", "every"};

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            if (cur.size() >= 3) words.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 3) words.push_back(cur);
    return words;
}

template <typename List>
std::string pick(Rng& rng, const List& list) {
    return std::string(list[static_cast<std::size_t>(rng.below(list.size()))]);
}

std::string sentence(std::vector<std::string> words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out + ".";
}

std::optional<int> parse_count_word(std::string_view w) {
    for (int n = 1; n <= 10; ++n) {
        if (w == number_word(n)) return n;
    }
    int n = 0;
    for (char c : w) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        n = n * 10 + (c - '0');
        if (n > 1000) return std::nullopt;
    }
    return w.empty() ? std::nullopt : std::optional<int>(n);
}

struct OpinionPromptParts {
    int n;
    std::string topic;
    ConflictMode mode;
};

std::optional<OpinionPromptParts> parse_opinion_prompt(std::string_view prompt) {
    constexpr std::string_view kHead = "Generate ";
    constexpr std::string_view kMid = " opinions for the topic of ";
    constexpr std::string_view kNoConflict = " which do not have a conflict";
    constexpr std::string_view kConflict = " which have a conflict";
    if (!prompt.starts_with(kHead)) return std::nullopt;
    const auto mid = prompt.find(kMid);
    if (mid == std::string_view::npos) return std::nullopt;
    const auto count = parse_count_word(prompt.substr(kHead.size(), mid - kHead.size()));
    if (!count || *count < 1) return std::nullopt;

    auto rest = prompt.substr(mid + kMid.size());
    ConflictMode mode;
    if (rest.ends_with(kNoConflict)) {
        mode = ConflictMode::WithoutConflict;
        rest.remove_suffix(kNoConflict.size());
    } else if (rest.ends_with(kConflict)) {
        mode = ConflictMode::WithConflict;
        rest.remove_suffix(kConflict.size());
    } else {
        return std::nullopt;
    }
    return OpinionPromptParts{*count, std::string(rest), mode};
}

std::string mock_opinions(Rng& rng, const OpinionPromptParts& parts) {
    auto topic_words = words_of(parts.topic);
    if (topic_words.empty()) topic_words.emplace_back("topic");

    std::string out;
    for (int k = 0; k < parts.n; ++k) {
        const auto length = 10 + rng.below(5);
        std::vector<std::string> words;
        for (std::uint64_t w = 0; w < length; ++w) {
            const double roll = rng.unit();
            if (roll < 0.3) {
                words.push_back(pick(rng, topic_words));
            } else if (roll < 0.85) {
                words.push_back(parts.mode == ConflictMode::WithConflict
                                    ? pick(rng, kConflictPools[static_cast<std::size_t>(k) % kConflictPools.size()])
                                    : pick(rng, kSharedStance));
            } else {
                words.push_back(pick(rng, kFiller));
            }
        }
        out += std::to_string(k + 1) + ". " + sentence(std::move(words)) + "\n";
    }
    return out;
}

std::string mock_agreement(Rng& rng, std::string_view prompt) {
    std::vector<std::string> pool;
    for (const auto& line : split_lines(prompt)) {
        if (!line.starts_with("Opinion ")) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        for (auto& w : words_of(std::string_view(line).substr(colon + 1))) pool.push_back(std::move(w));
    }
    if (pool.empty()) pool = words_of(prompt);
    if (pool.empty()) pool.emplace_back("agreement");

    std::vector<std::string> words = {"all", "opinions", "agree", "that"};
    const auto length = 12 + rng.below(9);
    for (std::uint64_t w = 0; w < length; ++w) words.push_back(pick(rng, pool));
    return sentence(std::move(words));
}

std::string mock_salad(Rng& rng, std::string_view prompt) {
    auto pool = words_of(prompt);
    if (pool.empty()) pool.emplace_back("response");
    std::vector<std::string> words;
    const auto length = 8 + rng.below(8);
    for (std::uint64_t w = 0; w < length; ++w) words.push_back(pick(rng, pool));
    return sentence(std::move(words));
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, std::string model) : seed_(seed), model_(std::move(model)) {}

void MockBackend::add_canned(std::string prompt, std::string completion) {
    canned_.insert_or_assign(std::move(prompt), std::move(completion));
}

void MockBackend::load_canned_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "canned directory not found: " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    auto add_record = [&](const nlohmann::json& rec, const fs::path& file) {
        if (!rec.is_object() || !rec.contains("prompt") || !rec.contains("completion") || !rec["prompt"].is_string() ||
            !rec["completion"].is_string()) {
            throw Error(ErrorCode::SchemaViolation, file.string() + ": canned record needs prompt and completion");
        }
        add_canned(rec["prompt"].get<std::string>(), rec["completion"].get<std::string>());
    };

    for (const auto& file : files) {
        const auto text = read_file(file.string());
        try {
            if (file.extension() == ".jsonl") {
                for (const auto& line : split_lines(text)) {
                    if (!is_blank(line)) add_record(nlohmann::json::parse(line), file);
                }
            } else {
                const auto doc = nlohmann::json::parse(text);
                if (!doc.is_array()) throw Error(ErrorCode::SchemaViolation, file.string() + ": expected an array");
                for (const auto& rec : doc) add_record(rec, file);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::SchemaViolation, file.string() + ": " + e.what());
        }
    }
}

std::string MockBackend::complete(const CompletionRequest& request) {
    if (const auto it = canned_.find(request.prompt); it != canned_.end()) return it->second;

    Rng rng(derive_seed(seed_, request.prompt + '\x1f' + request.nonce));
    if (const auto parts = parse_opinion_prompt(request.prompt)) return mock_opinions(rng, *parts);
    if (request.prompt.starts_with(kCandidatePromptHeader)) return mock_agreement(rng, request.prompt);
    return mock_salad(rng, request.prompt);
}

// ---------------------------------------------------------------------------
// CompletionClient

CompletionClient::CompletionClient(TextBackend& backend, ContentCache* cache, int retry_limit)
    : backend_(backend), cache_(cache), retry_limit_(retry_limit) {
    if (retry_limit < 0) throw Error(ErrorCode::ConfigError, "retry_limit must be >= 0");
}

std::string CompletionClient::cache_key(const CompletionRequest& request) const {
    nlohmann::ordered_json key;
    key["kind"] = "completion";
    key["provider"] = backend_.provider_id();
    key["model"] = backend_.model();
    key["prompt"] = request.prompt;
    key["params"] = params_to_json(request.params);
    key["nonce"] = request.nonce;
    return ContentCache::make_key(key);
}

std::string CompletionClient::complete(const CompletionRequest& request) {
    std::string key;
    if (cache_) {
        key = cache_key(request);
        if (auto hit = cache_->lookup(key)) {
            ++cache_hits_;
            return *hit;
        }
    }

    std::string result;
    for (int attempt = 0;; ++attempt) {
        ++backend_calls_;
        try {
            result = backend_.complete(request);
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BackendTransient) throw;
            if (attempt >= retry_limit_) {
                throw Error(ErrorCode::BackendUnavailable,
                            "gave up after " + std::to_string(attempt + 1) + " attempts: " + e.detail());
            }
        }
    }

    if (is_blank(result)) throw Error(ErrorCode::EmptyCompletion, "backend returned blank text");
    if (cache_) cache_->store(key, result);
    return result;
}

}  // namespace agora
