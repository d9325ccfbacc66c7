#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace agora {

class ContentCache;

/// Backend decoding controls, e.g. {"temperature": 0.7, "max_tokens": 512}.
/// Sorted by key so serialized requests are stable.
using DecodingParams = std::map<std::string, double>;

DecodingParams default_decoding_params();

/// JSON view of the params; integral values are emitted as integers.
nlohmann::ordered_json params_to_json(const DecodingParams& params);

struct CompletionRequest {
    std::string prompt;
    DecodingParams params;
    /// Distinguishes otherwise identical requests that must be answered
    /// independently. Never sent over the wire; part of the cache key.
    std::string nonce;
};

/// A text-generation provider. Implementations throw Error(BackendTransient)
/// for failures worth retrying and Error(BackendUnavailable) otherwise.
/// complete() may be called concurrently.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string provider_id() const = 0;
    virtual std::string model() const = 0;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Deterministic offline backend.
///
/// Prompts found in the canned table are answered verbatim. Any other
/// prompt is answered by a generator seeded from (seed, prompt, nonce):
/// opinion prompts get an enumerated list of the requested length whose
/// wording depends on the conflict mode, agreement prompts get a statement
/// stitched from the listed opinions, and anything else gets word salad.
class MockBackend final : public TextBackend {
public:
    explicit MockBackend(std::uint64_t seed, std::string model = "mock-v1");

    /// Loads every *.json (array of records) and *.jsonl file in `dir`;
    /// records are objects {"prompt": ..., "completion": ...}.
    void load_canned_dir(const std::filesystem::path& dir);
    void add_canned(std::string prompt, std::string completion);

    std::string provider_id() const override { return "mock"; }
    std::string model() const override { return model_; }
    std::string complete(const CompletionRequest& request) override;

private:
    std::uint64_t seed_;
    std::string model_;
    std::unordered_map<std::string, std::string> canned_;
};

/// Wraps a backend with the content cache and the retry policy, and counts
/// traffic so callers can verify cache behaviour.
class CompletionClient {
public:
    CompletionClient(TextBackend& backend, ContentCache* cache, int retry_limit);

    /// Cached completion for the request; on a miss the backend is tried
    /// up to 1 + retry_limit times on transient failures. The trimmed
    /// result must be non-empty (EmptyCompletion otherwise). Throws
    /// BackendUnavailable once retries are exhausted.
    std::string complete(const CompletionRequest& request);

    std::string cache_key(const CompletionRequest& request) const;

    TextBackend& backend() { return backend_; }
    int retry_limit() const { return retry_limit_; }
    std::size_t backend_calls() const { return backend_calls_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }

private:
    TextBackend& backend_;
    ContentCache* cache_;
    int retry_limit_;
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace agora
