#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "agora/backend.hpp"
#include "agora/scoring.hpp"

namespace agora {

/// Environment variables consulted for HTTP providers. Keys and URLs are
/// never taken from flags or config files.
inline constexpr const char* kLlmBaseUrlEnv = "AGORA_LLM_BASE_URL";
inline constexpr const char* kLlmApiKeyEnv = "AGORA_LLM_API_KEY";
inline constexpr const char* kEmbedBaseUrlEnv = "AGORA_EMBED_BASE_URL";
inline constexpr const char* kEmbedApiKeyEnv = "AGORA_EMBED_API_KEY";

/// "scheme://host[:port]" plus an optional path prefix, e.g.
/// "http://localhost:8080/proxy" -> {"http://localhost:8080", "/proxy"}.
struct HttpEndpoint {
    std::string origin;
    std::string path_prefix;
    std::string api_key;

    static HttpEndpoint parse(const std::string& base_url, std::string api_key);
};

/// OpenAI-compatible chat completions: POST {base}/v1/chat/completions
/// with one user message; the first choice's message content is the
/// completion. 429, 5xx and transport errors are transient.
class HttpChatBackend final : public TextBackend {
public:
    HttpChatBackend(HttpEndpoint endpoint, std::string model,
                    std::chrono::seconds timeout = std::chrono::seconds(120));

    /// Reads AGORA_LLM_BASE_URL / AGORA_LLM_API_KEY; ConfigError if the URL is unset.
    static std::unique_ptr<HttpChatBackend> from_env(std::string model);

    std::string provider_id() const override { return "http"; }
    std::string model() const override { return model_; }
    std::string complete(const CompletionRequest& request) override;

private:
    HttpEndpoint endpoint_;
    std::string model_;
    std::chrono::seconds timeout_;
};

/// OpenAI-compatible embeddings: POST {base}/v1/embeddings with
/// {"model", "input": [text]}; data[0].embedding is normalized on receipt.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(HttpEndpoint endpoint, std::string model, int retry_limit = 2,
                 std::chrono::seconds timeout = std::chrono::seconds(60));

    /// Reads AGORA_EMBED_BASE_URL / AGORA_EMBED_API_KEY, falling back to
    /// the LLM variables.
    static std::unique_ptr<HttpEmbedder> from_env(std::string model, int retry_limit);

    std::string id() const override { return "http:" + model_; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    HttpEndpoint endpoint_;
    std::string model_;
    int retry_limit_;
    std::chrono::seconds timeout_;
};

}  // namespace agora
