#include "agora/remote.hpp"

#include <cstdlib>

#include <httplib.h>

#include "agora/error.hpp"
#include "agora/text.hpp"

namespace agora {

namespace {

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

struct HttpReply {
    int status = 0;
    std::string body;
};

// Transport failures and retryable statuses come back as BackendTransient.
HttpReply post_json(const HttpEndpoint& ep, const std::string& path, const std::string& body,
                    std::chrono::seconds timeout) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);

    const auto res = client.Post(ep.path_prefix + path, headers, body, "application/json");
    if (!res) {
        throw Error(ErrorCode::BackendTransient, ep.origin + path + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw Error(ErrorCode::BackendTransient, ep.origin + path + ": HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::BackendUnavailable,
                    ep.origin + path + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 200));
    }
    return {res->status, res->body};
}

}  // namespace

HttpEndpoint HttpEndpoint::parse(const std::string& base_url, std::string api_key) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos || base_url.empty()) {
        throw Error(ErrorCode::ConfigError, "base URL '" + base_url + "' lacks a scheme");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    HttpEndpoint ep;
    ep.origin = base_url.substr(0, path_start);
    if (path_start != std::string::npos) {
        ep.path_prefix = base_url.substr(path_start);
        while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
    }
    ep.api_key = std::move(api_key);
    return ep;
}

// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint, std::string model, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_(timeout) {}

std::unique_ptr<HttpChatBackend> HttpChatBackend::from_env(std::string model) {
    const auto base = env_or_empty(kLlmBaseUrlEnv);
    if (base.empty()) throw Error(ErrorCode::ConfigError, std::string(kLlmBaseUrlEnv) + " is not set");
    return std::make_unique<HttpChatBackend>(HttpEndpoint::parse(base, env_or_empty(kLlmApiKeyEnv)),
                                             std::move(model));
}

std::string HttpChatBackend::complete(const CompletionRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = model_;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});
    const auto params = params_to_json(request.params);
    for (const auto& [name, value] : params.items()) body[name] = value;

    const auto reply = post_json(endpoint_, "/v1/chat/completions", body.dump(), timeout_);
    try {
        const auto doc = nlohmann::json::parse(reply.body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("malformed chat completion response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint, std::string model, int retry_limit, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), retry_limit_(retry_limit), timeout_(timeout) {}

std::unique_ptr<HttpEmbedder> HttpEmbedder::from_env(std::string model, int retry_limit) {
    auto base = env_or_empty(kEmbedBaseUrlEnv);
    auto key = env_or_empty(kEmbedApiKeyEnv);
    if (base.empty()) base = env_or_empty(kLlmBaseUrlEnv);
    if (key.empty()) key = env_or_empty(kLlmApiKeyEnv);
    if (base.empty()) throw Error(ErrorCode::ConfigError, std::string(kEmbedBaseUrlEnv) + " is not set");
    return std::make_unique<HttpEmbedder>(HttpEndpoint::parse(base, std::move(key)), std::move(model), retry_limit);
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
    if (is_blank(text)) throw Error(ErrorCode::EmptyText, "blank text");
    nlohmann::ordered_json body;
    body["model"] = model_;
    body["input"] = nlohmann::ordered_json::array({std::string(text)});
    const auto payload = body.dump();

    for (int attempt = 0;; ++attempt) {
        try {
            const auto reply = post_json(endpoint_, "/v1/embeddings", payload, timeout_);
            std::vector<double> raw;
            try {
                raw = nlohmann::json::parse(reply.body).at("data").at(0).at("embedding").get<std::vector<double>>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::BackendUnavailable, std::string("malformed embeddings response: ") + e.what());
            }
            try {
                return EmbeddingVector::from_raw(std::move(raw));
            } catch (const Error& e) {
                throw Error(ErrorCode::BackendUnavailable, "unusable embedding: " + e.detail());
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BackendTransient) throw;
            if (attempt >= retry_limit_) {
                throw Error(ErrorCode::BackendUnavailable,
                            "gave up after " + std::to_string(attempt + 1) + " attempts: " + e.detail());
            }
        }
    }
}

}  // namespace agora
