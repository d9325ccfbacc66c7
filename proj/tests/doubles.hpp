#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "agora/backend.hpp"
#include "agora/error.hpp"

namespace doubles {

/// Answers from a script; each call pops the next entry. An entry of
/// "!transient" throws BackendTransient, "!down" throws BackendUnavailable.
class ScriptedBackend : public agora::TextBackend {
public:
    explicit ScriptedBackend(std::deque<std::string> script) : script_(std::move(script)) {}

    std::string provider_id() const override { return "scripted"; }
    std::string model() const override { return "script-1"; }

    std::string complete(const agora::CompletionRequest& request) override {
        std::lock_guard lock(mutex_);
        ++calls;
        requests.push_back(request);
        if (script_.empty()) throw agora::Error(agora::ErrorCode::BackendUnavailable, "script exhausted");
        auto next = script_.front();
        script_.pop_front();
        if (next == "!transient") throw agora::Error(agora::ErrorCode::BackendTransient, "simulated");
        if (next == "!down") throw agora::Error(agora::ErrorCode::BackendUnavailable, "simulated");
        return next;
    }

    int calls = 0;
    std::vector<agora::CompletionRequest> requests;

private:
    std::mutex mutex_;
    std::deque<std::string> script_;
};

/// Responds with a function of the request after a request-dependent delay,
/// so completion order differs from request order.
class JitterBackend : public agora::TextBackend {
public:
    explicit JitterBackend(std::function<std::string(const agora::CompletionRequest&)> fn) : fn_(std::move(fn)) {}

    std::string provider_id() const override { return "jitter"; }
    std::string model() const override { return "jitter-1"; }

    std::string complete(const agora::CompletionRequest& request) override {
        const auto delay = std::hash<std::string>{}(request.nonce + request.prompt) % 5;
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        return fn_(request);
    }

private:
    std::function<std::string(const agora::CompletionRequest&)> fn_;
};

}  // namespace doubles
