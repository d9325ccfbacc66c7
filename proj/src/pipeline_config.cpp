#include <algorithm>
#include <filesystem>
#include <set>

#include "agora/error.hpp"
#include "agora/pipeline.hpp"
#include "agora/text.hpp"

namespace agora {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const char* where) {
    if (!obj.is_object()) config_error(std::string(where) + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!keys.count(key)) config_error(std::string(where) + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out, const char* where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        config_error(std::string(where) + "." + key + " has the wrong type");
    }
}

std::string conflict_setting(const std::vector<ConflictMode>& modes) {
    if (modes.size() == 2) return "both";
    return modes.front() == ConflictMode::WithConflict ? "with" : "without";
}

}  // namespace

std::vector<ConflictMode> parse_conflict_setting(std::string_view s) {
    if (s == "both") return {ConflictMode::WithoutConflict, ConflictMode::WithConflict};
    if (s == "with") return {ConflictMode::WithConflict};
    if (s == "without") return {ConflictMode::WithoutConflict};
    config_error("conflict must be with, without or both (got \"" + std::string(s) + "\")");
}

std::vector<SelectionPolicy::Kind> parse_policy_setting(std::string_view s) {
    if (s == "both") return {SelectionPolicy::Kind::Random, SelectionPolicy::Kind::Optimal};
    if (s == "optimal") return {SelectionPolicy::Kind::Optimal};
    if (s == "random") return {SelectionPolicy::Kind::Random};
    config_error("policy must be optimal, random or both (got \"" + std::string(s) + "\")");
}

void RunConfig::validate() const {
    if (corpus_path.empty()) config_error("corpus path is required");
    if (format_tag != "csv" && format_tag != "tsv") config_error("corpus format must be csv or tsv");
    if (split.n_train == 0 || split.n_test == 0) config_error("split.n_train and split.n_test must be positive");
    generation.validate();
    if (backend.kind != "mock" && backend.kind != "http") config_error("backend.kind must be mock or http");
    if (backend.model.empty()) config_error("backend.model is required");
    if (embedder.kind != "hashing" && embedder.kind != "http") config_error("embedder.kind must be hashing or http");
    if (embedder.kind == "hashing" && embedder.dimension == 0) config_error("embedder.dimension must be positive");
    if (embedder.kind == "http" && embedder.model.empty()) config_error("embedder.model is required for http");
    if (conflict_modes.empty()) config_error("at least one conflict mode is required");
    if (policies.empty()) config_error("at least one selection policy is required");
    if (cache_dir.empty() || output_dir.empty()) config_error("cache and output directories are required");

    namespace fs = std::filesystem;
    if (fs::weakly_canonical(fs::absolute(cache_dir)) == fs::weakly_canonical(fs::absolute(output_dir))) {
        config_error("cache and output directories must differ");
    }
}

std::vector<CaseId> RunConfig::cases() const {
    std::vector<CaseId> out;
    for (auto id : kAllCases) {
        const bool mode_on = std::find(conflict_modes.begin(), conflict_modes.end(), conflict_mode_of(id)) !=
                             conflict_modes.end();
        const bool policy_on = std::find(policies.begin(), policies.end(), policy_kind_of(id)) != policies.end();
        if (mode_on && policy_on) out.push_back(id);
    }
    return out;
}

nlohmann::ordered_json RunConfig::content_snapshot() const {
    nlohmann::ordered_json j;
    j["corpus"] = {{"format", format_tag}};
    j["split"] = {{"n_train", split.n_train}, {"n_test", split.n_test}, {"seed", split.seed}};
    nlohmann::ordered_json gen;
    gen["n_opinions"] = generation.n_opinions;
    gen["m_candidates"] = generation.m_candidates;
    gen["decoding_params"] = params_to_json(generation.decoding_params);
    gen["retry_limit"] = generation.retry_limit;
    j["generation"] = gen;
    j["backend"] = {{"kind", backend.kind}, {"model", backend.model}, {"canned_dir", backend.canned_dir}};
    j["embedder"] = {{"kind", embedder.kind}, {"model", embedder.model}, {"dimension", embedder.dimension}};
    j["seed"] = seed;
    j["conflict"] = conflict_setting(conflict_modes);
    auto pol = nlohmann::ordered_json::array();
    for (auto p : policies) pol.push_back(p == SelectionPolicy::Kind::Optimal ? "optimal" : "random");
    j["policies"] = pol;
    return j;
}

nlohmann::ordered_json RunConfig::to_json() const {
    auto j = content_snapshot();
    j["corpus"] = {{"path", corpus_path}, {"format", format_tag}};
    j["generation"]["max_concurrency"] = generation.max_concurrency;
    j["cache_dir"] = cache_dir;
    j["output_dir"] = output_dir;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"corpus", "split", "generation", "backend", "embedder", "seed", "conflict", "policies",
                            "cache_dir", "output_dir"},
                        "config");
    RunConfig c;
    if (j.contains("corpus")) {
        const auto& o = j["corpus"];
        reject_unknown_keys(o, {"path", "format"}, "corpus");
        read_opt(o, "path", c.corpus_path, "corpus");
        read_opt(o, "format", c.format_tag, "corpus");
    }
    read_opt(j, "seed", c.seed, "config");
    c.split.seed = c.seed;
    if (j.contains("split")) {
        const auto& o = j["split"];
        reject_unknown_keys(o, {"n_train", "n_test", "seed"}, "split");
        read_opt(o, "n_train", c.split.n_train, "split");
        read_opt(o, "n_test", c.split.n_test, "split");
        read_opt(o, "seed", c.split.seed, "split");
    }
    if (j.contains("generation")) {
        const auto& o = j["generation"];
        reject_unknown_keys(o, {"n_opinions", "m_candidates", "decoding_params", "max_concurrency", "retry_limit"},
                            "generation");
        read_opt(o, "n_opinions", c.generation.n_opinions, "generation");
        read_opt(o, "m_candidates", c.generation.m_candidates, "generation");
        read_opt(o, "decoding_params", c.generation.decoding_params, "generation");
        read_opt(o, "max_concurrency", c.generation.max_concurrency, "generation");
        read_opt(o, "retry_limit", c.generation.retry_limit, "generation");
    }
    if (j.contains("backend")) {
        const auto& o = j["backend"];
        reject_unknown_keys(o, {"kind", "model", "canned_dir"}, "backend");
        read_opt(o, "kind", c.backend.kind, "backend");
        read_opt(o, "model", c.backend.model, "backend");
        read_opt(o, "canned_dir", c.backend.canned_dir, "backend");
    }
    if (j.contains("embedder")) {
        const auto& o = j["embedder"];
        reject_unknown_keys(o, {"kind", "model", "dimension"}, "embedder");
        read_opt(o, "kind", c.embedder.kind, "embedder");
        read_opt(o, "model", c.embedder.model, "embedder");
        read_opt(o, "dimension", c.embedder.dimension, "embedder");
    }
    if (j.contains("conflict")) {
        std::string s;
        read_opt(j, "conflict", s, "config");
        c.conflict_modes = parse_conflict_setting(s);
    }
    if (j.contains("policies")) {
        std::vector<std::string> names;
        read_opt(j, "policies", names, "config");
        c.policies.clear();
        for (const auto& n : names) {
            for (auto k : parse_policy_setting(n)) {
                if (std::find(c.policies.begin(), c.policies.end(), k) == c.policies.end()) c.policies.push_back(k);
            }
        }
    }
    read_opt(j, "cache_dir", c.cache_dir, "config");
    read_opt(j, "output_dir", c.output_dir, "config");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) config_error("config file not found: " + path);
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        config_error(path + ": " + e.what());
    }
}

}  // namespace agora
