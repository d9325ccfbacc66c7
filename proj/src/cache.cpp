#include "agora/cache.hpp"

#include "agora/error.hpp"
#include "agora/hash.hpp"
#include "agora/text.hpp"

namespace agora {

namespace fs = std::filesystem;

ContentCache::ContentCache(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create cache directory " + root_.string());
}

fs::path ContentCache::entry_path(const std::string& key) const {
    return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ContentCache::lookup(const std::string& key) const {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;

    nlohmann::json entry;
    try {
        entry = nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.what());
    }
    if (!entry.is_object() || !entry.contains("key") || !entry.contains("value") || !entry.contains("sha256") ||
        !entry["value"].is_string()) {
        throw Error(ErrorCode::CacheCorrupt, path.string() + ": missing fields");
    }
    auto value = entry["value"].get<std::string>();
    if (entry["key"] != key || entry["sha256"] != sha256_hex(value)) {
        throw Error(ErrorCode::CacheCorrupt, path.string() + ": hash mismatch");
    }
    return value;
}

void ContentCache::store(const std::string& key, std::string_view value) {
    std::lock_guard lock(write_mutex_);
    const auto path = entry_path(key);
    std::error_code ec;
    if (fs::exists(path, ec)) return;

    nlohmann::ordered_json entry;
    entry["key"] = key;
    entry["value"] = std::string(value);
    entry["sha256"] = sha256_hex(value);
    write_file_atomic(path.string(), entry.dump(2) + "\n");
}

std::string ContentCache::make_key(const nlohmann::ordered_json& request) {
    return sha256_hex(request.dump());
}

}  // namespace agora
