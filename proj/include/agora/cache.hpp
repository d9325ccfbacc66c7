#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace agora {

/// Content-addressed store for backend results.
///
/// Entries live at <root>/<key[0:2]>/<key>.json and record the key, the
/// value and the SHA-256 of the value. Lookups verify both; a mismatch is
/// reported as CacheCorrupt. Entries are immutable: storing under an
/// existing key leaves the first value in place. Writes are serialized in
/// process and land via atomic rename, so concurrent readers (including
/// other processes) see either nothing or a complete entry.
class ContentCache {
public:
    explicit ContentCache(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, std::string_view value);

    std::filesystem::path entry_path(const std::string& key) const;

    /// SHA-256 over the compact dump of a JSON description of a request.
    /// Callers put provider id, model, prompt or text, decoding parameters
    /// and any per-call nonce in `request`; ordered_json keeps the key
    /// independent of std::map iteration quirks.
    static std::string make_key(const nlohmann::ordered_json& request);

private:
    std::filesystem::path root_;
    std::mutex write_mutex_;
};

}  // namespace agora
