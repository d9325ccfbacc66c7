#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "agora/error.hpp"

namespace fixtures {

/// Code of the agora::Error thrown by fn, or nullopt if it returns.
template <typename Fn>
std::optional<agora::ErrorCode> error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const agora::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "agora") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = "") const { return rel.empty() ? path_.string() : (path_ / rel).string(); }

private:
    std::filesystem::path path_;
};

inline void write(const std::filesystem::path& p, const std::string& contents) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << contents;
}

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "apple",  "banana", "river",  "mountain", "policy", "health", "school",  "market", "energy",  "climate",
        "city",   "rural",  "tax",    "price",    "family", "child",  "teacher", "doctor", "nurse",   "engine",
        "solar",  "wind",   "ocean",  "forest",   "budget", "vote",   "law",     "court",  "phone",   "screen",
        "sleep",  "coffee", "tea",    "sugar",    "fat",    "salt",   "trail",   "bike",   "car",     "train",
        "house",  "rent",   "wage",   "job",      "robot",  "data",   "privacy", "music",  "film",    "book",
        "garden", "water",  "food",   "travel",   "museum", "park",   "sport",   "team",   "game",    "history"};
    return words;
}

/// Random text of [min_words, max_words] vocabulary words.
inline std::string word_salad(std::mt19937_64& rng, int min_words = 2, int max_words = 9) {
    const auto& v = vocabulary();
    const int n = min_words + static_cast<int>(rng() % static_cast<std::uint64_t>(max_words - min_words + 1));
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += v[rng() % v.size()];
    }
    return out;
}

/// CSV corpus of n questions with ids q0..q{n-1} and labels 0..9.
inline std::string synthetic_corpus_csv(std::size_t n, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += "q" + std::to_string(i) + "," + std::to_string(i % 10) + ",\"Why " + word_salad(rng, 3, 6) +
               "?\",\"" + (i % 3 == 0 ? std::string() : word_salad(rng, 2, 5)) + "\"\n";
    }
    return out;
}

}  // namespace fixtures
