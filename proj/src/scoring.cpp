#include "agora/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "agora/cache.hpp"
#include "agora/error.hpp"
#include "agora/hash.hpp"
#include "agora/text.hpp"

namespace agora {

EmbeddingVector EmbeddingVector::from_raw(std::vector<double> raw) {
    if (raw.empty()) throw Error(ErrorCode::SchemaViolation, "embedding has no dimensions");
    double sq = 0.0;
    for (double x : raw) {
        if (!std::isfinite(x)) throw Error(ErrorCode::SchemaViolation, "embedding has a non-finite entry");
        sq += x * x;
    }
    if (sq == 0.0) throw Error(ErrorCode::EmptyText, "embedding is the zero vector");
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : raw) x *= inv;
    return EmbeddingVector(std::move(raw));
}

EmbeddingVector EmbeddingVector::from_normalized(std::vector<double> values) {
    double sq = 0.0;
    for (double x : values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::SchemaViolation, "embedding has a non-finite entry");
        sq += x * x;
    }
    if (values.empty() || std::fabs(std::sqrt(sq) - 1.0) > 1e-6) {
        throw Error(ErrorCode::SchemaViolation, "embedding is not unit length");
    }
    return EmbeddingVector(std::move(values));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const auto& x = a.values();
    const auto& y = b.values();
    if (x.size() != y.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
}

// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw Error(ErrorCode::ConfigError, "hashing embedder dimension must be positive");
}

std::string HashingEmbedder::id() const { return "hashing-fnv1a64-d" + std::to_string(dimension_); }

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (u >= 'A' && u <= 'Z') {
            cur.push_back(static_cast<char>(u - 'A' + 'a'));
        } else if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u >= 0x80) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, "no tokens in text");

    std::vector<double> acc(dimension_, 0.0);
    bool any_nonzero = false;
    for (const auto& tok : tokens) {
        const auto h = fnv1a64(tok);
        acc[h % dimension_] += (h >> 63) == 0 ? 1.0 : -1.0;
    }
    for (double x : acc) any_nonzero = any_nonzero || x != 0.0;
    if (!any_nonzero) {
        // Signs cancelled exactly (e.g. two colliding tokens of opposite
        // sign); fall back to unsigned bucket counts.
        for (const auto& tok : tokens) acc[fnv1a64(tok) % dimension_] += 1.0;
    }
    return EmbeddingVector::from_raw(std::move(acc));
}

EmbeddingVector CachedEmbedder::embed(std::string_view text) const {
    nlohmann::ordered_json request;
    request["kind"] = "embedding";
    request["embedder"] = inner_.id();
    request["text"] = std::string(text);
    const auto key = ContentCache::make_key(request);

    if (auto hit = cache_.lookup(key)) {
        try {
            return EmbeddingVector::from_normalized(nlohmann::json::parse(*hit).get<std::vector<double>>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::CacheCorrupt, "embedding entry " + key + ": " + e.what());
        }
    }
    auto vec = inner_.embed(text);
    cache_.store(key, nlohmann::json(vec.values()).dump());
    return vec;
}

// ---------------------------------------------------------------------------

MatScore::MatScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) throw std::out_of_range("MatScore outside [0, 1]");
}

MatScore mat_from_cosine(double cos) { return MatScore(std::clamp((1.0 + cos) / 2.0, 0.0, 1.0)); }

namespace {

EmbeddingVector embed_checked(const Embedder& embedder, std::string_view text) {
    if (is_blank(text)) throw Error(ErrorCode::EmptyText, "blank text");
    return embedder.embed(text);
}

std::vector<EmbeddingVector> embed_all(const Embedder& embedder, const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_checked(embedder, t));
    return out;
}

}  // namespace

MatScore mat_score(const Embedder& embedder, std::string_view opinion, std::string_view candidate) {
    return mat_from_cosine(cosine(embed_checked(embedder, opinion), embed_checked(embedder, candidate)));
}

double aggregate_score(const Embedder& embedder, const OpinionSet& opinions, std::string_view candidate) {
    if (opinions.opinions.empty()) throw Error(ErrorCode::EmptyOpinions, "no opinions");
    const auto cand = embed_checked(embedder, candidate);
    double total = 0.0;
    for (const auto& op : opinions.opinions) {
        total += mat_from_cosine(cosine(embed_checked(embedder, op), cand)).value();
    }
    return total;
}

SelectionResult select_best(const Embedder& embedder, const std::vector<std::string>& opinions,
                            const std::vector<std::string>& candidates) {
    if (opinions.empty()) throw Error(ErrorCode::EmptyOpinions, "no opinions");
    if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates");

    const auto op_vecs = embed_all(embedder, opinions);
    const auto cand_vecs = embed_all(embedder, candidates);

    SelectionResult result;
    result.score_matrix.assign(op_vecs.size(), std::vector<MatScore>(cand_vecs.size()));
    for (std::size_t k = 0; k < op_vecs.size(); ++k) {
        for (std::size_t j = 0; j < cand_vecs.size(); ++j) {
            result.score_matrix[k][j] = mat_from_cosine(cosine(op_vecs[k], cand_vecs[j]));
        }
    }

    result.per_candidate_totals.assign(cand_vecs.size(), 0.0);
    for (std::size_t j = 0; j < cand_vecs.size(); ++j) {
        double total = 0.0;
        for (std::size_t k = 0; k < op_vecs.size(); ++k) total += result.score_matrix[k][j].value();
        result.per_candidate_totals[j] = total;
    }

    // Strict comparison keeps the lowest index among ties.
    for (std::size_t j = 1; j < cand_vecs.size(); ++j) {
        if (result.per_candidate_totals[j] > result.per_candidate_totals[result.best_index]) result.best_index = j;
    }
    return result;
}

SelectionResult select_best(const Embedder& embedder, const ConsensusInstance& instance) {
    instance.validate();
    return select_best(embedder, instance.opinions.opinions, instance.candidates.candidates);
}

}  // namespace agora
