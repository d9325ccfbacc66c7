#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "agora/generation.hpp"

namespace agora {

class ContentCache;

/// Unit-length embedding with finite entries.
class EmbeddingVector {
public:
    /// L2-normalizes `raw`. Throws SchemaViolation on non-finite entries or
    /// an empty vector, and EmptyText on a zero vector (nothing to compare).
    static EmbeddingVector from_raw(std::vector<double> raw);
    /// Adopts values that are already unit length (within 1e-6) without
    /// rescaling, so stored vectors come back bit-identical.
    static EmbeddingVector from_normalized(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t dimension() const { return values_.size(); }

    bool operator==(const EmbeddingVector&) const = default;

private:
    explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

/// Dot product accumulated in index order. Throws std::invalid_argument on
/// a dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Sentence-embedding provider. embed() must be deterministic per
/// (id(), text) and safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Signed feature hashing over lowercased alphanumeric tokens.
///
///   tokens  = maximal runs of [a-z0-9] after ASCII lowercasing; bytes
///             >= 0x80 count as token characters so UTF-8 words survive
///   h       = FNV-1a 64 of the token bytes
///   bucket  = h mod dim, sign = +1 if bit 63 of h is 0 else -1
///   vector  = per-bucket sum of signs, L2-normalized
///
/// If the signed sums cancel to the zero vector, unsigned per-bucket token
/// counts are used instead, so every text with at least one token embeds.
/// Texts with no tokens are rejected with EmptyText.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256);

    std::string id() const override;
    EmbeddingVector embed(std::string_view text) const override;

    static std::vector<std::string> tokenize(std::string_view text);

private:
    std::size_t dimension_;
};

/// Memoizes another embedder's vectors in the content cache.
class CachedEmbedder final : public Embedder {
public:
    CachedEmbedder(const Embedder& inner, ContentCache& cache) : inner_(inner), cache_(cache) {}

    std::string id() const override { return inner_.id(); }
    EmbeddingVector embed(std::string_view text) const override;

private:
    const Embedder& inner_;
    ContentCache& cache_;
};

/// Compatibility of one opinion with one agreement, in [0, 1].
class MatScore {
public:
    MatScore() = default;
    /// Throws std::out_of_range outside [0, 1].
    explicit MatScore(double value);
    double value() const { return value_; }
    auto operator<=>(const MatScore&) const = default;

private:
    double value_ = 0.0;
};

/// clamp((1 + cos) / 2, 0, 1).
MatScore mat_from_cosine(double cos);

/// Mat score of two texts; symmetric and equal to 1 for identical texts.
/// Throws EmptyText for blank input.
MatScore mat_score(const Embedder& embedder, std::string_view opinion, std::string_view candidate);

/// Sum of Mat(opinion_k, candidate) over the opinion set.
double aggregate_score(const Embedder& embedder, const OpinionSet& opinions, std::string_view candidate);

struct SelectionResult {
    /// per_candidate_totals[j] = sum over k of score_matrix[k][j].
    std::vector<double> per_candidate_totals;
    /// Indexed [opinion][candidate].
    std::vector<std::vector<MatScore>> score_matrix;
    /// Lowest index attaining the maximum total.
    std::size_t best_index = 0;
};

/// Full opinion x candidate score matrix and the argmax of the column sums.
/// Throws EmptyOpinions, EmptyCandidates or EmptyText.
SelectionResult select_best(const Embedder& embedder, const std::vector<std::string>& opinions,
                            const std::vector<std::string>& candidates);

SelectionResult select_best(const Embedder& embedder, const ConsensusInstance& instance);

}  // namespace agora
