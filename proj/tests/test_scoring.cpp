#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "agora/cache.hpp"
#include "agora/error.hpp"
#include "agora/scoring.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace agora;
using fixtures::error_code_of;

// Frozen from tests/oracles/hashing_oracle.py.
namespace frozen {
constexpr double kInvSqrt2 = 0.7071067811865475;
constexpr double kMatAppleBananaVsCherry = 0.75;
constexpr double kTransFatMat[3] = {0.7665008954445129, 0.6709408646894569, 0.6066003581778052};
constexpr double kTransFatAggregate = 2.0440421183117747;
const std::vector<std::string> kTransFatOpinions = {"trans fats are unhealthy and should be avoided",
                                                    "read food labels and limit processed foods",
                                                    "olive oil is a healthier fat than margarine"};
const std::string kTransFatCandidate = "trans fats are unhealthy so read labels and choose olive oil";
}  // namespace frozen

TEST_CASE("hashing embedder: apple banana matches the reference vector") {
    const HashingEmbedder e(256);
    const auto v = e.embed("apple banana");
    REQUIRE(v.dimension() == 256);
    for (std::size_t i = 0; i < 256; ++i) {
        const double expected = (i == 144 || i == 191) ? -frozen::kInvSqrt2 : 0.0;
        CHECK(v.values()[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("hashing embedder removes count scaling and case") {
    const HashingEmbedder e;
    CHECK(e.embed("apple apple") == e.embed("apple"));
    CHECK(e.embed("Apple, BANANA!") == e.embed("apple banana"));
    CHECK(e.id() == "hashing-fnv1a64-d256");
}

TEST_CASE("hashing embedder rejects empty token sets") {
    const HashingEmbedder e;
    CHECK(error_code_of([&] { e.embed(""); }) == ErrorCode::EmptyText);
    CHECK(error_code_of([&] { e.embed(" ,.;! "); }) == ErrorCode::EmptyText);
    CHECK(error_code_of([&] { mat_score(e, "", "x"); }) == ErrorCode::EmptyText);
}

TEST_CASE("cancelling token signs fall back to unsigned counts") {
    // 'river' and 'ocean' land in the same bucket with opposite signs.
    const HashingEmbedder e;
    const auto v = e.embed("river ocean");
    CHECK(v.values()[209] == 1.0);
    CHECK(mat_score(e, "river ocean", "river ocean").value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mat_score(e, "river ocean", "river").value() == doctest::Approx(oracle::mat("river ocean", "river")));
}

TEST_CASE("tokenizer keeps UTF-8 bytes inside tokens") {
    CHECK(HashingEmbedder::tokenize("Café-au lait") == std::vector<std::string>{"café", "au", "lait"});
}

TEST_CASE("hashing embedder agrees with the sparse oracle on random texts") {
    const HashingEmbedder e;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        const auto a = fixtures::word_salad(rng, 1, 12);
        const auto b = fixtures::word_salad(rng, 1, 12);
        CHECK(cosine(e.embed(a), e.embed(b)) == doctest::Approx(oracle::cosine(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("embedding vectors are unit length") {
    const HashingEmbedder e(64);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto v = e.embed(fixtures::word_salad(rng));
        const double n = std::sqrt(std::inner_product(v.values().begin(), v.values().end(), v.values().begin(), 0.0));
        CHECK(std::fabs(n - 1.0) < 1e-6);
    }
    CHECK(error_code_of([] { EmbeddingVector::from_raw({0.0, 0.0}); }) == ErrorCode::EmptyText);
    CHECK(error_code_of([] { EmbeddingVector::from_raw({1.0, NAN}); }) == ErrorCode::SchemaViolation);
}

TEST_CASE("mat_score reference values") {
    const HashingEmbedder e;
    CHECK(mat_score(e, "apple banana", "apple cherry").value() ==
          doctest::Approx(frozen::kMatAppleBananaVsCherry).epsilon(1e-12));
    for (int k = 0; k < 3; ++k) {
        CHECK(mat_score(e, frozen::kTransFatOpinions[k], frozen::kTransFatCandidate).value() ==
              doctest::Approx(frozen::kTransFatMat[k]).epsilon(1e-12));
    }
}

TEST_CASE("mat_score: identity, orthogonal midpoint, antipodal zero") {
    const HashingEmbedder e;
    CHECK(std::fabs(mat_score(e, "some text here", "some text here").value() - 1.0) < 1e-9);
    // Disjoint buckets -> cosine 0 -> 0.5.
    CHECK(mat_score(e, "apple", "cherry").value() == doctest::Approx(0.5));
    CHECK(mat_from_cosine(-1.0).value() == 0.0);
    CHECK(mat_from_cosine(1.0 + 1e-15).value() == 1.0);
}

TEST_CASE("mat_score is exactly symmetric and in range") {
    const HashingEmbedder e;
    std::mt19937_64 rng(23);
    for (int i = 0; i < 300; ++i) {
        const auto a = fixtures::word_salad(rng);
        const auto b = fixtures::word_salad(rng);
        const auto ab = mat_score(e, a, b).value();
        CHECK(ab == mat_score(e, b, a).value());
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("aggregate_score") {
    const HashingEmbedder e;
    const OpinionSet same{"q", ConflictMode::WithoutConflict, {"x y z", "x y z", "x y z"}};
    CHECK(aggregate_score(e, same, "x y z") == doctest::Approx(3.0).epsilon(1e-12));

    const OpinionSet one{"q", ConflictMode::WithoutConflict, {"apple banana"}};
    CHECK(aggregate_score(e, one, "apple cherry") == mat_score(e, "apple banana", "apple cherry").value());

    const OpinionSet three{"q", ConflictMode::WithoutConflict, frozen::kTransFatOpinions};
    CHECK(aggregate_score(e, three, frozen::kTransFatCandidate) ==
          doctest::Approx(frozen::kTransFatAggregate).epsilon(1e-12));
    CHECK(error_code_of([&] { aggregate_score(e, {"q", ConflictMode::WithoutConflict, {}}, "x"); }) ==
          ErrorCode::EmptyOpinions);
}

TEST_CASE("select_best basic cases") {
    const HashingEmbedder e;
    const auto r = select_best(e, {"trans fats are bad"}, {"trans fats are bad", "the ocean is deep and blue"});
    CHECK(r.best_index == 0);
    CHECK(r.per_candidate_totals[0] == doctest::Approx(1.0));

    const auto tie = select_best(e, {"a b", "c d"}, {"same text", "same text"});
    CHECK(tie.best_index == 0);
    CHECK(tie.per_candidate_totals[0] == tie.per_candidate_totals[1]);

    CHECK(error_code_of([&] { select_best(e, {}, {"x"}); }) == ErrorCode::EmptyOpinions);
    CHECK(error_code_of([&] { select_best(e, {"x"}, {}); }) == ErrorCode::EmptyCandidates);
    CHECK(error_code_of([&] { select_best(e, {"x"}, {"   "}); }) == ErrorCode::EmptyText);
}

TEST_CASE("select_best matches brute-force enumeration on random instances") {
    const HashingEmbedder e;
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> ops(1 + rng() % 5), cands(1 + rng() % 6);
        for (auto& o : ops) o = fixtures::word_salad(rng);
        for (auto& c : cands) c = fixtures::word_salad(rng);
        if (rng() % 4 == 0 && cands.size() > 1) cands[1] = cands[0];

        const auto r = select_best(e, ops, cands);
        REQUIRE(r.best_index == oracle::brute_force_best(ops, cands));
        REQUIRE(r.score_matrix.size() == ops.size());
        for (std::size_t j = 0; j < cands.size(); ++j) {
            double sum = 0;
            for (std::size_t k = 0; k < ops.size(); ++k) sum += r.score_matrix[k][j].value();
            CHECK(std::fabs(sum - r.per_candidate_totals[j]) < 1e-9);
            CHECK(r.per_candidate_totals[j] >= 0.0);
            CHECK(r.per_candidate_totals[j] <= static_cast<double>(ops.size()));
        }
    }
}

TEST_CASE("argmax over mapped scores equals argmax over raw cosines") {
    const HashingEmbedder e;
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> ops(2 + rng() % 4), cands(2 + rng() % 5);
        for (auto& o : ops) o = fixtures::word_salad(rng);
        for (auto& c : cands) c = fixtures::word_salad(rng);

        std::vector<double> raw(cands.size(), 0.0);
        for (std::size_t j = 0; j < cands.size(); ++j) {
            for (const auto& o : ops) raw[j] += cosine(e.embed(o), e.embed(cands[j]));
        }
        const auto best_raw = static_cast<std::size_t>(std::max_element(raw.begin(), raw.end()) - raw.begin());
        const auto r = select_best(e, ops, cands);
        // Mapping is affine per term, so totals differ by |OP|/2 and a 1/2 factor.
        if (std::fabs(raw[best_raw] - raw[r.best_index]) > 1e-12) {
            CHECK(r.best_index == best_raw);
        }
    }
}

TEST_CASE("permuting candidates permutes totals") {
    const HashingEmbedder e;
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> ops(1 + rng() % 4), cands(1 + rng() % 6);
        for (auto& o : ops) o = fixtures::word_salad(rng);
        for (auto& c : cands) c = fixtures::word_salad(rng);
        std::vector<std::size_t> perm(cands.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::string> shuffled;
        for (auto p : perm) shuffled.push_back(cands[p]);

        const auto a = select_best(e, ops, cands);
        const auto b = select_best(e, ops, shuffled);
        for (std::size_t j = 0; j < perm.size(); ++j) CHECK(b.per_candidate_totals[j] == a.per_candidate_totals[perm[j]]);
        CHECK(b.per_candidate_totals[b.best_index] == a.per_candidate_totals[a.best_index]);
    }
}

TEST_CASE("cached embedder round-trips vectors") {
    fixtures::TempDir dir;
    ContentCache cache(dir.path());
    const HashingEmbedder inner(32);
    const CachedEmbedder cached(inner, cache);
    const auto first = cached.embed("river mountain");
    const auto second = cached.embed("river mountain");
    CHECK(first == inner.embed("river mountain"));
    CHECK(second == first);
    CHECK(cached.id() == inner.id());
}
