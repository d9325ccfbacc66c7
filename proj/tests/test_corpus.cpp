#include <doctest.h>

#include <set>

#include "agora/corpus.hpp"
#include "agora/error.hpp"
#include "fixtures.hpp"

using namespace agora;

namespace {

using fixtures::error_code_of;

std::set<std::string> ids(const QuestionCorpus& c) {
    std::set<std::string> out;
    for (const auto& q : c.questions) out.insert(q.id);
    return out;
}

}  // namespace

TEST_CASE("csv row with quoted fields becomes a question") {
    const auto corpus = parse_corpus(
        "2,2,\"What is Trans Fat? How to reduce that?\",\"I heard that tras fat is bad...\","
        "\"Trans fats occur in manufactured foods\"\n",
        "csv");
    REQUIRE(corpus.size() == 1);
    const auto& q = corpus.questions[0];
    CHECK(q.id == "2");
    CHECK(q.topic_label == 2);
    CHECK(q.title == "What is Trans Fat? How to reduce that?");
    CHECK(q.content == "I heard that tras fat is bad...");
}

TEST_CASE("csv quoting: doubled quotes, embedded commas and newlines") {
    const auto corpus = parse_corpus("a,1,\"say \"\"hi\"\", ok\",\"line1\nline2\"\r\nb,0,plain,\n", "csv");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.questions[0].title == "say \"hi\", ok");
    CHECK(corpus.questions[0].content == "line1\nline2");
    CHECK(corpus.questions[1].title == "plain");
    CHECK(corpus.questions[1].content.empty());
}

TEST_CASE("tsv rows") {
    const auto corpus = parse_corpus("x\t3\tTitle one\tbody\n\ny\t4\tTitle two\t\n", "tsv");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.questions[1].id == "y");
    CHECK(corpus.questions[1].topic_label == 4);
}

TEST_CASE("empty file gives an empty corpus") {
    fixtures::TempDir dir;
    fixtures::write(dir.path() / "empty.csv", "");
    const auto corpus = load_corpus(dir.str("empty.csv"), "csv");
    CHECK(corpus.size() == 0);
    CHECK(topic_distribution(corpus).empty());
}

TEST_CASE("load errors") {
    fixtures::TempDir dir;
    CHECK(error_code_of([&] { load_corpus(dir.str("missing.csv"), "csv"); }) == ErrorCode::FileNotFound);
    CHECK(error_code_of([] { parse_corpus("7,1,a,b\n7,2,c,d\n", "csv"); }) == ErrorCode::DuplicateId);
    CHECK(error_code_of([] { parse_corpus("1,1,only three\n", "csv"); }) == ErrorCode::MalformedRow);
    CHECK(error_code_of([] { parse_corpus("1,x,title,body\n", "csv"); }) == ErrorCode::MalformedRow);
    CHECK(error_code_of([] { parse_corpus("1,-3,title,body\n", "csv"); }) == ErrorCode::MalformedRow);
    CHECK(error_code_of([] { parse_corpus("1,1,\"   \",body\n", "csv"); }) == ErrorCode::MalformedRow);
    CHECK(error_code_of([] { parse_corpus("1,1,\"open,body\n", "csv"); }) == ErrorCode::MalformedRow);
    CHECK(error_code_of([] { parse_corpus("1,1,t,b\n", "xml"); }) == ErrorCode::ConfigError);
}

TEST_CASE("malformed row reports its row number") {
    try {
        parse_corpus("1,1,t,b\n2,2,t,b\n3,3,t\n", "csv");
        FAIL("expected MalformedRow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedRow);
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("duplicate titles are allowed") {
    CHECK(parse_corpus("1,1,same,a\n2,1,same,b\n", "csv").size() == 2);
}

TEST_CASE("sample_split on a 5-question corpus covers 5 distinct ids") {
    const auto corpus = parse_corpus(fixtures::synthetic_corpus_csv(5), "csv");
    const auto [train, test] = sample_split(corpus, {3, 2, 1});
    CHECK(train.size() == 3);
    CHECK(test.size() == 2);
    auto all = ids(train);
    for (const auto& id : ids(test)) all.insert(id);
    CHECK(all.size() == 5);
}

TEST_CASE("sample_split is deterministic and keeps corpus order") {
    const auto corpus = parse_corpus(fixtures::synthetic_corpus_csv(40), "csv");
    const auto a = sample_split(corpus, {10, 5, 99});
    const auto b = sample_split(corpus, {10, 5, 99});
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);

    auto position = [&](const std::string& id) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus.questions[i].id == id) return i;
        }
        return corpus.size();
    };
    for (std::size_t i = 1; i < a.first.size(); ++i) {
        CHECK(position(a.first.questions[i - 1].id) < position(a.first.questions[i].id));
    }
    const auto c = sample_split(corpus, {10, 5, 100});
    CHECK_FALSE(a.first == c.first);
}

TEST_CASE("sample_split at 1000 + 100") {
    const auto corpus = parse_corpus(fixtures::synthetic_corpus_csv(1100), "csv");
    const auto [train, test] = sample_split(corpus, {1000, 100, 5});
    CHECK(train.size() == 1000);
    CHECK(test.size() == 100);
    auto dist = topic_distribution(train);
    std::size_t total = 0;
    for (const auto& [label, count] : dist) total += count;
    CHECK(total == 1000);
}

TEST_CASE("sample_split property: disjoint with exact sizes") {
    const auto corpus = parse_corpus(fixtures::synthetic_corpus_csv(60), "csv");
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n_train = 1 + rng() % 40;
        const std::size_t n_test = 1 + rng() % (60 - n_train);
        const auto [train, test] = sample_split(corpus, {n_train, n_test, rng()});
        REQUIRE(train.size() == n_train);
        REQUIRE(test.size() == n_test);
        const auto tr = ids(train);
        for (const auto& id : ids(test)) REQUIRE(tr.count(id) == 0);
    }
}

TEST_CASE("sample_split rejects oversized requests") {
    const auto corpus = parse_corpus(fixtures::synthetic_corpus_csv(5), "csv");
    CHECK(error_code_of([&] { sample_split(corpus, {4, 2, 0}); }) == ErrorCode::InsufficientCorpus);
}

TEST_CASE("topic_distribution counts labels") {
    const auto corpus = parse_corpus("a,2,t,\nb,2,t,\nc,5,t,\n", "csv");
    const auto dist = topic_distribution(corpus);
    CHECK(dist == std::map<int, std::size_t>{{2, 2}, {5, 1}});
}
