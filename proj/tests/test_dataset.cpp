#include <doctest.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "agora/dataset.hpp"
#include "agora/error.hpp"
#include "agora/text.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace agora;
using fixtures::error_code_of;

namespace {

// Frozen from tests/oracles/hashing_oracle.py on tests/data/trans_fat.json.
constexpr double kTransFatTotals[2] = {2.54435248459988, 2.5022880930644975};
constexpr std::size_t kTransFatBest = 0;

ConsensusInstance make_instance(const std::string& qid, ConflictMode mode, std::vector<std::string> opinions,
                                std::vector<std::string> candidates) {
    ConsensusInstance inst;
    inst.question = Question{qid, 0, "Topic " + qid, ""};
    inst.conflict_mode = mode;
    inst.opinions = OpinionSet{qid, mode, std::move(opinions)};
    inst.candidates = CandidateSet{qid, mode, std::move(candidates)};
    return inst;
}

ConsensusInstance random_instance(std::mt19937_64& rng, const std::string& qid, ConflictMode mode, int n = 3,
                                  int m = 4) {
    std::vector<std::string> ops, cands;
    for (int i = 0; i < n; ++i) ops.push_back(fixtures::word_salad(rng));
    for (int j = 0; j < m; ++j) cands.push_back(fixtures::word_salad(rng));
    return make_instance(qid, mode, ops, cands);
}

ConsensusInstance trans_fat_instance() {
    const auto j = nlohmann::json::parse(read_file(std::string(AGORA_TEST_DATA_DIR) + "/trans_fat.json"));
    return make_instance("trans-fat", ConflictMode::WithoutConflict, j.at("opinions"), j.at("candidates"));
}

}  // namespace

TEST_CASE("trans-fat opinions with two candidates, optimal policy") {
    const HashingEmbedder e;
    const auto inst = trans_fat_instance();
    const auto sel = select_best(e, inst.opinions.opinions, inst.candidates.candidates);
    CHECK(sel.per_candidate_totals[0] == doctest::Approx(kTransFatTotals[0]).epsilon(1e-12));
    CHECK(sel.per_candidate_totals[1] == doctest::Approx(kTransFatTotals[1]).epsilon(1e-12));

    const auto rec = build_record(inst, SelectionPolicy::optimal(), e);
    CHECK(rec.instruction == kAgreementInstruction);
    CHECK(rec.provenance.chosen_candidate_index == kTransFatBest);
    CHECK(rec.output == inst.candidates.candidates[kTransFatBest]);
    CHECK(rec.provenance.policy == "optimal");
    CHECK(rec.provenance.embedder_id == e.id());
    CHECK(rec.provenance.question_id == "trans-fat");
    CHECK(rec.input == "Opinion 1: " + inst.opinions.opinions[0] + "\nOpinion 2: " + inst.opinions.opinions[1] +
                           "\nOpinion 3: " + inst.opinions.opinions[2]);
}

TEST_CASE("single candidate is forced under either policy") {
    const HashingEmbedder e;
    const auto inst = make_instance("q", ConflictMode::WithConflict, {"a b", "c d"}, {"only one"});
    CHECK(build_record(inst, SelectionPolicy::optimal(), e).output == "only one");
    CHECK(build_record(inst, SelectionPolicy::random(99), e).output == "only one");
}

TEST_CASE("random policy is deterministic per seed and question") {
    const HashingEmbedder e;
    std::mt19937_64 rng(5);
    const auto inst = random_instance(rng, "q7", ConflictMode::WithoutConflict);
    const auto a = build_record(inst, SelectionPolicy::random(42), e);
    const auto b = build_record(inst, SelectionPolicy::random(42), e);
    CHECK(a == b);
    CHECK(a.provenance.policy == "random(seed=42)");
    CHECK(a.provenance.chosen_candidate_index == random_pick(42, "q7", 4));

    // Picks are spread over all indices across questions.
    std::vector<int> hist(4, 0);
    for (int i = 0; i < 400; ++i) ++hist[random_pick(42, "q" + std::to_string(i), 4)];
    for (int h : hist) CHECK(h > 50);
}

TEST_CASE("empty candidates") {
    const HashingEmbedder e;
    const auto inst = make_instance("q", ConflictMode::WithoutConflict, {"a"}, {});
    CHECK(error_code_of([&] { build_record(inst, SelectionPolicy::optimal(), e); }) == ErrorCode::EmptyCandidates);
    CHECK(error_code_of([&] { build_record(inst, SelectionPolicy::random(1), e); }) == ErrorCode::EmptyCandidates);
}

TEST_CASE("build_dataset: ten instances give ten records in order") {
    const HashingEmbedder e;
    std::mt19937_64 rng(11);
    std::vector<ConsensusInstance> insts;
    for (int i = 0; i < 10; ++i) insts.push_back(random_instance(rng, "q" + std::to_string(i), ConflictMode::WithoutConflict));
    const auto d = build_dataset(insts, CaseId::NoConflictOptimal, e, 3, {}, 4);
    REQUIRE(d.records.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(d.records[i].provenance.question_id == "q" + std::to_string(i));
    CHECK(d.manifest["case_id"] == "NoConflictOptimal");
    CHECK(d.manifest["record_count"] == 10);
    CHECK(d.manifest["embedder_id"] == e.id());
    // Concurrency does not change the result.
    CHECK(build_dataset(insts, CaseId::NoConflictOptimal, e, 3, {}, 1) == d);
}

TEST_CASE("build_dataset rejects a mode mismatch") {
    const HashingEmbedder e;
    std::mt19937_64 rng(1);
    const std::vector<ConsensusInstance> insts = {random_instance(rng, "q", ConflictMode::WithConflict)};
    CHECK(error_code_of([&] { build_dataset(insts, CaseId::NoConflictOptimal, e, 0); }) == ErrorCode::ModeMismatch);
    CHECK(error_code_of([&] { build_dataset(insts, CaseId::ConflictRandom, e, 0); }) == std::nullopt);
}

TEST_CASE("build_dataset at 1000 questions") {
    const HashingEmbedder e;
    std::mt19937_64 rng(1000);
    std::vector<ConsensusInstance> insts;
    for (int i = 0; i < 1000; ++i) insts.push_back(random_instance(rng, "q" + std::to_string(i), ConflictMode::WithConflict));
    const auto d = build_dataset(insts, CaseId::ConflictOptimal, e, 0, {}, 4);
    CHECK(d.records.size() == 1000);
    for (const auto& r : d.records) {
        CHECK(r.provenance.conflict_mode == ConflictMode::WithConflict);
        CHECK(r.provenance.chosen_candidate_index < 4);
    }
}

TEST_CASE("optimal choice dominates random choice on every instance") {
    const HashingEmbedder e;
    std::mt19937_64 rng(77);
    for (int i = 0; i < 300; ++i) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const int m = 1 + static_cast<int>(rng() % 6);
        const auto inst = random_instance(rng, "q" + std::to_string(i), ConflictMode::WithoutConflict, n, m);
        const auto opt = build_record(inst, SelectionPolicy::optimal(), e);
        const auto rnd = build_record(inst, SelectionPolicy::random(i), e);
        CHECK(aggregate_score(e, inst.opinions, opt.output) >=
              aggregate_score(e, inst.opinions, rnd.output));
        CHECK(opt.provenance.chosen_candidate_index ==
              oracle::brute_force_best(inst.opinions.opinions, inst.candidates.candidates));
    }
}

TEST_CASE("export then import round-trips and is byte-stable") {
    const HashingEmbedder e;
    std::mt19937_64 rng(3);
    std::vector<ConsensusInstance> insts;
    for (int i = 0; i < 5; ++i) insts.push_back(random_instance(rng, "q" + std::to_string(i), ConflictMode::WithConflict));
    insts[2].candidates.candidates[0] = "quotes \" and\nnewlines, café";
    const auto d = build_dataset(insts, CaseId::ConflictRandom, e, 9, {{"seed", 9}});

    fixtures::TempDir dir;
    const auto p1 = (dir.path() / "a.json").string();
    const auto p2 = (dir.path() / "b.json").string();
    export_dataset(d, p1);
    export_dataset(d, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(import_dataset(p1) == d);
    CHECK(d.manifest["seed"] == 9);

    const auto pj = (dir.path() / "a.jsonl").string();
    export_records_jsonl(d.records, pj);
    CHECK(import_records_jsonl(pj) == d.records);
    const auto lines = split_lines(read_file(pj));
    std::size_t non_blank = 0;
    for (const auto& l : lines) {
        if (is_blank(l)) continue;
        ++non_blank;
        const auto j = nlohmann::json::parse(l);
        CHECK(j.contains("instruction"));
        CHECK(j.contains("input"));
        CHECK(j.contains("output"));
    }
    CHECK(non_blank == 5);
}

TEST_CASE("exported fields appear in a stable order") {
    const HashingEmbedder e;
    const auto d = build_dataset({trans_fat_instance()}, CaseId::NoConflictOptimal, e, 0);
    const auto text = serialize_dataset(d);
    CHECK(text.find("\"manifest\"") < text.find("\"records\""));
    CHECK(text.find("\"instruction\"") < text.find("\"input\""));
    CHECK(text.find("\"input\"") < text.find("\"output\""));
    CHECK(text.find("\"output\"") < text.find("\"provenance\""));
    CHECK(text.back() == '\n');
}

TEST_CASE("empty dataset exports an empty record list") {
    const HashingEmbedder e;
    const auto d = build_dataset({}, CaseId::ConflictOptimal, e, 0);
    fixtures::TempDir dir;
    const auto p = (dir.path() / "empty.json").string();
    export_dataset(d, p);
    const auto j = nlohmann::json::parse(read_file(p));
    CHECK(j["records"].empty());
    CHECK(j["manifest"]["record_count"] == 0);
    CHECK(j["manifest"]["case_id"] == "ConflictOptimal");
    CHECK(import_dataset(p) == d);
}

TEST_CASE("import validation") {
    fixtures::TempDir dir;
    const std::string manifest = R"({"case_id":"NoConflictOptimal"})";
    auto rec = [](const std::string& instr, const std::string& input, const std::string& output) {
        nlohmann::ordered_json r;
        r["instruction"] = instr;
        r["input"] = input;
        r["output"] = output;
        r["provenance"] = {{"question_id", "q"},
                           {"conflict_mode", "WithoutConflict"},
                           {"policy", "optimal"},
                           {"chosen_candidate_index", 0},
                           {"embedder_id", "hashing-fnv1a64-d256"}};
        return r;
    };
    auto file_with = [&](const std::string& name, const std::vector<nlohmann::ordered_json>& records) {
        nlohmann::ordered_json j;
        j["manifest"] = nlohmann::ordered_json::parse(manifest);
        j["records"] = records;
        const auto p = (dir.path() / name).string();
        fixtures::write(p, j.dump(2));
        return p;
    };

    const std::string ok(kAgreementInstruction);
    const auto valid = file_with("valid.json", {rec(ok, "Opinion 1: a", "x"), rec(ok, "Opinion 1: b", "y"),
                                                rec(ok, "Opinion 1: c", "z")});
    CHECK(import_dataset(valid).records.size() == 3);

    const auto summarize = file_with("summ.json", {rec("Summarize:", "Opinion 1: a", "x")});
    CHECK(error_code_of([&] { import_dataset(summarize); }) == ErrorCode::SchemaViolation);

    const auto empty_out = file_with("eo.json", {rec(ok, "Opinion 1: a", "")});
    CHECK(error_code_of([&] { import_dataset(empty_out); }) == ErrorCode::SchemaViolation);

    auto missing = rec(ok, "Opinion 1: a", "x");
    missing.erase("input");
    const auto miss = file_with("miss.json", {missing});
    CHECK(error_code_of([&] { import_dataset(miss); }) == ErrorCode::SchemaViolation);

    auto wrong_mode = rec(ok, "Opinion 1: a", "x");
    wrong_mode["provenance"]["conflict_mode"] = "WithConflict";
    const auto wm = file_with("wm.json", {wrong_mode});
    CHECK(error_code_of([&] { import_dataset(wm); }) == ErrorCode::SchemaViolation);

    const auto garbage = (dir.path() / "garbage.json").string();
    fixtures::write(garbage, "{not json");
    CHECK(error_code_of([&] { import_dataset(garbage); }) == ErrorCode::SchemaViolation);
    CHECK(error_code_of([&] { import_dataset((dir.path() / "absent.json").string()); }) == ErrorCode::IoFailure);
}

TEST_CASE("case ids") {
    for (auto c : kAllCases) CHECK(parse_case_id(to_string(c)) == c);
    CHECK(!parse_case_id("Optimal").has_value());
    CHECK(case_for(ConflictMode::WithConflict, SelectionPolicy::Kind::Random) == CaseId::ConflictRandom);
    CHECK(conflict_mode_of(CaseId::NoConflictRandom) == ConflictMode::WithoutConflict);
    CHECK(policy_kind_of(CaseId::ConflictOptimal) == SelectionPolicy::Kind::Optimal);
}
