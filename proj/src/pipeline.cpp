#include "agora/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

#include "agora/cache.hpp"
#include "agora/error.hpp"
#include "agora/hash.hpp"
#include "agora/parallel.hpp"
#include "agora/remote.hpp"
#include "agora/text.hpp"

namespace agora {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Ingest: return "ingest";
        case Stage::Opinions: return "opinions";
        case Stage::Candidates: return "candidates";
        case Stage::Select: return "select";
        case Stage::Build: return "build";
        case Stage::Evaluate: return "evaluate";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
    for (auto st : kAllStages) {
        if (s == to_string(st)) return st;
    }
    return std::nullopt;
}

std::string artifacts::dataset_json(CaseId id) { return "datasets/" + std::string(to_string(id)) + ".json"; }
std::string artifacts::dataset_jsonl(CaseId id) { return "datasets/" + std::string(to_string(id)) + ".jsonl"; }

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string_view split_name(bool train) { return train ? "train" : "test"; }

// ---- JSON forms of stage artifacts -----------------------------------------

ojson question_to_json(const Question& q) {
    ojson j;
    j["id"] = q.id;
    j["topic_label"] = q.topic_label;
    j["title"] = q.title;
    j["content"] = q.content;
    return j;
}

Question question_from_json(const nlohmann::json& j) {
    return Question{j.at("id").get<std::string>(), j.at("topic_label").get<int>(), j.at("title").get<std::string>(),
                    j.at("content").get<std::string>()};
}

ConflictMode mode_from_json(const nlohmann::json& j) {
    const auto mode = parse_conflict_mode(j.get<std::string>());
    if (!mode) throw Error(ErrorCode::SchemaViolation, "unknown conflict mode");
    return *mode;
}

nlohmann::json parse_artifact(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
}

struct SplitQuestions {
    std::vector<Question> train;
    std::vector<Question> test;
};

SplitQuestions load_questions(const fs::path& out) {
    const auto doc = parse_artifact(out / artifacts::kQuestions);
    SplitQuestions s;
    try {
        for (const auto& q : doc.at("train")) s.train.push_back(question_from_json(q));
        for (const auto& q : doc.at("test")) s.test.push_back(question_from_json(q));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string(artifacts::kQuestions) + ": " + e.what());
    }
    return s;
}

// One entry of the opinion/candidate artifacts.
struct GeneratedEntry {
    bool train = true;
    std::string question_id;
    ConflictMode mode = ConflictMode::WithoutConflict;
    std::vector<std::string> texts;
};

std::vector<GeneratedEntry> load_entries(const fs::path& path, const char* field) {
    const auto doc = parse_artifact(path);
    std::vector<GeneratedEntry> out;
    try {
        for (const auto& e : doc) {
            out.push_back({e.at("split").get<std::string>() == "train", e.at("question_id").get<std::string>(),
                           mode_from_json(e.at("conflict_mode")), e.at(field).get<std::vector<std::string>>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
    return out;
}

ojson entry_to_json(bool train, const std::string& qid, ConflictMode mode, const char* field,
                    const std::vector<std::string>& texts) {
    ojson j;
    j["split"] = split_name(train);
    j["question_id"] = qid;
    j["conflict_mode"] = to_string(mode);
    j[field] = texts;
    return j;
}

// Work items: every (mode, split, question) in a fixed order.
struct WorkItem {
    bool train;
    ConflictMode mode;
    const Question* question;
};

std::vector<WorkItem> work_items(const RunConfig& cfg, const SplitQuestions& qs) {
    std::vector<WorkItem> items;
    for (bool train : {true, false}) {
        for (auto mode : cfg.conflict_modes) {
            for (const auto& q : train ? qs.train : qs.test) items.push_back({train, mode, &q});
        }
    }
    return items;
}

std::string write_artifact(const fs::path& out, const std::string& rel, std::string_view contents) {
    write_file_atomic((out / rel).string(), contents);
    return sha256_hex(contents);
}

// ---- Execution context -----------------------------------------------------

struct Context {
    const RunConfig& cfg;
    fs::path out;
    RunManifest manifest;
    std::unique_ptr<TextBackend> owned_backend;
    TextBackend* backend = nullptr;
    std::unique_ptr<ContentCache> cache;
    std::unique_ptr<CompletionClient> client;
    std::unique_ptr<Embedder> owned_embedder;
    std::unique_ptr<Embedder> cached_embedder;
    const Embedder* embedder = nullptr;

    Context(const RunConfig& c, const PipelineOverrides& ov) : cfg(c), out(c.output_dir) {
        cache = std::make_unique<ContentCache>(cfg.cache_dir);
        if (ov.backend) {
            backend = ov.backend;
        } else if (cfg.backend.kind == "mock") {
            auto mock = std::make_unique<MockBackend>(cfg.seed, cfg.backend.model);
            if (!cfg.backend.canned_dir.empty()) mock->load_canned_dir(cfg.backend.canned_dir);
            owned_backend = std::move(mock);
            backend = owned_backend.get();
        } else {
            owned_backend = HttpChatBackend::from_env(cfg.backend.model);
            backend = owned_backend.get();
        }
        client = std::make_unique<CompletionClient>(*backend, cache.get(), cfg.generation.retry_limit);

        if (ov.embedder) {
            embedder = ov.embedder;
        } else if (cfg.embedder.kind == "hashing") {
            owned_embedder = std::make_unique<HashingEmbedder>(cfg.embedder.dimension);
            embedder = owned_embedder.get();
        } else {
            owned_embedder = HttpEmbedder::from_env(cfg.embedder.model, cfg.generation.retry_limit);
            cached_embedder = std::make_unique<CachedEmbedder>(*owned_embedder, *cache);
            embedder = cached_embedder.get();
        }
    }

    std::string system_id() const { return backend->provider_id() + ":" + backend->model(); }
};

struct StageOutput {
    std::map<std::string, std::string> hashes;
    ojson stats = ojson::object();
};

StageOutput run_ingest(Context& ctx) {
    const auto corpus = load_corpus(ctx.cfg.corpus_path, ctx.cfg.format_tag);
    const auto [train, test] = sample_split(corpus, ctx.cfg.split);

    auto dist = [](const QuestionCorpus& c) {
        ojson j = ojson::object();
        for (const auto& [label, count] : topic_distribution(c)) j[std::to_string(label)] = count;
        return j;
    };
    ojson doc;
    const auto corpus_sha = sha256_file(ctx.cfg.corpus_path);
    doc["source"] = corpus.source_path;
    doc["sha256"] = corpus_sha;
    doc["format"] = corpus.format_tag;
    doc["corpus_size"] = corpus.size();
    doc["topic_distribution"] = {{"train", dist(train)}, {"test", dist(test)}};
    doc["train"] = ojson::array();
    doc["test"] = ojson::array();
    for (const auto& q : train.questions) doc["train"].push_back(question_to_json(q));
    for (const auto& q : test.questions) doc["test"].push_back(question_to_json(q));

    StageOutput o;
    o.hashes[artifacts::kQuestions] = write_artifact(ctx.out, artifacts::kQuestions, doc.dump(2) + "\n");
    o.stats = {{"corpus_size", corpus.size()},
               {"corpus_sha256", corpus_sha},
               {"train", train.size()},
               {"test", test.size()}};
    return o;
}

StageOutput run_opinions(Context& ctx) {
    const auto qs = load_questions(ctx.out);
    const auto items = work_items(ctx.cfg, qs);
    const auto sets = parallel_map<OpinionSet>(items.size(), ctx.cfg.generation.max_concurrency, [&](std::size_t i) {
        return generate_opinions(*ctx.client, *items[i].question, items[i].mode, ctx.cfg.generation);
    });

    ojson doc = ojson::array();
    std::size_t train_opinions = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        doc.push_back(entry_to_json(items[i].train, sets[i].question_id, sets[i].conflict_mode, "opinions",
                                    sets[i].opinions));
        if (items[i].train) train_opinions += sets[i].opinions.size();
    }
    StageOutput o;
    o.hashes[artifacts::kOpinions] = write_artifact(ctx.out, artifacts::kOpinions, doc.dump(2) + "\n");
    o.stats = {{"opinion_sets", sets.size()}, {"train_opinions", train_opinions}};
    return o;
}

StageOutput run_candidates(Context& ctx) {
    const auto qs = load_questions(ctx.out);
    const auto opinions = load_entries(ctx.out / artifacts::kOpinions, "opinions");
    std::map<std::string, const Question*> by_id;
    for (const auto* list : {&qs.train, &qs.test}) {
        for (const auto& q : *list) by_id[q.id] = &q;
    }

    // Outer fan-out over instances; generate_candidates fans out per call.
    const std::size_t outer = std::max<std::size_t>(1, ctx.cfg.generation.max_concurrency / 2);
    const auto sets = parallel_map<CandidateSet>(opinions.size(), outer, [&](std::size_t i) {
        const auto& e = opinions[i];
        const auto it = by_id.find(e.question_id);
        if (it == by_id.end()) throw Error(ErrorCode::SchemaViolation, "unknown question '" + e.question_id + "'");
        return generate_candidates(*ctx.client, *it->second, OpinionSet{e.question_id, e.mode, e.texts},
                                   ctx.cfg.generation);
    });

    ojson doc = ojson::array();
    std::size_t train_candidates = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        doc.push_back(entry_to_json(opinions[i].train, sets[i].question_id, sets[i].conflict_mode, "candidates",
                                    sets[i].candidates));
        if (opinions[i].train) train_candidates += sets[i].candidates.size();
    }
    StageOutput o;
    o.hashes[artifacts::kCandidates] = write_artifact(ctx.out, artifacts::kCandidates, doc.dump(2) + "\n");
    o.stats = {{"candidate_sets", sets.size()}, {"train_candidates", train_candidates}};
    return o;
}

// Instances paired with the split they belong to, in artifact order.
struct TaggedInstance {
    bool train;
    ConsensusInstance instance;
};

std::vector<TaggedInstance> load_tagged_instances(const fs::path& out) {
    const auto qs = load_questions(out);
    const auto opinions = load_entries(out / artifacts::kOpinions, "opinions");
    const auto candidates = load_entries(out / artifacts::kCandidates, "candidates");
    if (opinions.size() != candidates.size()) {
        throw Error(ErrorCode::SchemaViolation, "opinion and candidate artifacts have different lengths");
    }
    std::map<std::string, const Question*> by_id;
    for (const auto* list : {&qs.train, &qs.test}) {
        for (const auto& q : *list) by_id[q.id] = &q;
    }

    std::vector<TaggedInstance> out_list;
    for (std::size_t i = 0; i < opinions.size(); ++i) {
        const auto& o = opinions[i];
        const auto& c = candidates[i];
        if (o.question_id != c.question_id || o.mode != c.mode || o.train != c.train) {
            throw Error(ErrorCode::SchemaViolation, "artifacts out of step at entry " + std::to_string(i));
        }
        const auto it = by_id.find(o.question_id);
        if (it == by_id.end()) throw Error(ErrorCode::SchemaViolation, "unknown question '" + o.question_id + "'");
        ConsensusInstance inst{*it->second, o.mode, OpinionSet{o.question_id, o.mode, o.texts},
                               CandidateSet{c.question_id, c.mode, c.texts}};
        inst.validate();
        out_list.push_back({o.train, std::move(inst)});
    }
    return out_list;
}

StageOutput run_select(Context& ctx) {
    const auto tagged = load_tagged_instances(ctx.out);
    const auto results =
        parallel_map<SelectionResult>(tagged.size(), ctx.cfg.generation.max_concurrency,
                                      [&](std::size_t i) { return select_best(*ctx.embedder, tagged[i].instance); });

    ojson doc;
    doc["embedder_id"] = ctx.embedder->id();
    doc["random_seed"] = ctx.cfg.seed;
    doc["selections"] = ojson::array();
    for (std::size_t i = 0; i < tagged.size(); ++i) {
        const auto& inst = tagged[i].instance;
        const auto& r = results[i];
        ojson j;
        j["split"] = split_name(tagged[i].train);
        j["question_id"] = inst.question.id;
        j["conflict_mode"] = to_string(inst.conflict_mode);
        j["per_candidate_totals"] = r.per_candidate_totals;
        auto matrix = ojson::array();
        for (const auto& row : r.score_matrix) {
            auto jr = ojson::array();
            for (const auto& m : row) jr.push_back(m.value());
            matrix.push_back(std::move(jr));
        }
        j["score_matrix"] = std::move(matrix);
        j["best_index"] = r.best_index;
        j["random_index"] = random_pick(ctx.cfg.seed, inst.question.id, inst.candidates.candidates.size());
        doc["selections"].push_back(std::move(j));
    }
    StageOutput o;
    o.hashes[artifacts::kSelections] = write_artifact(ctx.out, artifacts::kSelections, doc.dump(2) + "\n");
    o.stats = {{"instances", tagged.size()}};
    return o;
}

StageOutput run_build(Context& ctx) {
    const auto tagged = load_tagged_instances(ctx.out);
    StageOutput o;
    for (auto case_id : ctx.cfg.cases()) {
        std::vector<ConsensusInstance> instances;
        for (const auto& t : tagged) {
            if (t.train && t.instance.conflict_mode == conflict_mode_of(case_id)) instances.push_back(t.instance);
        }
        ojson extra;
        extra["backend_id"] = ctx.system_id();
        extra["seed"] = ctx.cfg.seed;
        extra["corpus_sha256"] = ctx.manifest.stages.at(Stage::Ingest).stats.value("corpus_sha256", "");
        extra["config"] = ctx.cfg.content_snapshot();
        const auto ds = build_dataset(instances, case_id, *ctx.embedder, ctx.cfg.seed, extra,
                                      ctx.cfg.generation.max_concurrency);

        const auto json_rel = artifacts::dataset_json(case_id);
        const auto jsonl_rel = artifacts::dataset_jsonl(case_id);
        o.hashes[json_rel] = write_artifact(ctx.out, json_rel, serialize_dataset(ds));
        o.hashes[jsonl_rel] = write_artifact(ctx.out, jsonl_rel, serialize_records_jsonl(ds.records));
        o.stats[std::string(to_string(case_id))] = ds.records.size();
    }
    return o;
}

StageOutput run_evaluate(Context& ctx) {
    const auto tagged = load_tagged_instances(ctx.out);
    const auto sel_doc = parse_artifact(ctx.out / artifacts::kSelections);
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> picks;
    for (const auto& s : sel_doc.at("selections")) {
        if (s.at("split") != "test") continue;
        picks[{s.at("question_id").get<std::string>(), s.at("conflict_mode").get<std::string>()}] = {
            s.at("best_index").get<std::size_t>(), s.at("random_index").get<std::size_t>()};
    }

    std::vector<EvalReport> reports;
    for (auto case_id : ctx.cfg.cases()) {
        std::vector<EvalInput> inputs;
        for (const auto& t : tagged) {
            if (t.train || t.instance.conflict_mode != conflict_mode_of(case_id)) continue;
            const auto it = picks.find({t.instance.question.id, std::string(to_string(t.instance.conflict_mode))});
            if (it == picks.end()) {
                throw Error(ErrorCode::SchemaViolation, "no selection for test question '" + t.instance.question.id + "'");
            }
            const auto idx =
                policy_kind_of(case_id) == SelectionPolicy::Kind::Optimal ? it->second.first : it->second.second;
            inputs.push_back({t.instance.opinions, t.instance.candidates.candidates.at(idx)});
        }
        reports.push_back(
            evaluate_run(*ctx.embedder, inputs, ctx.system_id(), case_id, ctx.cfg.generation.max_concurrency));
    }

    ojson doc = ojson::array();
    for (const auto& r : reports) doc.push_back(report_to_json(r));
    StageOutput o;
    o.hashes[artifacts::kReports] = write_artifact(ctx.out, artifacts::kReports, doc.dump(2) + "\n");
    o.hashes[artifacts::kSamplesCsv] = write_artifact(ctx.out, artifacts::kSamplesCsv, samples_csv(reports));
    o.hashes[artifacts::kSummaryCsv] = write_artifact(ctx.out, artifacts::kSummaryCsv, summary_csv(reports));
    for (const auto& r : reports) o.stats[std::string(to_string(r.case_id))] = r.mean_score;
    return o;
}

StageOutput run_stage(Context& ctx, Stage stage) {
    switch (stage) {
        case Stage::Ingest: return run_ingest(ctx);
        case Stage::Opinions: return run_opinions(ctx);
        case Stage::Candidates: return run_candidates(ctx);
        case Stage::Select: return run_select(ctx);
        case Stage::Build: return run_build(ctx);
        case Stage::Evaluate: return run_evaluate(ctx);
    }
    throw std::logic_error("unknown stage");
}

// ---- Staleness -------------------------------------------------------------

std::optional<Stage> previous(Stage s) {
    if (s == Stage::Ingest) return std::nullopt;
    return static_cast<Stage>(static_cast<int>(s) - 1);
}

std::string fingerprint(const Context& ctx, Stage stage) {
    ojson j;
    j["stage"] = to_string(stage);
    j["config"] = ctx.cfg.content_snapshot();
    if (const auto prev = previous(stage)) {
        const auto it = ctx.manifest.stages.find(*prev);
        ojson inputs = ojson::object();
        if (it != ctx.manifest.stages.end()) {
            for (const auto& [path, hash] : it->second.artifact_hashes) inputs[path] = hash;
        }
        j["inputs"] = inputs;
    } else {
        std::error_code ec;
        j["corpus_sha256"] = fs::is_regular_file(ctx.cfg.corpus_path, ec) ? sha256_file(ctx.cfg.corpus_path) : "";
    }
    return sha256_hex(j.dump());
}

bool is_current(const Context& ctx, Stage stage) {
    const auto it = ctx.manifest.stages.find(stage);
    if (it == ctx.manifest.stages.end() || !it->second.complete) return false;
    if (it->second.fingerprint != fingerprint(ctx, stage)) return false;
    for (const auto& [rel, hash] : it->second.artifact_hashes) {
        const auto path = ctx.out / rel;
        std::error_code ec;
        if (!fs::is_regular_file(path, ec) || sha256_file(path.string()) != hash) return false;
    }
    return true;
}

void save_manifest(Context& ctx) {
    ctx.manifest.updated_at = utc_now();
    write_file_atomic((ctx.out / artifacts::kManifest).string(), ctx.manifest.to_json().dump(2) + "\n");
}

}  // namespace

// ---- RunManifest -----------------------------------------------------------

bool RunManifest::is_complete(Stage stage) const {
    const auto it = stages.find(stage);
    return it != stages.end() && it->second.complete;
}

nlohmann::ordered_json RunManifest::to_json() const {
    ojson j;
    j["config"] = config;
    j["created_at"] = created_at;
    j["updated_at"] = updated_at;
    ojson st = ojson::object();
    for (auto stage : kAllStages) {
        const auto it = stages.find(stage);
        if (it == stages.end()) continue;
        const auto& r = it->second;
        ojson rj;
        rj["complete"] = r.complete;
        rj["fingerprint"] = r.fingerprint;
        rj["artifacts"] = ojson(r.artifact_hashes);
        rj["stats"] = r.stats;
        rj["completed_at"] = r.completed_at;
        st[std::string(to_string(stage))] = std::move(rj);
    }
    j["stages"] = std::move(st);
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.config = j.at("config");
        m.created_at = j.value("created_at", "");
        m.updated_at = j.value("updated_at", "");
        for (const auto& [name, rj] : j.at("stages").items()) {
            const auto stage = parse_stage(name);
            if (!stage) throw Error(ErrorCode::SchemaViolation, "manifest: unknown stage " + name);
            StageRecord r;
            r.complete = rj.at("complete").get<bool>();
            r.fingerprint = rj.at("fingerprint").get<std::string>();
            r.artifact_hashes = rj.at("artifacts").get<std::map<std::string, std::string>>();
            r.stats = rj.at("stats");
            r.completed_at = rj.value("completed_at", "");
            if (r.complete && r.artifact_hashes.empty()) {
                throw Error(ErrorCode::SchemaViolation, "manifest: stage " + name + " complete without artifacts");
            }
            m.stages[*stage] = std::move(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("manifest: ") + e.what());
    }
    return m;
}

RunManifest RunManifest::load(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) return {};
    return from_json(parse_artifact(path));
}

// ---- RunLock ---------------------------------------------------------------

RunLock::RunLock(const fs::path& output_dir) : path_(output_dir / artifacts::kLock) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw Error(ErrorCode::OutputLocked, output_dir.string() + " is in use (remove " + path_.string() +
                                                 " if no run is active)");
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

RunLock::~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

// ---- Entry points ----------------------------------------------------------

RunSummary run_pipeline(const RunConfig& config, const std::vector<Stage>& stages,
                        const PipelineOverrides& overrides) {
    config.validate();
    RunLock lock(config.output_dir);
    Context ctx(config, overrides);
    ctx.manifest = RunManifest::load(ctx.out / artifacts::kManifest);
    if (ctx.manifest.created_at.empty()) ctx.manifest.created_at = utc_now();
    ctx.manifest.config = config.to_json();

    auto requested = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };

    RunSummary summary;
    for (auto stage : kAllStages) {
        if (!requested(stage)) continue;
        if (const auto prev = previous(stage); prev && !requested(*prev) && !is_current(ctx, *prev)) {
            throw Error(ErrorCode::StageDependencyMissing, std::string(to_string(stage)) + " needs " +
                                                               std::string(to_string(*prev)) +
                                                               " to be complete and up to date");
        }
        if (is_current(ctx, stage)) {
            summary.reused.push_back(stage);
            continue;
        }

        // Invalidate before running so an interrupted stage is never trusted.
        ctx.manifest.stages.erase(stage);
        StageOutput output;
        try {
            output = run_stage(ctx, stage);
        } catch (const Error& e) {
            save_manifest(ctx);
            throw Error(e.code(), "stage " + std::string(to_string(stage)) + ": " + e.detail());
        }
        StageRecord rec;
        rec.complete = true;
        rec.artifact_hashes = std::move(output.hashes);
        rec.stats = std::move(output.stats);
        rec.completed_at = utc_now();
        ctx.manifest.stages[stage] = std::move(rec);
        ctx.manifest.stages[stage].fingerprint = fingerprint(ctx, stage);
        save_manifest(ctx);
        summary.executed.push_back(stage);
    }
    save_manifest(ctx);

    summary.manifest = ctx.manifest;
    summary.backend_calls = ctx.client->backend_calls();
    summary.cache_hits = ctx.client->cache_hits();
    return summary;
}

RunInstances load_instances(const std::string& output_dir) {
    RunInstances out;
    for (auto& t : load_tagged_instances(output_dir)) {
        (t.train ? out.train : out.test).push_back(std::move(t.instance));
    }
    return out;
}

EvalReport evaluate_external(const RunConfig& config, const std::string& agreements_path,
                             const std::string& system_id, CaseId case_id, const PipelineOverrides& overrides) {
    config.validate();
    Context ctx(config, overrides);
    ctx.manifest = RunManifest::load(ctx.out / artifacts::kManifest);
    if (!is_current(ctx, Stage::Opinions)) {
        throw Error(ErrorCode::StageDependencyMissing, "external evaluation needs a complete opinions stage");
    }

    std::map<std::pair<std::string, ConflictMode>, OpinionSet> test_sets;
    for (const auto& e : load_entries(ctx.out / artifacts::kOpinions, "opinions")) {
        if (!e.train) test_sets[{e.question_id, e.mode}] = OpinionSet{e.question_id, e.mode, e.texts};
    }

    const auto mode = conflict_mode_of(case_id);
    std::vector<EvalInput> inputs;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_file(agreements_path))) {
        ++line_no;
        if (is_blank(line)) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const auto qid = j.at("question_id").get<std::string>();
            const auto m = mode_from_json(j.at("conflict_mode"));
            if (m != mode) continue;
            const auto it = test_sets.find({qid, m});
            if (it == test_sets.end()) {
                throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": '" + qid +
                                                            "' is not a test question of this run");
            }
            inputs.push_back({it->second, j.at("agreement").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::SchemaViolation,
                        agreements_path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    auto report = evaluate_run(*ctx.embedder, inputs, system_id, case_id, config.generation.max_concurrency);
    std::string safe_system;
    for (char c : system_id) safe_system += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    const auto rel = "eval/external-" + safe_system + "-" + std::string(to_string(case_id)) + ".json";
    write_file_atomic((ctx.out / rel).string(), report_to_json(report).dump(2) + "\n");
    return report;
}

std::vector<EvalReport> load_reports(const std::string& output_dir) {
    const fs::path eval_dir = fs::path(output_dir) / "eval";
    std::vector<EvalReport> out;
    std::error_code ec;
    if (fs::is_regular_file(fs::path(output_dir) / artifacts::kReports, ec)) {
        for (const auto& r : parse_artifact(fs::path(output_dir) / artifacts::kReports)) out.push_back(report_from_json(r));
    }
    if (fs::is_directory(eval_dir, ec)) {
        std::vector<fs::path> externals;
        for (const auto& e : fs::directory_iterator(eval_dir)) {
            if (e.path().filename().string().starts_with("external-") && e.path().extension() == ".json") {
                externals.push_back(e.path());
            }
        }
        std::sort(externals.begin(), externals.end());
        for (const auto& p : externals) out.push_back(report_from_json(parse_artifact(p)));
    }
    return out;
}

}  // namespace agora
