#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/corpus.hpp"
#include "agora/dataset.hpp"
#include "agora/evaluation.hpp"
#include "agora/generation.hpp"

namespace agora {

struct BackendSpec {
    std::string kind = "mock";  // mock | http
    std::string model = "mock-v1";
    std::string canned_dir;     // mock only, optional
};

struct EmbedderSpec {
    std::string kind = "hashing";  // hashing | http
    std::string model;             // http only
    std::size_t dimension = 256;   // hashing only
};

struct RunConfig {
    std::string corpus_path;
    std::string format_tag = "csv";
    SplitSpec split{1000, 100, 0};
    GenerationConfig generation;
    BackendSpec backend;
    EmbedderSpec embedder;
    std::string cache_dir = "cache";
    std::string output_dir = "out";
    /// Seeds the mock backend and the Random selection policy.
    std::uint64_t seed = 0;
    std::vector<ConflictMode> conflict_modes = {ConflictMode::WithoutConflict, ConflictMode::WithConflict};
    std::vector<SelectionPolicy::Kind> policies = {SelectionPolicy::Kind::Random, SelectionPolicy::Kind::Optimal};

    /// Throws ConfigError.
    void validate() const;

    /// Cases implied by conflict_modes x policies, in CaseId order.
    std::vector<CaseId> cases() const;

    /// Everything that influences artifact contents. Directories (the
    /// corpus path too; its hash is tracked instead) and concurrency are
    /// left out so relocated runs produce the same bytes.
    nlohmann::ordered_json content_snapshot() const;
    nlohmann::ordered_json to_json() const;
    /// Strict: unknown keys are a ConfigError.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

/// "with" | "without" | "both"; ConfigError otherwise.
std::vector<ConflictMode> parse_conflict_setting(std::string_view s);
/// "optimal" | "random" | "both"; ConfigError otherwise.
std::vector<SelectionPolicy::Kind> parse_policy_setting(std::string_view s);

enum class Stage { Ingest, Opinions, Candidates, Select, Build, Evaluate };

inline constexpr Stage kAllStages[] = {Stage::Ingest, Stage::Opinions, Stage::Candidates,
                                       Stage::Select, Stage::Build, Stage::Evaluate};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view s);

/// Artifact file names, relative to the output directory.
namespace artifacts {
inline constexpr const char* kManifest = "run_manifest.json";
inline constexpr const char* kLock = ".agora.lock";
inline constexpr const char* kQuestions = "questions.json";
inline constexpr const char* kOpinions = "opinions.json";
inline constexpr const char* kCandidates = "candidates.json";
inline constexpr const char* kSelections = "selections.json";
inline constexpr const char* kReports = "eval/reports.json";
inline constexpr const char* kSamplesCsv = "eval/samples.csv";
inline constexpr const char* kSummaryCsv = "eval/summary.csv";
std::string dataset_json(CaseId id);
std::string dataset_jsonl(CaseId id);
}  // namespace artifacts

struct StageRecord {
    bool complete = false;
    std::string fingerprint;
    /// artifact path (relative) -> sha256
    std::map<std::string, std::string> artifact_hashes;
    nlohmann::ordered_json stats = nlohmann::ordered_json::object();
    std::string completed_at;
};

/// Persistent record of a run directory.
struct RunManifest {
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::map<Stage, StageRecord> stages;
    std::string created_at;
    std::string updated_at;

    bool is_complete(Stage stage) const;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    /// Empty manifest when the file does not exist.
    static RunManifest load(const std::filesystem::path& path);
};

struct RunSummary {
    RunManifest manifest;
    std::vector<Stage> executed;
    std::vector<Stage> reused;
    std::size_t backend_calls = 0;
    std::size_t cache_hits = 0;
};

/// Test hook: use this backend instead of the one named by the config.
struct PipelineOverrides {
    TextBackend* backend = nullptr;
    const Embedder* embedder = nullptr;
};

/// Runs the requested stages in pipeline order inside the output
/// directory (which is locked for the duration). A stage whose recorded
/// fingerprint and artifact hashes still match is reused without work; a
/// stage whose prerequisite is neither requested nor complete-and-current
/// fails with StageDependencyMissing. The manifest is rewritten atomically
/// after each stage. Stage failures are rethrown with the stage name
/// prefixed to the message.
RunSummary run_pipeline(const RunConfig& config, const std::vector<Stage>& stages,
                        const PipelineOverrides& overrides = {});

/// Scores externally produced agreements (JSONL lines with question_id,
/// conflict_mode and agreement) against the run's test opinions, and
/// writes eval/external-<system>-<case>.json. Needs a completed opinions
/// stage.
EvalReport evaluate_external(const RunConfig& config, const std::string& agreements_path,
                             const std::string& system_id, CaseId case_id, const PipelineOverrides& overrides = {});

/// Every report under <out>/eval (pipeline and external), in file order.
std::vector<EvalReport> load_reports(const std::string& output_dir);

/// Holds <out>/.agora.lock for its lifetime; OutputLocked if already held.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& output_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Loads the train/test instance lists from a run directory.
struct RunInstances {
    std::vector<ConsensusInstance> train;
    std::vector<ConsensusInstance> test;
};
RunInstances load_instances(const std::string& output_dir);

}  // namespace agora
