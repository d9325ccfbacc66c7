// agora: command-line driver for the opinion/agreement data pipeline.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "agora/error.hpp"
#include "agora/evaluation.hpp"
#include "agora/pipeline.hpp"
#include "agora/text.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string cache;
    std::string backend;
    std::string model;
    std::string canned;
    std::string embedder;
    std::string embed_model;
    std::optional<std::size_t> dimension;
    std::string conflict;
    std::string policy;
    std::string case_name;
    std::string corpus;
    std::string format;
    std::optional<std::size_t> n_train;
    std::optional<std::size_t> n_test;
    std::optional<int> n_opinions;
    std::optional<int> m_candidates;
    std::optional<std::size_t> concurrency;
    std::optional<int> retries;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration");
    cmd->add_option("--seed", o.seed, "Master seed (split, mock backend, random policy)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--cache", o.cache, "Cache directory");
    cmd->add_option("--backend", o.backend, "Text generation backend")->check(CLI::IsMember({"mock", "http"}));
    cmd->add_option("--model", o.model, "Backend model name");
    cmd->add_option("--canned", o.canned, "Directory of canned prompt/completion records (mock)");
    cmd->add_option("--embedder", o.embedder, "Embedding provider")->check(CLI::IsMember({"hashing", "http"}));
    cmd->add_option("--embed-model", o.embed_model, "Embedding model name (http)");
    cmd->add_option("--dimension", o.dimension, "Hashing embedder dimension");
    cmd->add_option("--conflict", o.conflict, "Conflict modes")->check(CLI::IsMember({"with", "without", "both"}));
    cmd->add_option("--policy", o.policy, "Selection policies")->check(CLI::IsMember({"optimal", "random", "both"}));
    cmd->add_option("--case", o.case_name, "Single case: NoConflictRandom, NoConflictOptimal, ConflictRandom, ConflictOptimal");
    cmd->add_option("--corpus", o.corpus, "Corpus file");
    cmd->add_option("--format", o.format, "Corpus format")->check(CLI::IsMember({"csv", "tsv"}));
    cmd->add_option("--n-train", o.n_train, "Training questions");
    cmd->add_option("--n-test", o.n_test, "Test questions");
    cmd->add_option("--n-opinions", o.n_opinions, "Opinions per question");
    cmd->add_option("--m-candidates", o.m_candidates, "Agreement candidates per opinion set");
    cmd->add_option("--concurrency", o.concurrency, "Maximum concurrent backend calls");
    cmd->add_option("--retries", o.retries, "Retry limit for backend calls");
}

agora::RunConfig resolve_config(const CommonOptions& o) {
    agora::RunConfig cfg = o.config_path.empty() ? agora::RunConfig{} : agora::RunConfig::load(o.config_path);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.split.seed = *o.seed;
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (!o.cache.empty()) cfg.cache_dir = o.cache;
    if (!o.backend.empty()) {
        if (o.backend != cfg.backend.kind && o.model.empty()) cfg.backend.model = o.backend == "mock" ? "mock-v1" : "";
        cfg.backend.kind = o.backend;
    }
    if (!o.model.empty()) cfg.backend.model = o.model;
    if (!o.canned.empty()) cfg.backend.canned_dir = o.canned;
    if (!o.embedder.empty()) cfg.embedder.kind = o.embedder;
    if (!o.embed_model.empty()) cfg.embedder.model = o.embed_model;
    if (o.dimension) cfg.embedder.dimension = *o.dimension;
    if (!o.conflict.empty()) cfg.conflict_modes = agora::parse_conflict_setting(o.conflict);
    if (!o.policy.empty()) cfg.policies = agora::parse_policy_setting(o.policy);
    if (!o.case_name.empty()) {
        const auto id = agora::parse_case_id(o.case_name);
        if (!id) throw agora::Error(agora::ErrorCode::ConfigError, "unknown case " + o.case_name);
        cfg.conflict_modes = {agora::conflict_mode_of(*id)};
        cfg.policies = {agora::policy_kind_of(*id)};
    }
    if (!o.corpus.empty()) cfg.corpus_path = o.corpus;
    if (!o.format.empty()) cfg.format_tag = o.format;
    if (o.n_train) cfg.split.n_train = *o.n_train;
    if (o.n_test) cfg.split.n_test = *o.n_test;
    if (o.n_opinions) cfg.generation.n_opinions = *o.n_opinions;
    if (o.m_candidates) cfg.generation.m_candidates = *o.m_candidates;
    if (o.concurrency) cfg.generation.max_concurrency = *o.concurrency;
    if (o.retries) cfg.generation.retry_limit = *o.retries;
    cfg.validate();
    return cfg;
}

void print_summary(const agora::RunSummary& s) {
    for (auto st : s.executed) std::cout << agora::to_string(st) << ": done\n";
    for (auto st : s.reused) std::cout << agora::to_string(st) << ": up to date\n";
    for (auto st : s.executed) {
        const auto it = s.manifest.stages.find(st);
        if (it != s.manifest.stages.end() && !it->second.stats.empty()) {
            std::cout << "  " << agora::to_string(st) << " " << it->second.stats.dump() << "\n";
        }
    }
    std::cout << "backend calls: " << s.backend_calls << ", cache hits: " << s.cache_hits << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate opinions and agreement candidates, select optimal agreements, and build "
                 "instruction-tuning datasets"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string agreements_path;
    std::string system_id;

    struct StageCommand {
        const char* name;
        const char* help;
        std::vector<agora::Stage> stages;
    };
    const std::vector<StageCommand> stage_commands = {
        {"ingest", "Load the corpus and sample train/test questions", {agora::Stage::Ingest}},
        {"generate-opinions", "Generate opinion sets", {agora::Stage::Opinions}},
        {"generate-candidates", "Generate agreement candidates", {agora::Stage::Candidates}},
        {"select", "Score candidates and pick the best agreement", {agora::Stage::Select}},
        {"build-dataset", "Write the instruction-tuning datasets", {agora::Stage::Build}},
        {"evaluate", "Average agreement scores on the test split", {agora::Stage::Evaluate}},
        {"run", "All stages", std::vector<agora::Stage>(std::begin(agora::kAllStages), std::end(agora::kAllStages))},
    };

    std::vector<std::pair<CLI::App*, const StageCommand*>> commands;
    for (const auto& sc : stage_commands) {
        auto* cmd = app.add_subcommand(sc.name, sc.help);
        add_common(cmd, opts);
        if (std::string_view(sc.name) == "evaluate") {
            cmd->add_option("--agreements", agreements_path,
                            "JSONL of externally produced agreements (question_id, conflict_mode, agreement)");
            cmd->add_option("--system", system_id, "System id for --agreements");
        }
        commands.emplace_back(cmd, &sc);
    }
    auto* report_cmd = app.add_subcommand("report", "Compare evaluation reports in the output directory");
    add_common(report_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (report_cmd->parsed()) {
            const std::string out = opts.out.empty() ? resolve_config(opts).output_dir : opts.out;
            const auto reports = agora::load_reports(out);
            if (reports.empty()) throw agora::Error(agora::ErrorCode::StageDependencyMissing, "no reports in " + out);
            const auto text = agora::format_comparison(agora::compare_reports(reports));
            agora::write_file_atomic((std::filesystem::path(out) / "eval" / "comparison.txt").string(), text);
            std::cout << text;
            return 0;
        }

        for (const auto& [cmd, sc] : commands) {
            if (!cmd->parsed()) continue;
            const auto cfg = resolve_config(opts);
            if (!agreements_path.empty()) {
                if (system_id.empty() || opts.case_name.empty()) {
                    throw agora::Error(agora::ErrorCode::ConfigError, "--agreements needs --system and --case");
                }
                const auto report = agora::evaluate_external(cfg, agreements_path, system_id,
                                                             *agora::parse_case_id(opts.case_name));
                std::cout << system_id << " " << agora::to_string(report.case_id) << " n=" << report.n_samples
                          << " mean=" << report.mean_score << "\n";
                return 0;
            }
            print_summary(agora::run_pipeline(cfg, sc->stages));
            return 0;
        }
    } catch (const agora::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return agora::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
