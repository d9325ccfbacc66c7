#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "agora/dataset.hpp"
#include "agora/scoring.hpp"

namespace agora {

struct EvalSample {
    std::string question_id;
    ConflictMode conflict_mode = ConflictMode::WithoutConflict;
    OpinionSet opinions;
    std::string agreement;
    std::vector<MatScore> per_opinion_scores;
    /// Sum of per_opinion_scores (the selection objective).
    double raw_sum = 0.0;
    /// raw_sum / |opinions|, so scores share a [0, 1] scale whatever the
    /// opinion count.
    double sample_score = 0.0;
};

struct EvalReport {
    std::string system_id;
    CaseId case_id = CaseId::NoConflictOptimal;
    std::size_t n_samples = 0;
    double mean_score = 0.0;
    std::vector<EvalSample> per_sample;
    std::string embedder_id;
};

/// Throws EmptyText for a blank agreement, EmptyOpinions for no opinions.
EvalSample evaluate_sample(const Embedder& embedder, const OpinionSet& opinions, const std::string& agreement);

struct EvalInput {
    OpinionSet opinions;
    std::string agreement;
};

/// Mean of sample scores, reduced in input order. Throws EmptySampleList.
EvalReport evaluate_run(const Embedder& embedder, const std::vector<EvalInput>& samples, std::string system_id,
                        CaseId case_id, std::size_t max_concurrency = 1);

struct ComparisonRow {
    std::string system_id;
    CaseId case_id;
    std::size_t n_samples;
    double mean_score;
    /// mean_score minus the mean of the first report with the same case.
    double delta_vs_reference;
};

/// Optimal minus Random for one system and conflict mode.
struct PolicyGain {
    std::string system_id;
    ConflictMode conflict_mode;
    double random_mean;
    double optimal_mean;
    double gain;
};

struct ComparisonTable {
    std::string embedder_id;
    std::vector<ComparisonRow> rows;
    std::vector<PolicyGain> policy_gains;
};

/// Throws EmbedderMismatch when reports were scored by different embedders.
ComparisonTable compare_reports(const std::vector<EvalReport>& reports);

/// Columns: system_id,case_id,question_id,sample_score,raw_sum,n_opinions.
std::string samples_csv(const std::vector<EvalReport>& reports);
/// Columns: system_id,case_id,n_samples,mean_score,embedder_id.
std::string summary_csv(const std::vector<EvalReport>& reports);
/// Plain-text rendering of a comparison table.
std::string format_comparison(const ComparisonTable& table);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace agora
