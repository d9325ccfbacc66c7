#include "agora/evaluation.hpp"

#include <map>

#include <fmt/format.h>

#include "agora/error.hpp"
#include "agora/parallel.hpp"
#include "agora/text.hpp"

namespace agora {

EvalSample evaluate_sample(const Embedder& embedder, const OpinionSet& opinions, const std::string& agreement) {
    if (opinions.opinions.empty()) throw Error(ErrorCode::EmptyOpinions, "no opinions for '" + opinions.question_id + "'");
    if (is_blank(agreement)) throw Error(ErrorCode::EmptyText, "blank agreement for '" + opinions.question_id + "'");

    EvalSample s;
    s.question_id = opinions.question_id;
    s.conflict_mode = opinions.conflict_mode;
    s.opinions = opinions;
    s.agreement = agreement;

    // Same score matrix computation as selection, one column.
    const auto sel = select_best(embedder, opinions.opinions, {agreement});
    for (const auto& row : sel.score_matrix) s.per_opinion_scores.push_back(row[0]);
    s.raw_sum = sel.per_candidate_totals[0];
    s.sample_score = s.raw_sum / static_cast<double>(s.per_opinion_scores.size());
    return s;
}

EvalReport evaluate_run(const Embedder& embedder, const std::vector<EvalInput>& samples, std::string system_id,
                        CaseId case_id, std::size_t max_concurrency) {
    if (samples.empty()) throw Error(ErrorCode::EmptySampleList, "nothing to evaluate for " + system_id);

    EvalReport report;
    report.system_id = std::move(system_id);
    report.case_id = case_id;
    report.embedder_id = embedder.id();
    report.per_sample = parallel_map<EvalSample>(samples.size(), max_concurrency, [&](std::size_t i) {
        return evaluate_sample(embedder, samples[i].opinions, samples[i].agreement);
    });
    report.n_samples = report.per_sample.size();

    double total = 0.0;
    for (const auto& s : report.per_sample) total += s.sample_score;
    report.mean_score = total / static_cast<double>(report.n_samples);
    return report;
}

ComparisonTable compare_reports(const std::vector<EvalReport>& reports) {
    ComparisonTable table;
    if (reports.empty()) return table;
    table.embedder_id = reports.front().embedder_id;
    for (const auto& r : reports) {
        if (r.embedder_id != table.embedder_id) {
            throw Error(ErrorCode::EmbedderMismatch,
                        "report '" + r.system_id + "' scored by " + r.embedder_id + ", expected " + table.embedder_id);
        }
    }

    std::map<CaseId, double> reference;
    for (const auto& r : reports) {
        const auto [it, inserted] = reference.try_emplace(r.case_id, r.mean_score);
        table.rows.push_back({r.system_id, r.case_id, r.n_samples, r.mean_score, r.mean_score - it->second});
    }

    // First report per (system, case) feeds the policy gains.
    std::vector<std::string> systems;
    std::map<std::pair<std::string, CaseId>, double> first_mean;
    for (const auto& r : reports) {
        if (std::find(systems.begin(), systems.end(), r.system_id) == systems.end()) systems.push_back(r.system_id);
        first_mean.try_emplace({r.system_id, r.case_id}, r.mean_score);
    }
    for (const auto& sys : systems) {
        for (auto mode : {ConflictMode::WithoutConflict, ConflictMode::WithConflict}) {
            const auto rnd = first_mean.find({sys, case_for(mode, SelectionPolicy::Kind::Random)});
            const auto opt = first_mean.find({sys, case_for(mode, SelectionPolicy::Kind::Optimal)});
            if (rnd == first_mean.end() || opt == first_mean.end()) continue;
            table.policy_gains.push_back({sys, mode, rnd->second, opt->second, opt->second - rnd->second});
        }
    }
    return table;
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string samples_csv(const std::vector<EvalReport>& reports) {
    std::string out = "system_id,case_id,question_id,sample_score,raw_sum,n_opinions\n";
    for (const auto& r : reports) {
        for (const auto& s : r.per_sample) {
            out += fmt::format("{},{},{},{},{},{}\n", csv_field(r.system_id), to_string(r.case_id),
                               csv_field(s.question_id), s.sample_score, s.raw_sum, s.per_opinion_scores.size());
        }
    }
    return out;
}

std::string summary_csv(const std::vector<EvalReport>& reports) {
    std::string out = "system_id,case_id,n_samples,mean_score,embedder_id\n";
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},{},{}\n", csv_field(r.system_id), to_string(r.case_id), r.n_samples,
                           r.mean_score, csv_field(r.embedder_id));
    }
    return out;
}

std::string format_comparison(const ComparisonTable& table) {
    std::string out = fmt::format("embedder: {}\n", table.embedder_id);
    out += fmt::format("{:<24} {:<18} {:>8} {:>10} {:>10}\n", "system", "case", "samples", "mean", "delta");
    for (const auto& row : table.rows) {
        out += fmt::format("{:<24} {:<18} {:>8} {:>10.4f} {:>+10.4f}\n", row.system_id, to_string(row.case_id),
                           row.n_samples, row.mean_score, row.delta_vs_reference);
    }
    if (!table.policy_gains.empty()) {
        out += "\noptimal vs random\n";
        for (const auto& g : table.policy_gains) {
            out += fmt::format("{:<24} {:<16} {:.4f} -> {:.4f} ({:+.4f})\n", g.system_id, to_string(g.conflict_mode),
                               g.random_mean, g.optimal_mean, g.gain);
        }
    }
    return out;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["system_id"] = report.system_id;
    j["case_id"] = to_string(report.case_id);
    j["embedder_id"] = report.embedder_id;
    j["n_samples"] = report.n_samples;
    j["mean_score"] = report.mean_score;
    auto& samples = j["per_sample"] = nlohmann::ordered_json::array();
    for (const auto& s : report.per_sample) {
        nlohmann::ordered_json sj;
        sj["question_id"] = s.question_id;
        sj["conflict_mode"] = to_string(s.conflict_mode);
        sj["opinions"] = s.opinions.opinions;
        sj["agreement"] = s.agreement;
        auto& scores = sj["per_opinion_scores"] = nlohmann::ordered_json::array();
        for (const auto& m : s.per_opinion_scores) scores.push_back(m.value());
        sj["raw_sum"] = s.raw_sum;
        sj["sample_score"] = s.sample_score;
        samples.push_back(std::move(sj));
    }
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.system_id = j.at("system_id").get<std::string>();
        const auto case_id = parse_case_id(j.at("case_id").get<std::string>());
        if (!case_id) throw Error(ErrorCode::SchemaViolation, "report: unknown case_id");
        r.case_id = *case_id;
        r.embedder_id = j.at("embedder_id").get<std::string>();
        r.n_samples = j.at("n_samples").get<std::size_t>();
        r.mean_score = j.at("mean_score").get<double>();
        for (const auto& sj : j.at("per_sample")) {
            EvalSample s;
            s.question_id = sj.at("question_id").get<std::string>();
            const auto mode = parse_conflict_mode(sj.at("conflict_mode").get<std::string>());
            if (!mode) throw Error(ErrorCode::SchemaViolation, "report: unknown conflict_mode");
            s.conflict_mode = *mode;
            s.opinions = OpinionSet{s.question_id, *mode, sj.at("opinions").get<std::vector<std::string>>()};
            s.agreement = sj.at("agreement").get<std::string>();
            for (double v : sj.at("per_opinion_scores").get<std::vector<double>>()) s.per_opinion_scores.emplace_back(v);
            s.raw_sum = sj.at("raw_sum").get<double>();
            s.sample_score = sj.at("sample_score").get<double>();
            r.per_sample.push_back(std::move(s));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("report: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("report: ") + e.what());
    }
}

}  // namespace agora
