#include "agora/dataset.hpp"

#include "agora/error.hpp"
#include "agora/parallel.hpp"
#include "agora/random.hpp"
#include "agora/text.hpp"

namespace agora {

std::string SelectionPolicy::to_string() const {
    return kind == Kind::Optimal ? std::string("optimal") : "random(seed=" + std::to_string(seed) + ")";
}

std::string_view to_string(CaseId id) {
    switch (id) {
        case CaseId::NoConflictRandom: return "NoConflictRandom";
        case CaseId::NoConflictOptimal: return "NoConflictOptimal";
        case CaseId::ConflictRandom: return "ConflictRandom";
        case CaseId::ConflictOptimal: return "ConflictOptimal";
    }
    return "?";
}

std::optional<CaseId> parse_case_id(std::string_view s) {
    for (auto id : kAllCases) {
        if (s == to_string(id)) return id;
    }
    return std::nullopt;
}

ConflictMode conflict_mode_of(CaseId id) {
    return id == CaseId::ConflictRandom || id == CaseId::ConflictOptimal ? ConflictMode::WithConflict
                                                                          : ConflictMode::WithoutConflict;
}

SelectionPolicy::Kind policy_kind_of(CaseId id) {
    return id == CaseId::NoConflictOptimal || id == CaseId::ConflictOptimal ? SelectionPolicy::Kind::Optimal
                                                                             : SelectionPolicy::Kind::Random;
}

CaseId case_for(ConflictMode mode, SelectionPolicy::Kind kind) {
    const bool optimal = kind == SelectionPolicy::Kind::Optimal;
    if (mode == ConflictMode::WithConflict) return optimal ? CaseId::ConflictOptimal : CaseId::ConflictRandom;
    return optimal ? CaseId::NoConflictOptimal : CaseId::NoConflictRandom;
}

std::size_t random_pick(std::uint64_t seed, std::string_view question_id, std::size_t m) {
    if (m == 0) throw Error(ErrorCode::EmptyCandidates, "no candidates for '" + std::string(question_id) + "'");
    Rng rng(derive_seed(seed, question_id));
    return static_cast<std::size_t>(rng.below(m));
}

InstructionRecord build_record(const ConsensusInstance& instance, const SelectionPolicy& policy,
                               const Embedder& embedder) {
    instance.validate();
    const auto& candidates = instance.candidates.candidates;
    if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "instance '" + instance.question.id + "'");

    std::size_t chosen = 0;
    if (policy.kind == SelectionPolicy::Kind::Optimal) {
        chosen = select_best(embedder, instance).best_index;
    } else {
        chosen = random_pick(policy.seed, instance.question.id, candidates.size());
    }

    InstructionRecord rec;
    rec.instruction = std::string(kAgreementInstruction);
    rec.input = format_opinion_lines(instance.opinions.opinions);
    rec.output = candidates[chosen];
    rec.provenance = Provenance{instance.question.id, instance.conflict_mode, policy.to_string(), chosen,
                                embedder.id()};
    validate_record(rec);
    return rec;
}

Dataset build_dataset(const std::vector<ConsensusInstance>& instances, CaseId case_id, const Embedder& embedder,
                      std::uint64_t random_seed, const nlohmann::ordered_json& extra_manifest,
                      std::size_t max_concurrency) {
    const auto mode = conflict_mode_of(case_id);
    const SelectionPolicy policy = policy_kind_of(case_id) == SelectionPolicy::Kind::Optimal
                                       ? SelectionPolicy::optimal()
                                       : SelectionPolicy::random(random_seed);

    std::size_t opinion_count = 0;
    std::size_t candidate_count = 0;
    for (const auto& inst : instances) {
        if (inst.conflict_mode != mode) {
            throw Error(ErrorCode::ModeMismatch, "instance '" + inst.question.id + "' is " +
                                                     std::string(to_string(inst.conflict_mode)) + ", case " +
                                                     std::string(to_string(case_id)) + " needs " +
                                                     std::string(to_string(mode)));
        }
        opinion_count += inst.opinions.opinions.size();
        candidate_count += inst.candidates.candidates.size();
    }

    Dataset ds;
    ds.case_id = case_id;
    ds.records = parallel_map<InstructionRecord>(instances.size(), max_concurrency, [&](std::size_t i) {
        return build_record(instances[i], policy, embedder);
    });

    auto& m = ds.manifest;
    m["case_id"] = to_string(case_id);
    m["conflict_mode"] = to_string(mode);
    m["policy"] = policy.to_string();
    m["embedder_id"] = embedder.id();
    m["record_count"] = ds.records.size();
    m["opinion_count"] = opinion_count;
    m["candidate_count"] = candidate_count;
    if (extra_manifest.is_object()) {
        for (const auto& [key, value] : extra_manifest.items()) m[key] = value;
    }
    return ds;
}

// ---------------------------------------------------------------------------

void validate_record(const InstructionRecord& record) {
    if (record.instruction != kAgreementInstruction) {
        throw Error(ErrorCode::SchemaViolation, "instruction must be \"" + std::string(kAgreementInstruction) +
                                                    "\", got \"" + record.instruction + "\"");
    }
    if (is_blank(record.input)) throw Error(ErrorCode::SchemaViolation, "empty input");
    if (is_blank(record.output)) throw Error(ErrorCode::SchemaViolation, "empty output");
}

nlohmann::ordered_json record_to_json(const InstructionRecord& record) {
    nlohmann::ordered_json j;
    j["instruction"] = record.instruction;
    j["input"] = record.input;
    j["output"] = record.output;
    auto& p = j["provenance"];
    p["question_id"] = record.provenance.question_id;
    p["conflict_mode"] = to_string(record.provenance.conflict_mode);
    p["policy"] = record.provenance.policy;
    p["chosen_candidate_index"] = record.provenance.chosen_candidate_index;
    p["embedder_id"] = record.provenance.embedder_id;
    return j;
}

namespace {

template <typename T>
T required(const nlohmann::json& obj, const char* key, const char* where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorCode::SchemaViolation, std::string(where) + ": missing \"" + key + "\"");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::SchemaViolation, std::string(where) + ": \"" + key + "\" has the wrong type");
    }
}

}  // namespace

InstructionRecord record_from_json(const nlohmann::json& j) {
    InstructionRecord rec;
    rec.instruction = required<std::string>(j, "instruction", "record");
    rec.input = required<std::string>(j, "input", "record");
    rec.output = required<std::string>(j, "output", "record");
    if (j.contains("provenance")) {
        const auto& p = j["provenance"];
        rec.provenance.question_id = required<std::string>(p, "question_id", "provenance");
        const auto mode = parse_conflict_mode(required<std::string>(p, "conflict_mode", "provenance"));
        if (!mode) throw Error(ErrorCode::SchemaViolation, "provenance: unknown conflict_mode");
        rec.provenance.conflict_mode = *mode;
        rec.provenance.policy = required<std::string>(p, "policy", "provenance");
        rec.provenance.chosen_candidate_index = required<std::size_t>(p, "chosen_candidate_index", "provenance");
        rec.provenance.embedder_id = required<std::string>(p, "embedder_id", "provenance");
    }
    validate_record(rec);
    return rec;
}

std::string serialize_dataset(const Dataset& dataset) {
    nlohmann::ordered_json doc;
    doc["manifest"] = dataset.manifest;
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : dataset.records) doc["records"].push_back(record_to_json(r));
    return doc.dump(2) + "\n";
}

std::string serialize_records_jsonl(const std::vector<InstructionRecord>& records) {
    std::string out;
    for (const auto& r : records) out += record_to_json(r).dump() + "\n";
    return out;
}

void export_dataset(const Dataset& dataset, const std::string& path) {
    write_file_atomic(path, serialize_dataset(dataset));
}

void export_records_jsonl(const std::vector<InstructionRecord>& records, const std::string& path) {
    write_file_atomic(path, serialize_records_jsonl(records));
}

Dataset parse_dataset(std::string_view text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("manifest") || !doc["manifest"].is_object()) {
        throw Error(ErrorCode::SchemaViolation, "missing \"manifest\" object");
    }
    if (!doc.contains("records") || !doc["records"].is_array()) {
        throw Error(ErrorCode::SchemaViolation, "missing \"records\" array");
    }

    Dataset ds;
    ds.manifest = doc["manifest"];
    const auto case_name = required<std::string>(nlohmann::json(ds.manifest), "case_id", "manifest");
    const auto case_id = parse_case_id(case_name);
    if (!case_id) throw Error(ErrorCode::SchemaViolation, "manifest: unknown case_id \"" + case_name + "\"");
    ds.case_id = *case_id;

    const auto mode = conflict_mode_of(ds.case_id);
    for (const auto& r : doc["records"]) {
        if (!r.is_object() || !r.contains("provenance")) {
            throw Error(ErrorCode::SchemaViolation, "record: missing \"provenance\"");
        }
        auto rec = record_from_json(nlohmann::json(r));
        if (rec.provenance.conflict_mode != mode) {
            throw Error(ErrorCode::SchemaViolation,
                        "record '" + rec.provenance.question_id + "' conflict mode does not match " + case_name);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Dataset import_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

std::vector<InstructionRecord> import_records_jsonl(const std::string& path) {
    std::vector<InstructionRecord> records;
    for (const auto& line : split_lines(read_file(path))) {
        if (is_blank(line)) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaViolation, std::string("bad JSON line: ") + e.what());
        }
    }
    return records;
}

}  // namespace agora
