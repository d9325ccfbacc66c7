#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/generation.hpp"
#include "agora/scoring.hpp"

namespace agora {

inline constexpr std::string_view kAgreementInstruction = "Find an agreement among the following opinions.";

/// How the training output is chosen among an instance's candidates.
struct SelectionPolicy {
    enum class Kind { Optimal, Random };
    Kind kind = Kind::Optimal;
    /// Only meaningful for Random.
    std::uint64_t seed = 0;

    static SelectionPolicy optimal() { return {Kind::Optimal, 0}; }
    static SelectionPolicy random(std::uint64_t seed) { return {Kind::Random, seed}; }

    /// "optimal" or "random(seed=N)".
    std::string to_string() const;
    bool operator==(const SelectionPolicy&) const = default;
};

enum class CaseId { NoConflictRandom, NoConflictOptimal, ConflictRandom, ConflictOptimal };

inline constexpr CaseId kAllCases[] = {CaseId::NoConflictRandom, CaseId::NoConflictOptimal, CaseId::ConflictRandom,
                                       CaseId::ConflictOptimal};

std::string_view to_string(CaseId id);
std::optional<CaseId> parse_case_id(std::string_view s);
ConflictMode conflict_mode_of(CaseId id);
SelectionPolicy::Kind policy_kind_of(CaseId id);
CaseId case_for(ConflictMode mode, SelectionPolicy::Kind kind);

struct Provenance {
    std::string question_id;
    ConflictMode conflict_mode = ConflictMode::WithoutConflict;
    std::string policy;
    std::size_t chosen_candidate_index = 0;
    std::string embedder_id;

    bool operator==(const Provenance&) const = default;
};

struct InstructionRecord {
    std::string instruction;
    std::string input;
    std::string output;
    Provenance provenance;

    bool operator==(const InstructionRecord&) const = default;
};

struct Dataset {
    CaseId case_id = CaseId::NoConflictOptimal;
    std::vector<InstructionRecord> records;
    nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

    bool operator==(const Dataset&) const = default;
};

/// Index picked by a Random policy: uniform over [0, m) from an Rng seeded
/// with derive_seed(seed, question_id), so each instance's pick does not
/// depend on which other instances exist.
std::size_t random_pick(std::uint64_t seed, std::string_view question_id, std::size_t m);

/// Input is the opinions as "Opinion k: ..." lines; output is the chosen
/// candidate. Throws EmptyCandidates and any scoring error.
InstructionRecord build_record(const ConsensusInstance& instance, const SelectionPolicy& policy,
                               const Embedder& embedder);

/// One record per instance in input order. Every instance must have the
/// case's conflict mode (ModeMismatch otherwise). `random_seed` seeds the
/// Random cases; `extra_manifest` entries are appended to the manifest.
Dataset build_dataset(const std::vector<ConsensusInstance>& instances, CaseId case_id, const Embedder& embedder,
                      std::uint64_t random_seed,
                      const nlohmann::ordered_json& extra_manifest = nlohmann::ordered_json::object(),
                      std::size_t max_concurrency = 1);

/// Checks the record invariants; throws SchemaViolation.
void validate_record(const InstructionRecord& record);

nlohmann::ordered_json record_to_json(const InstructionRecord& record);
InstructionRecord record_from_json(const nlohmann::json& j);

/// {"manifest": {...}, "records": [...]} pretty-printed with a trailing
/// newline; identical datasets give identical bytes.
std::string serialize_dataset(const Dataset& dataset);
/// One record object per line, no manifest.
std::string serialize_records_jsonl(const std::vector<InstructionRecord>& records);

void export_dataset(const Dataset& dataset, const std::string& path);
void export_records_jsonl(const std::vector<InstructionRecord>& records, const std::string& path);

Dataset parse_dataset(std::string_view text);
/// Throws IoFailure or SchemaViolation.
Dataset import_dataset(const std::string& path);
std::vector<InstructionRecord> import_records_jsonl(const std::string& path);

}  // namespace agora
