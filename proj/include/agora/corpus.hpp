#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace agora {

/// One question of a topic-classification QA corpus.
struct Question {
    std::string id;
    int topic_label = 0;
    std::string title;
    std::string content;

    bool operator==(const Question&) const = default;
};

/// Questions in input-file order with unique ids.
struct QuestionCorpus {
    std::vector<Question> questions;
    std::string source_path;
    std::string format_tag;

    std::size_t size() const { return questions.size(); }
    bool operator==(const QuestionCorpus&) const = default;
};

struct SplitSpec {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;
};

/// Parses a "csv" (RFC 4180 quoting) or "tsv" (no quoting, no embedded
/// tabs) file. Each record has id, topic_label, title, content; an optional
/// fifth "best answer" field is accepted and dropped. Blank lines are
/// skipped. Throws FileNotFound, MalformedRow (with 1-based row number) or
/// DuplicateId.
QuestionCorpus load_corpus(const std::string& path, const std::string& format_tag);

/// Same as load_corpus but parses in-memory text.
QuestionCorpus parse_corpus(std::string_view text, const std::string& format_tag,
                            const std::string& source_path = "<memory>");

/// Rejects duplicate ids and blank titles.
void validate_corpus(const QuestionCorpus& corpus);

/// Draws n_train + n_test distinct questions uniformly without replacement
/// (Rng seeded with spec.seed); the first n_train draws form the training
/// set. Each side keeps corpus order. Throws InsufficientCorpus.
std::pair<QuestionCorpus, QuestionCorpus> sample_split(const QuestionCorpus& corpus,
                                                       const SplitSpec& spec);

std::map<int, std::size_t> topic_distribution(const QuestionCorpus& corpus);

}  // namespace agora
