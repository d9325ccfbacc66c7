#include "agora/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <unordered_set>

#include "agora/error.hpp"
#include "agora/random.hpp"
#include "agora/text.hpp"

namespace agora {

namespace {

using Record = std::vector<std::string>;

[[noreturn]] void malformed(std::size_t row, const std::string& reason) {
    throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + reason);
}

// RFC 4180: fields separated by commas, optionally enclosed in double quotes,
// quotes inside a quoted field doubled; quoted fields may span lines.
std::vector<Record> parse_csv(std::string_view text) {
    std::vector<Record> rows;
    Record row;
    std::string field;
    bool quoted = false;      // inside an open quoted field
    bool was_quoted = false;  // current field started with a quote
    bool row_has_data = false;
    std::size_t i = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        if (row_has_data) rows.push_back(std::move(row));
        row.clear();
        row_has_data = false;
    };

    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || was_quoted) malformed(rows.size() + 1, "stray quote inside unquoted field");
                quoted = was_quoted = row_has_data = true;
                break;
            case ',':
                row_has_data = true;
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                if (was_quoted) malformed(rows.size() + 1, "text after closing quote");
                field.push_back(c);
                row_has_data = true;
        }
        ++i;
    }
    if (quoted) malformed(rows.size() + 1, "unterminated quoted field");
    if (row_has_data || !field.empty()) end_row();
    return rows;
}

std::vector<Record> parse_tsv(std::string_view text) {
    std::vector<Record> rows;
    for (const auto& line : split_lines(text)) {
        if (line.empty()) continue;
        Record row;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            row.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Question to_question(Record& rec, std::size_t row) {
    if (rec.size() != 4 && rec.size() != 5) {
        malformed(row, "expected 4 or 5 fields, found " + std::to_string(rec.size()));
    }
    Question q;
    q.id = std::string(trim(rec[0]));
    if (q.id.empty()) malformed(row, "empty id");

    const auto label = trim(rec[1]);
    int value = -1;
    const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (label.empty() || ec != std::errc{} || ptr != label.data() + label.size() || value < 0) {
        malformed(row, "topic_label '" + std::string(label) + "' is not a non-negative integer");
    }
    q.topic_label = value;
    q.title = std::move(rec[2]);
    if (is_blank(q.title)) malformed(row, "blank title");
    q.content = std::move(rec[3]);
    return q;
}

}  // namespace

QuestionCorpus parse_corpus(std::string_view text, const std::string& format_tag,
                            const std::string& source_path) {
    std::vector<Record> rows;
    if (format_tag == "csv") {
        rows = parse_csv(text);
    } else if (format_tag == "tsv") {
        rows = parse_tsv(text);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown corpus format '" + format_tag + "' (expected csv or tsv)");
    }

    QuestionCorpus corpus;
    corpus.source_path = source_path;
    corpus.format_tag = format_tag;
    corpus.questions.reserve(rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto q = to_question(rows[r], r + 1);
        if (!seen.insert(q.id).second) {
            throw Error(ErrorCode::DuplicateId, "id '" + q.id + "' repeated at row " + std::to_string(r + 1));
        }
        corpus.questions.push_back(std::move(q));
    }
    return corpus;
}

QuestionCorpus load_corpus(const std::string& path, const std::string& format_tag) {
    if (!std::filesystem::is_regular_file(path)) {
        throw Error(ErrorCode::FileNotFound, path);
    }
    return parse_corpus(read_file(path), format_tag, path);
}

void validate_corpus(const QuestionCorpus& corpus) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < corpus.questions.size(); ++i) {
        const auto& q = corpus.questions[i];
        if (is_blank(q.title)) malformed(i + 1, "blank title");
        if (!seen.insert(q.id).second) throw Error(ErrorCode::DuplicateId, "id '" + q.id + "'");
    }
}

std::pair<QuestionCorpus, QuestionCorpus> sample_split(const QuestionCorpus& corpus,
                                                       const SplitSpec& spec) {
    if (spec.n_train == 0 || spec.n_test == 0) {
        throw Error(ErrorCode::ConfigError, "n_train and n_test must be positive");
    }
    const std::size_t want = spec.n_train + spec.n_test;
    if (want > corpus.size()) {
        throw Error(ErrorCode::InsufficientCorpus, "need " + std::to_string(want) + " questions, corpus has " +
                                                       std::to_string(corpus.size()));
    }

    Rng rng(spec.seed);
    auto picks = rng.sample_without_replacement(corpus.size(), want);
    std::vector<std::size_t> train_idx(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(spec.n_train));
    std::vector<std::size_t> test_idx(picks.begin() + static_cast<std::ptrdiff_t>(spec.n_train), picks.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto gather = [&](const std::vector<std::size_t>& idx) {
        QuestionCorpus out;
        out.source_path = corpus.source_path;
        out.format_tag = corpus.format_tag;
        out.questions.reserve(idx.size());
        for (auto i : idx) out.questions.push_back(corpus.questions[i]);
        return out;
    };
    return {gather(train_idx), gather(test_idx)};
}

std::map<int, std::size_t> topic_distribution(const QuestionCorpus& corpus) {
    std::map<int, std::size_t> counts;
    for (const auto& q : corpus.questions) ++counts[q.topic_label];
    return counts;
}

}  // namespace agora
