#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlex/embedding.hpp"

namespace xlex {

struct WordPair {
    std::string first;
    std::string second;
    double human_score = 0;
};

struct SimilarityDataset {
    std::string name;
    std::vector<WordPair> pairs;
    // Rows dropped because a word did not preprocess to exactly one token, or
    // because the unordered pair was already present.
    std::size_t rejected_rows = 0;
};

// Three tab- or comma-separated columns "word1 word2 score"; a first row whose
// score column is not numeric is treated as a header. Throws FormatError with
// the line number on malformed rows.
SimilarityDataset load_dataset(std::istream& in, std::string name);
SimilarityDataset load_dataset(const std::filesystem::path& path);

// Spearman rank correlation: Pearson correlation of fractional ranks.
// Throws UndefinedCorrelationError for fewer than 2 values or a constant ranking.
double spearman(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

// Two spaces that share a common coordinate system. For a monolingual
// evaluation both refer to the same matrix; cross-lingually the first word of
// every pair is looked up in `first`, the second in `second`.
struct EmbeddingLookup {
    const EmbeddingMatrix& first;
    const EmbeddingMatrix& second;

    explicit EmbeddingLookup(const EmbeddingMatrix& m) : first(m), second(m) {}
    EmbeddingLookup(const EmbeddingMatrix& a, const EmbeddingMatrix& b) : first(a), second(b) {}
};

struct PairScore {
    WordPair pair;
    double model_cosine = 0;
};

// Cosine on the stored vectors for every pair whose words are both present.
std::vector<PairScore> pair_scores(const EmbeddingLookup& lookup, const SimilarityDataset& d);

struct EvalReport {
    std::string model_id;
    std::string dataset;
    std::size_t pairs_total = 0;
    std::size_t pairs_covered = 0;
    double coverage_percent = 0;
    // Distinct dataset words found in the model, as a share of all of them.
    std::size_t words_total = 0;
    std::size_t words_covered = 0;
    double word_coverage_percent = 0;
    std::optional<double> spearman_percent;
    std::size_t rejected_rows = 0;
    // Set when the correlation (or the whole row) could not be computed.
    std::string error;
};

// Never throws for coverage problems: an undefined correlation is reported in
// the `error` field.
EvalReport evaluate(const EmbeddingLookup& lookup, const SimilarityDataset& d, std::string model_id);

// Plain-text table with Coverage and Spearman columns to two decimals.
void write_report_table(std::ostream& out, const std::vector<EvalReport>& rows,
                        const std::string& title = "Model");
// "model<TAB>dataset<TAB>coverage<TAB>spearman" per report.
void write_report_lines(std::ostream& out, const std::vector<EvalReport>& rows);

}  // namespace xlex
