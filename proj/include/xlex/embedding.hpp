#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlex/corpus.hpp"

namespace xlex {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TrainingMode { skipgram, subword_skipgram };

std::string to_string(TrainingMode mode);
TrainingMode parse_training_mode(std::string_view text);

// Hyperparameters for both trainers. dim, window, min_count and epochs default
// to the published replication settings; the rest are the usual defaults of
// skip-gram with negative sampling and its subword extension.
struct TrainingConfig {
    TrainingMode mode = TrainingMode::skipgram;
    int dim = 300;
    int window = 4;
    std::int64_t min_count = 1;
    int epochs = 100;
    int negatives = 5;
    double initial_lr = 0.025;
    double final_lr = 1e-4;
    double noise_alpha = 0.75;
    // Frequent-word subsampling threshold; 0 disables it.
    double subsample = 0.0;
    std::uint64_t seed = 1;
    int nmin = 3;
    int nmax = 6;
    std::int64_t buckets = 2'000'000;

    // Throws ParameterError on any violated bound.
    void validate() const;
};

// |V| x d matrix whose row i is the vector of vocab.word(i).
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(Vocabulary vocab, Matrix values);

    const Vocabulary& vocab() const { return vocab_; }
    const Matrix& values() const { return values_; }
    std::size_t size() const { return vocab_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }

    auto row(std::size_t id) const { return values_.row(static_cast<Eigen::Index>(id)); }
    // Throws UnknownWordError.
    Vector vector(std::string_view word) const;

private:
    Vocabulary vocab_;
    Matrix values_;
};

struct Neighbor {
    std::string word;
    double cosine;
};

// The k words closest to `word` by cosine, excluding the word itself. Ties go
// to the lower id.
std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& m, std::string_view word,
                                        std::size_t k);

double cosine(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// Text interchange format: a "|V| d" header, then one "word v1 ... vd" line per
// row in id order. Values are written with 9 significant digits.
void save_text(const EmbeddingMatrix& m, std::ostream& out);
void save_text(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_text(std::istream& in);
EmbeddingMatrix load_text(const std::filesystem::path& path);

}  // namespace xlex
