#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlex/corpus.hpp"
#include "xlex/embedding.hpp"
#include "xlex/error.hpp"

namespace xlex {

// Character n-grams of "<word>", nmin <= n <= nmax, ordered by start position
// and then by length. Characters are Unicode scalar values. The full bracketed
// form is left out: it is the whole-word unit.
std::vector<std::string> extract_ngrams(std::string_view word, int nmin, int nmax);

// Closed-form length of extract_ngrams for a bracketed form of `length` scalars.
std::size_t ngram_count(std::size_t length, int nmin, int nmax);

std::uint32_t fnv1a32(std::string_view bytes);

inline std::int64_t hash_ngram(std::string_view ngram, std::int64_t buckets) {
    return static_cast<std::int64_t>(fnv1a32(ngram) % static_cast<std::uint64_t>(buckets));
}

// Maps every vocabulary word to its units: the whole-word row id, then one
// row id per n-gram bucket. Whole-word rows are [0, |V|), bucket rows are
// [|V|, |V| + buckets).
class NgramIndex {
public:
    NgramIndex() = default;
    NgramIndex(std::shared_ptr<const Vocabulary> vocab, int nmin, int nmax, std::int64_t buckets);

    std::span<const std::int32_t> units(std::size_t word_id) const {
        return {units_.data() + offsets_[word_id], offsets_[word_id + 1] - offsets_[word_id]};
    }
    // Works for any word; out-of-vocabulary words get bucket rows only.
    std::vector<std::int32_t> units_for(std::string_view word) const;

    std::size_t vocab_size() const { return offsets_.size() - 1; }
    std::size_t rows() const { return vocab_size() + static_cast<std::size_t>(buckets_); }
    int nmin() const { return nmin_; }
    int nmax() const { return nmax_; }
    std::int64_t buckets() const { return buckets_; }

private:
    std::shared_ptr<const Vocabulary> vocab_;
    int nmin_ = 3;
    int nmax_ = 6;
    std::int64_t buckets_ = 1;
    std::vector<std::int32_t> units_;
    std::vector<std::size_t> offsets_{0};
};

// Mean of the word's unit rows. Throws RepresentationUnavailableError for an
// out-of-vocabulary word without any n-gram.
template <typename Derived>
Vector word_vector(std::string_view word, const NgramIndex& index,
                   const Eigen::MatrixBase<Derived>& unit_vectors) {
    if (static_cast<std::size_t>(unit_vectors.rows()) != index.rows()) {
        throw ParameterError("unit matrix must have |V| + buckets rows");
    }
    const auto units = index.units_for(word);
    if (units.empty()) {
        throw RepresentationUnavailableError("no representable units for word: " +
                                             std::string(word));
    }
    Vector sum = Vector::Zero(unit_vectors.cols());
    for (auto u : units) sum += unit_vectors.row(u).transpose().template cast<double>();
    return sum / static_cast<double>(units.size());
}

// Loss of one (center, context, negatives) step when the center is the mean of
// `units`; gradients are returned per unit.
struct ComposedPairLoss {
    double loss = 0;
    std::vector<Vector> grad_units;
    Vector grad_context;
    std::vector<Vector> grad_negatives;
};

ComposedPairLoss composed_pair_loss(const std::vector<Vector>& units, const Vector& context,
                                    const std::vector<Vector>& negatives);

// Trained subword model. Holds the n-gram index and all unit vectors so that
// out-of-vocabulary words can be composed on demand.
class SubwordModel {
public:
    SubwordModel(Vocabulary vocab, const TrainingConfig& config, FloatMatrix units);

    const Vocabulary& vocab() const { return *vocab_; }
    const NgramIndex& index() const { return index_; }
    const FloatMatrix& units() const { return units_; }

    Vector word_vector(std::string_view word) const;
    // Composed vectors of the in-vocabulary words, in id order.
    EmbeddingMatrix word_matrix() const;

private:
    std::shared_ptr<const Vocabulary> vocab_;
    NgramIndex index_;
    FloatMatrix units_;
};

SubwordModel train_subword_model(const TokenStream& stream, const Vocabulary& vocab,
                                 const TrainingConfig& config, int threads = 1);

inline EmbeddingMatrix train_subword(const TokenStream& stream, const Vocabulary& vocab,
                                     const TrainingConfig& config, int threads = 1) {
    return train_subword_model(stream, vocab, config, threads).word_matrix();
}

}  // namespace xlex
