#include "xlex/subword.hpp"

#include <limits>

#include <unicode/utf8.h>

#include "skipgram_loop.hpp"
#include "xlex/error.hpp"
#include "xlex/sgns.hpp"

namespace xlex {

namespace {

// Byte offsets of every scalar boundary in s, including s.size().
std::vector<std::size_t> scalar_boundaries(std::string_view s) {
    std::vector<std::size_t> bounds;
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto length = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < length) {
        bounds.push_back(static_cast<std::size_t>(i));
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(p, i, length, c);
        if (c < 0) {
            throw DecodeError(static_cast<std::size_t>(start),
                              "invalid UTF-8 at byte offset " + std::to_string(start));
        }
    }
    bounds.push_back(s.size());
    return bounds;
}

}  // namespace

std::vector<std::string> extract_ngrams(std::string_view word, int nmin, int nmax) {
    if (word.empty()) throw ParameterError("cannot extract n-grams of an empty word");
    if (nmin < 1 || nmin > nmax) throw ParameterError("n-gram bounds must satisfy 0 < nmin <= nmax");
    std::string bracketed;
    bracketed.reserve(word.size() + 2);
    bracketed += '<';
    bracketed += word;
    bracketed += '>';
    const auto bounds = scalar_boundaries(bracketed);
    const std::size_t length = bounds.size() - 1;

    std::vector<std::string> grams;
    for (std::size_t i = 0; i < length; ++i) {
        for (auto n = static_cast<std::size_t>(nmin);
             n <= static_cast<std::size_t>(nmax) && i + n <= length; ++n) {
            if (i == 0 && n == length) continue;
            grams.push_back(bracketed.substr(bounds[i], bounds[i + n] - bounds[i]));
        }
    }
    return grams;
}

std::size_t ngram_count(std::size_t length, int nmin, int nmax) {
    std::size_t count = 0;
    for (auto n = static_cast<std::size_t>(nmin); n <= static_cast<std::size_t>(nmax) && n <= length;
         ++n) {
        count += length - n + 1;
    }
    if (static_cast<std::size_t>(nmin) <= length && static_cast<std::size_t>(nmax) >= length) --count;
    return count;
}

std::uint32_t fnv1a32(std::string_view bytes) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

NgramIndex::NgramIndex(std::shared_ptr<const Vocabulary> vocab, int nmin, int nmax,
                       std::int64_t buckets)
    : vocab_(std::move(vocab)), nmin_(nmin), nmax_(nmax), buckets_(buckets) {
    if (buckets_ < 1) throw ParameterError("buckets must be positive");
    if (nmin_ < 1 || nmin_ > nmax_) throw ParameterError("n-gram bounds must satisfy 0 < nmin <= nmax");
    const auto v = static_cast<std::int64_t>(vocab_->size());
    if (v + buckets_ > std::numeric_limits<std::int32_t>::max()) {
        throw ParameterError("|V| + buckets exceeds the 32-bit row index range");
    }
    offsets_.reserve(vocab_->size() + 1);
    for (std::size_t id = 0; id < vocab_->size(); ++id) {
        units_.push_back(static_cast<std::int32_t>(id));
        for (const auto& g : extract_ngrams(vocab_->word(id), nmin_, nmax_)) {
            units_.push_back(static_cast<std::int32_t>(v + hash_ngram(g, buckets_)));
        }
        offsets_.push_back(units_.size());
    }
}

std::vector<std::int32_t> NgramIndex::units_for(std::string_view word) const {
    if (auto id = vocab_->find(word)) {
        auto u = units(static_cast<std::size_t>(*id));
        return {u.begin(), u.end()};
    }
    std::vector<std::int32_t> out;
    if (word.empty()) return out;
    const auto v = static_cast<std::int64_t>(vocab_->size());
    for (const auto& g : extract_ngrams(word, nmin_, nmax_)) {
        out.push_back(static_cast<std::int32_t>(v + hash_ngram(g, buckets_)));
    }
    return out;
}

ComposedPairLoss composed_pair_loss(const std::vector<Vector>& units, const Vector& context,
                                    const std::vector<Vector>& negatives) {
    if (units.empty()) throw ParameterError("a composed word needs at least one unit");
    Vector hidden = Vector::Zero(units.front().size());
    for (const auto& u : units) {
        if (u.size() != hidden.size()) throw DimensionMismatchError(hidden.size(), u.size());
        hidden += u;
    }
    const double inv = 1.0 / static_cast<double>(units.size());
    hidden *= inv;
    auto pl = pair_loss(hidden, context, negatives);
    ComposedPairLoss r;
    r.loss = pl.loss;
    r.grad_units.assign(units.size(), pl.grad_center * inv);
    r.grad_context = std::move(pl.grad_context);
    r.grad_negatives = std::move(pl.grad_negatives);
    return r;
}

SubwordModel::SubwordModel(Vocabulary vocab, const TrainingConfig& config, FloatMatrix units)
    : vocab_(std::make_shared<const Vocabulary>(std::move(vocab))),
      index_(vocab_, config.nmin, config.nmax, config.buckets),
      units_(std::move(units)) {
    if (static_cast<std::size_t>(units_.rows()) != index_.rows()) {
        throw ParameterError("unit matrix must have |V| + buckets rows");
    }
}

Vector SubwordModel::word_vector(std::string_view word) const {
    return xlex::word_vector(word, index_, units_);
}

EmbeddingMatrix SubwordModel::word_matrix() const {
    Matrix words(static_cast<Eigen::Index>(vocab_->size()), units_.cols());
    for (std::size_t id = 0; id < vocab_->size(); ++id) {
        const auto u = index_.units(id);
        Vector sum = Vector::Zero(units_.cols());
        for (auto r : u) sum += units_.row(r).transpose().cast<double>();
        words.row(static_cast<Eigen::Index>(id)) = sum.transpose() / static_cast<double>(u.size());
    }
    return EmbeddingMatrix(*vocab_, std::move(words));
}

SubwordModel train_subword_model(const TokenStream& stream, const Vocabulary& vocab,
                                 const TrainingConfig& config, int threads) {
    if (config.mode != TrainingMode::subword_skipgram) {
        throw ParameterError("train_subword requires mode=subword-skipgram");
    }
    config.validate();
    auto shared = std::make_shared<const Vocabulary>(vocab);
    const NgramIndex index(shared, config.nmin, config.nmax, config.buckets);
    detail::UnitLists lists;
    lists.offsets.reserve(vocab.size() + 1);
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        const auto u = index.units(id);
        lists.units.insert(lists.units.end(), u.begin(), u.end());
        lists.offsets.push_back(lists.units.size());
    }
    auto weights = detail::train_skipgram(stream, vocab, config, lists, index.rows(), threads);
    return SubwordModel(vocab, config, std::move(weights.input));
}

}  // namespace xlex
