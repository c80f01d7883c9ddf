#include "xlex/sgns.hpp"

#include <cmath>
#include <numeric>

#include "skipgram_loop.hpp"
#include "xlex/error.hpp"

namespace xlex {

std::vector<double> noise_distribution(std::span<const std::int64_t> counts, double alpha) {
    if (alpha < 0) throw ParameterError("noise exponent must be non-negative");
    if (counts.empty()) throw EmptyVocabularyError("noise distribution over an empty vocabulary");
    std::vector<double> p(counts.size());
    double total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        p[i] = std::pow(static_cast<double>(counts[i]), alpha);
        total += p[i];
    }
    if (!(total > 0)) throw ParameterError("noise distribution has zero mass");
    for (auto& v : p) v /= total;
    return p;
}

NoiseSampler::NoiseSampler(std::span<const double> probabilities) {
    const std::size_t n = probabilities.size();
    if (n == 0) throw EmptyVocabularyError("noise sampler over an empty distribution");
    prob_.assign(n, 1.0);
    alias_.resize(n);
    std::iota(alias_.begin(), alias_.end(), 0);

    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small;
    std::vector<std::size_t> large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = probabilities[i] / total * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = static_cast<std::int32_t>(l);
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : small) prob_[i] = 1.0;
    for (auto i : large) prob_[i] = 1.0;
}

std::vector<double> NoiseSampler::probabilities() const {
    const double n = static_cast<double>(prob_.size());
    std::vector<double> p(prob_.size(), 0.0);
    for (std::size_t i = 0; i < prob_.size(); ++i) {
        p[i] += prob_[i] / n;
        p[static_cast<std::size_t>(alias_[i])] += (1.0 - prob_[i]) / n;
    }
    return p;
}

PairLoss pair_loss(const Vector& center, const Vector& context, const std::vector<Vector>& negatives) {
    const auto d = center.size();
    if (context.size() != d) throw DimensionMismatchError(center.size(), context.size());
    PairLoss r;
    r.grad_center = Vector::Zero(d);

    const double pos = center.dot(context);
    r.loss = neg_log_sigmoid(pos);
    // d/dx -log s(x) = -(1 - s(x))
    const double g_pos = -(1.0 - sigmoid(pos));
    r.grad_center += g_pos * context;
    r.grad_context = g_pos * center;

    for (const auto& n : negatives) {
        if (n.size() != d) throw DimensionMismatchError(center.size(), n.size());
        const double f = center.dot(n);
        r.loss += neg_log_sigmoid(-f);
        // d/dx -log s(-x) = s(x)
        const double g = sigmoid(f);
        r.grad_center += g * n;
        r.grad_negatives.push_back(g * center);
    }
    return r;
}

SgnsModel train_sgns_model(const TokenStream& stream, const Vocabulary& vocab,
                           const TrainingConfig& config, int threads) {
    if (config.mode != TrainingMode::skipgram) {
        throw ParameterError("train_sgns requires mode=skipgram");
    }
    auto weights = detail::train_skipgram(stream, vocab, config, detail::identity_units(vocab.size()),
                                          vocab.size(), threads);
    return {EmbeddingMatrix(vocab, weights.input.cast<double>()), weights.output.cast<double>()};
}

}  // namespace xlex
