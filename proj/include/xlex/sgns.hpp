#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "xlex/corpus.hpp"
#include "xlex/embedding.hpp"

namespace xlex {

// p(w) = count(w)^alpha / sum_v count(v)^alpha
std::vector<double> noise_distribution(std::span<const std::int64_t> counts, double alpha);

// Walker/Vose alias table: O(1) draws from a discrete distribution.
class NoiseSampler {
public:
    NoiseSampler() = default;
    explicit NoiseSampler(std::span<const double> probabilities);

    std::int32_t sample(std::mt19937_64& rng) const {
        const std::uint64_t bits = rng();
        const auto column = static_cast<std::size_t>(((bits >> 32) * prob_.size()) >> 32);
        const double coin = static_cast<double>(bits & 0xffffffffu) * 0x1p-32;
        return coin < prob_[column] ? static_cast<std::int32_t>(column) : alias_[column];
    }

    // The distribution the table actually realizes.
    std::vector<double> probabilities() const;
    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::int32_t> alias_;
};

// Linear decay from initial to final over training progress in [0, 1].
struct LearningRateSchedule {
    double initial = 0.025;
    double final = 1e-4;

    double at(double progress) const {
        progress = std::clamp(progress, 0.0, 1.0);
        return initial + (final - initial) * progress;
    }
};

constexpr double kSigmoidClamp = 30.0;

inline double sigmoid(double x) {
    x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
    return 1.0 / (1.0 + std::exp(-x));
}

// -log sigmoid(x), computed stably.
inline double neg_log_sigmoid(double x) {
    x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
    return std::log1p(std::exp(-x));
}

struct PairLoss {
    double loss = 0;
    Vector grad_center;
    Vector grad_context;
    std::vector<Vector> grad_negatives;
};

// loss = -log s(center.context) - sum_n log s(-center.n), with exact gradients.
PairLoss pair_loss(const Vector& center, const Vector& context, const std::vector<Vector>& negatives);

// One SGD step of negative sampling. targets[0] is the positive context row,
// the rest are negatives. Output rows are updated in place; the step for the
// hidden vector is accumulated into hidden_step (caller applies it).
template <typename T>
void negative_sampling_step(const T* hidden, T* hidden_step, T* const* targets,
                            std::size_t n_targets, std::size_t dim, T lr) {
    for (std::size_t t = 0; t < n_targets; ++t) {
        T* out = targets[t];
        T f = 0;
        for (std::size_t j = 0; j < dim; ++j) f += hidden[j] * out[j];
        const T label = t == 0 ? T(1) : T(0);
        const T g = lr * (label - static_cast<T>(sigmoid(static_cast<double>(f))));
        for (std::size_t j = 0; j < dim; ++j) hidden_step[j] += g * out[j];
        for (std::size_t j = 0; j < dim; ++j) out[j] += g * hidden[j];
    }
}

// Both weight matrices of a trained model. Only `input` is published.
struct SgnsModel {
    EmbeddingMatrix input;
    Matrix output;
};

// Skip-gram with negative sampling. threads > 1 runs lock-free (racy) updates
// and is not reproducible; threads == 1 is bit-deterministic for a given seed.
SgnsModel train_sgns_model(const TokenStream& stream, const Vocabulary& vocab,
                           const TrainingConfig& config, int threads = 1);

inline EmbeddingMatrix train_sgns(const TokenStream& stream, const Vocabulary& vocab,
                                  const TrainingConfig& config, int threads = 1) {
    return train_sgns_model(stream, vocab, config, threads).input;
}

}  // namespace xlex
