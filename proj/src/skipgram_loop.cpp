#include "skipgram_loop.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "xlex/error.hpp"
#include "xlex/sgns.hpp"

namespace xlex::detail {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

// Uniform integer in [0, n).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

std::vector<std::int64_t> stream_counts(const TokenStream& stream, std::size_t vocab_size) {
    std::vector<std::int64_t> counts(vocab_size, 0);
    for (auto id : stream.ids) ++counts[static_cast<std::size_t>(id)];
    return counts;
}

// Splits sentences into `parts` contiguous ranges of roughly equal token mass.
std::vector<std::size_t> partition(const TokenStream& stream, std::size_t parts) {
    std::vector<std::size_t> bounds{0};
    const std::size_t n = stream.sentence_count();
    for (std::size_t p = 1; p < parts; ++p) {
        const std::size_t target = stream.size() * p / parts;
        std::size_t s = bounds.back();
        while (s < n && stream.starts[s] < target) ++s;
        bounds.push_back(s);
    }
    bounds.push_back(n);
    return bounds;
}

}  // namespace

UnitLists identity_units(std::size_t vocab_size) {
    UnitLists lists;
    lists.units.resize(vocab_size);
    lists.offsets.resize(vocab_size + 1);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        lists.units[i] = static_cast<std::int32_t>(i);
        lists.offsets[i + 1] = i + 1;
    }
    return lists;
}

SkipGramWeights train_skipgram(const TokenStream& stream, const Vocabulary& vocab,
                               const TrainingConfig& config, const UnitLists& units,
                               std::size_t input_rows, int threads) {
    config.validate();
    if (stream.empty()) throw ParameterError("cannot train on an empty token stream");
    if (vocab.empty()) throw EmptyVocabularyError("cannot train with an empty vocabulary");
    for (auto id : stream.ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
            throw ParameterError("token id " + std::to_string(id) + " outside the vocabulary");
        }
    }

    const auto dim = static_cast<std::size_t>(config.dim);
    const auto vocab_size = vocab.size();

    auto counts = vocab.total_count() > 0 ? vocab.counts() : stream_counts(stream, vocab_size);
    const auto noise = noise_distribution(counts, config.noise_alpha);
    const NoiseSampler sampler(noise);

    std::vector<double> keep_prob;
    if (config.subsample > 0) {
        const double total = static_cast<double>(stream.size());
        const double threshold = config.subsample * total;
        keep_prob.resize(vocab_size, 1.0);
        for (std::size_t w = 0; w < vocab_size; ++w) {
            const double f = static_cast<double>(std::max<std::int64_t>(counts[w], 1));
            keep_prob[w] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
        }
    }

    SkipGramWeights weights;
    weights.input.resize(static_cast<Eigen::Index>(input_rows), static_cast<Eigen::Index>(dim));
    weights.output = FloatMatrix::Zero(static_cast<Eigen::Index>(vocab_size),
                                       static_cast<Eigen::Index>(dim));
    {
        std::mt19937_64 init(config.seed);
        const double scale = 1.0 / static_cast<double>(dim);
        float* p = weights.input.data();
        for (Eigen::Index i = 0; i < weights.input.size(); ++i) {
            p[i] = static_cast<float>((uniform01(init) - 0.5) * scale);
        }
    }

    const LearningRateSchedule schedule{config.initial_lr, config.final_lr};
    const double total_work = static_cast<double>(config.epochs) * static_cast<double>(stream.size());
    std::atomic<std::int64_t> processed{0};

    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                                std::max<std::size_t>(stream.sentence_count(), 1));
    const auto bounds = partition(stream, workers);

    auto work = [&](std::size_t tid) {
        std::mt19937_64 rng(config.seed + 0x9E3779B97F4A7C15ULL * (tid + 1));
        std::vector<float> hidden(dim);
        std::vector<float> step(dim);
        std::vector<float*> targets(static_cast<std::size_t>(config.negatives) + 1);
        std::vector<std::int32_t> kept;
        std::int64_t local = 0;
        double lr = schedule.at(static_cast<double>(processed.load()) / total_work);
        float* in = weights.input.data();
        float* out = weights.output.data();

        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            for (std::size_t s = bounds[tid]; s < bounds[tid + 1]; ++s) {
                const auto sentence = stream.sentence(s);
                kept.clear();
                for (auto w : sentence) {
                    if (keep_prob.empty() || uniform01(rng) < keep_prob[static_cast<std::size_t>(w)]) {
                        kept.push_back(w);
                    }
                }
                for (std::size_t t = 0; t < kept.size(); ++t) {
                    if (workers == 1) {
                        lr = schedule.at(static_cast<double>(local) / total_work);
                    } else if (local >= 10000) {
                        processed.fetch_add(local, std::memory_order_relaxed);
                        local = 0;
                        lr = schedule.at(static_cast<double>(processed.load(std::memory_order_relaxed)) /
                                         total_work);
                    }
                    ++local;

                    const auto center = static_cast<std::size_t>(kept[t]);
                    const auto center_units = units.of(center);
                    const float inv_units = 1.0f / static_cast<float>(center_units.size());
                    const auto b = static_cast<std::size_t>(
                        1 + bounded(rng, static_cast<std::uint64_t>(config.window)));
                    const std::size_t lo = t >= b ? t - b : 0;
                    const std::size_t hi = std::min(kept.size(), t + b + 1);
                    for (std::size_t c = lo; c < hi; ++c) {
                        if (c == t) continue;
                        const auto context = kept[c];
                        std::size_t n_targets = 0;
                        targets[n_targets++] = out + static_cast<std::size_t>(context) * dim;
                        for (int k = 0; k < config.negatives; ++k) {
                            const auto neg = sampler.sample(rng);
                            if (neg == context) continue;
                            targets[n_targets++] = out + static_cast<std::size_t>(neg) * dim;
                        }

                        std::fill(hidden.begin(), hidden.end(), 0.0f);
                        for (auto u : center_units) {
                            const float* row = in + static_cast<std::size_t>(u) * dim;
                            for (std::size_t j = 0; j < dim; ++j) hidden[j] += row[j];
                        }
                        if (center_units.size() > 1) {
                            for (auto& h : hidden) h *= inv_units;
                        }
                        std::fill(step.begin(), step.end(), 0.0f);
                        negative_sampling_step<float>(hidden.data(), step.data(), targets.data(),
                                                      n_targets, dim, static_cast<float>(lr));
                        if (center_units.size() > 1) {
                            for (auto& g : step) g *= inv_units;
                        }
                        for (auto u : center_units) {
                            float* row = in + static_cast<std::size_t>(u) * dim;
                            for (std::size_t j = 0; j < dim; ++j) row[j] += step[j];
                        }
                    }
                }
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        // Lock-free shared updates: workers race on rows without locking.
        std::vector<std::jthread> pool;
        for (std::size_t tid = 0; tid < workers; ++tid) pool.emplace_back(work, tid);
    }
    return weights;
}

}  // namespace xlex::detail
