#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xlex/corpus.hpp"
#include "xlex/embedding.hpp"

namespace xlex::detail {

// Per-word lists of input rows ("units"). The center-word vector is the mean of
// its units: a single row for plain skip-gram, word + n-gram rows for subwords.
struct UnitLists {
    std::vector<std::int32_t> units;
    std::vector<std::size_t> offsets{0};

    std::span<const std::int32_t> of(std::size_t word) const {
        return {units.data() + offsets[word], offsets[word + 1] - offsets[word]};
    }
};

UnitLists identity_units(std::size_t vocab_size);

struct SkipGramWeights {
    FloatMatrix input;   // one row per unit
    FloatMatrix output;  // one row per word (context vectors)
};

// Shared skip-gram / negative-sampling training loop.
SkipGramWeights train_skipgram(const TokenStream& stream, const Vocabulary& vocab,
                               const TrainingConfig& config, const UnitLists& units,
                               std::size_t input_rows, int threads);

}  // namespace xlex::detail
