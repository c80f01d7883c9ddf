#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlex/embedding.hpp"

namespace xlex {

// Self-learning settings. Only csls_k, vocab_cutoff, max_iterations,
// convergence_tol, orthogonal and seed are usually touched.
struct AlignmentConfig {
    int csls_k = 10;
    // Most frequent words taking part in dictionary induction.
    std::size_t vocab_cutoff = 20'000;
    // Most frequent words used by the structural initialization.
    std::size_t init_vocab = 4'000;
    int max_iterations = 500;
    // Minimal relative improvement of the objective that counts as progress.
    double convergence_tol = 1e-6;
    // Induction dropout: start keeping 10% of candidates, double the keep
    // probability after `stagnation_window` iterations without progress.
    double initial_keep_prob = 0.1;
    double keep_prob_growth = 2.0;
    int stagnation_window = 50;
    // false selects whitening + re-weighting + de-whitening for the final map.
    bool orthogonal = true;
    std::uint64_t seed = 0;
    // Self-learning runs with seeds seed, seed+1, ...; the highest final
    // objective wins. 1 is the plain single run.
    int restarts = 1;
    int threads = 1;

    void validate() const;
};

struct DictionaryPair {
    std::int32_t source;
    std::int32_t target;
    friend bool operator==(const DictionaryPair&, const DictionaryPair&) = default;
};
using Dictionary = std::vector<DictionaryPair>;

struct AlignmentModel {
    Matrix w_source;
    Matrix w_target;
    Dictionary induced_dictionary;
    // Mean of the forward and backward best-match cosine over the cutoff.
    double objective = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> log;
};

// Rows to unit length, columns to zero mean, rows to unit length again.
// Throws DegenerateVectorError naming the first zero row.
EmbeddingMatrix normalize(const EmbeddingMatrix& m);

// CSLS(x, y) = 2 cos(x, y) - r_T(x) - r_S(y), with r_T(x) the mean of the k
// largest entries of row x and r_S(y) the mean of the k largest of column y.
Matrix csls(const Matrix& sim, int k);

// Mean of the k largest values; exact sort order is used for the summation.
double top_k_mean(std::vector<double>& values, std::size_t k);

struct Mapping {
    Matrix w_source;
    Matrix w_target;
    // Fewer dictionary pairs than dimensions: the map is not unique.
    bool underdetermined = false;
};

// Orthogonal Procrustes on the dictionary rows: w_source = U V^T from the
// SVD of X_d^T Z_d, w_target = I.
Mapping solve_mapping(const Matrix& x, const Matrix& z, const Dictionary& dictionary);

// Whitening, orthogonal mapping, symmetric re-weighting and de-whitening.
Mapping solve_advanced_mapping(const Matrix& x, const Matrix& z, const Dictionary& dictionary);

struct InducedDictionary {
    Dictionary pairs;  // forward pairs first, then backward pairs
    double objective = 0;
};

// CSLS-argmax dictionary in both directions over the first vocab_cutoff rows
// of each (row-normalized) mapped space. With keep_prob < 1 each candidate
// survives with that probability; the draw is keyed by (seed, round).
InducedDictionary induce_dictionary(const Matrix& mapped_x, const Matrix& mapped_z,
                                    const AlignmentConfig& config, double keep_prob = 1.0,
                                    std::uint64_t round = 0);

// Seed dictionary from intra-lingual similarity structure; needs no
// cross-lingual signal. Inputs must be normalized.
Dictionary initial_dictionary(const Matrix& x, const Matrix& z, const AlignmentConfig& config);

// Full unsupervised pipeline. A seed dictionary, when given, replaces the
// structural initialization.
AlignmentModel align(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                     const AlignmentConfig& config,
                     const std::optional<Dictionary>& seed_dictionary = std::nullopt);

EmbeddingMatrix project(const EmbeddingMatrix& m, const Matrix& w);

// Mean cosine of dictionary pairs.
double dictionary_similarity(const Matrix& x, const Matrix& z, const Dictionary& dictionary);

enum class Retrieval { nearest_neighbor, csls };

// Word translation accuracy: share of gold source words whose retrieved
// target is one of their gold translations.
double precision_at_1(const EmbeddingMatrix& mapped_source, const EmbeddingMatrix& mapped_target,
                      const Dictionary& gold, Retrieval retrieval = Retrieval::csls,
                      int csls_k = 10, int threads = 1);

}  // namespace xlex
