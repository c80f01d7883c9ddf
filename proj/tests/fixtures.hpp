#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "xlex/align.hpp"
#include "xlex/corpus.hpp"
#include "xlex/embedding.hpp"

namespace xlex::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> n(0.0, sigma);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

inline Matrix random_unit_rows(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    Matrix m = gaussian(rows, cols, rng);
    m.rowwise().normalize();
    return m;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian with the sign of R's
// diagonal folded into Q.
inline Matrix random_orthogonal(Eigen::Index d, std::mt19937_64& rng) {
    const Matrix g = gaussian(d, d, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (r(j, j) < 0) q.col(j) *= -1;
    }
    return q;
}

inline Vocabulary numbered_vocab(const std::string& prefix, std::size_t n) {
    std::vector<std::string> words;
    words.reserve(n);
    for (std::size_t i = 0; i < n; ++i) words.push_back(prefix + std::to_string(i));
    return Vocabulary(std::move(words));
}

struct PlantedRotation {
    EmbeddingMatrix source;
    EmbeddingMatrix target;
    Matrix rotation;
    Dictionary gold;  // source row -> target row holding its rotated copy
};

// Target = rotated source with shuffled rows, optionally perturbed by
// per-entry Gaussian noise and re-normalized.
inline PlantedRotation planted_rotation(Eigen::Index n, Eigen::Index d, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Matrix x = random_unit_rows(n, d, rng);
    const Matrix r = random_orthogonal(d, rng);
    std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix rotated = x * r;
    Matrix z(n, d);
    Dictionary gold;
    for (Eigen::Index i = 0; i < n; ++i) {
        z.row(perm[static_cast<std::size_t>(i)]) = rotated.row(i);
        gold.push_back({static_cast<std::int32_t>(i), perm[static_cast<std::size_t>(i)]});
    }
    if (noise > 0) {
        z += gaussian(n, d, rng, noise);
        z.rowwise().normalize();
    }
    return {EmbeddingMatrix(numbered_vocab("s", static_cast<std::size_t>(n)), x),
            EmbeddingMatrix(numbered_vocab("t", static_cast<std::size_t>(n)), z), r, std::move(gold)};
}

inline double orthogonality_error(const Matrix& w) {
    return (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm();
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace xlex::testing
