#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "xlex/embedding.hpp"

namespace xlex::testing {

// Reference loss written from the definition, independent of the library.
inline double reference_loss(const Vector& center, const Vector& context, const std::vector<Vector>& negatives) {
    auto softplus = [](double x) { return std::log1p(std::exp(x)); };
    double loss = softplus(-center.dot(context));
    for (const auto& n : negatives) loss += softplus(center.dot(n));
    return loss;
}

// Central differences over every coordinate of v.
inline Vector numeric_gradient(Vector& v, const std::function<double()>& f, double eps = 1e-5) {
    Vector g(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double keep = v(i);
        v(i) = keep + eps;
        const double up = f();
        v(i) = keep - eps;
        const double down = f();
        v(i) = keep;
        g(i) = (up - down) / (2 * eps);
    }
    return g;
}

inline double relative_error(const Vector& analytic, const Vector& numeric) {
    const double scale = std::max({analytic.norm(), numeric.norm(), 1e-8});
    return (analytic - numeric).norm() / scale;
}

inline Vector random_vector(int d, std::mt19937_64& rng, double sigma = 0.5) {
    std::normal_distribution<double> n(0.0, sigma);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = n(rng);
    return v;
}

}  // namespace xlex::testing
