#pragma once

#include <cmath>
#include <vector>

namespace xlex::testing {

// Average rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> brute_force_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0;
        double equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = 1 + less + (equal - 1) / 2;
    }
    return r;
}

inline double brute_force_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = brute_force_ranks(x);
    const auto ry = brute_force_ranks(y);
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sx += rx[i];
        sy += ry[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
        sxy += (rx[i] - mx) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace xlex::testing
