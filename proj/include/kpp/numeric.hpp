#pragma once

// Deterministic floating-point reductions.

#include <cstddef>
#include <vector>

namespace kpp {

// Pairwise summation over a fixed tree determined by the element order
// alone, so the result is independent of how the terms were produced
// (including any parallel partitioning that merges by index).
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace kpp
