#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace outcome_forge {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        d += t * t;
    }
    return d;
}

/// The k candidates closest to `query` (Euclidean), nearest first; equal distances
/// are ordered by lower candidate index. `row_of(c)` returns the coordinates of c.
template <class RowOf>
std::vector<std::size_t> nearest_neighbors(std::span<const double> query, std::span<const std::size_t> candidates,
                                           std::size_t k, RowOf&& row_of) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(candidates.size());
    for (std::size_t c : candidates) scored.emplace_back(squared_distance(query, row_of(c)), c);
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
    return out;
}

}  // namespace outcome_forge
