#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "outcome_forge/learners.hpp"
#include "outcome_forge/random.hpp"

namespace outcome_forge::detail {

enum class Criterion { gini, squared_error };

struct GrowOptions {
    Criterion criterion = Criterion::gini;
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_features;  // all features when empty
    Rng* rng = nullptr;                       // required when max_features is set
};

/// Grows a CART tree over `rows` (duplicates allowed, e.g. a bootstrap sample).
/// `targets` is indexed by matrix row: class labels for gini, residuals for squared error.
/// Leaf values are the class-1 fraction (gini) or the mean target (squared error).
Tree grow_tree(const EncodedMatrix& m, std::vector<std::size_t> rows, std::span<const double> targets,
               const GrowOptions& options);

}  // namespace outcome_forge::detail
