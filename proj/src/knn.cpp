#include "outcome_forge/learners.hpp"
#include "outcome_forge/neighbors.hpp"

namespace outcome_forge {

KNearest fit_knn(const EncodedMatrix& m, const KnnParams& p) { return {p.k, m}; }

Label KNearest::predict_row(std::span<const double> x) const {
    std::vector<std::size_t> candidates(train.rows());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    const auto nearest = nearest_neighbors(x, candidates, k, [&](std::size_t i) { return train.row(i); });
    std::size_t votes1 = 0;
    for (std::size_t i : nearest) votes1 += train.labels()[i] == 1 ? 1 : 0;
    return 2 * votes1 > nearest.size() ? 1 : 0;
}

}  // namespace outcome_forge
