#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "outcome_forge/cohort.hpp"

namespace outcome_forge {

enum class ResampleMethod : std::uint8_t { random, smote, borderline_smote, svm_smote, adasyn };

std::string_view method_name(ResampleMethod m);
std::optional<ResampleMethod> parse_resample_method(std::string_view name);

struct ResampleConfig {
    ResampleMethod method = ResampleMethod::random;
    std::size_t k_neighbors = 5;
    std::size_t m_neighbors = 10;
    double adasyn_beta = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class RowOrigin : std::uint8_t { original, synthetic };

struct ResampleResult {
    EncodedMatrix matrix;
    std::size_t synthetic_count = 0;
    std::vector<RowOrigin> origin;
};

/// Balances the two classes by adding minority rows after the untouched originals.
ResampleResult oversample(const EncodedMatrix& matrix, const ResampleConfig& cfg);

ResampleResult random_oversample(const EncodedMatrix& matrix, const ResampleConfig& cfg);
ResampleResult smote(const EncodedMatrix& matrix, const ResampleConfig& cfg);
ResampleResult borderline_smote(const EncodedMatrix& matrix, const ResampleConfig& cfg);
ResampleResult svm_smote(const EncodedMatrix& matrix, const ResampleConfig& cfg);
ResampleResult adasyn(const EncodedMatrix& matrix, const ResampleConfig& cfg);

// Building blocks, exposed for inspection.

/// x + u * (z - x), componentwise.
std::vector<double> interpolate(std::span<const double> x, std::span<const double> z, double u);

enum class BorderlineCategory : std::uint8_t { safe, danger, noise };

/// Classifies one point from the majority count `c` among its `m` nearest neighbours.
BorderlineCategory classify_borderline(std::size_t majority_count, std::size_t m);

struct ClassSplit {
    Label minority;
    Label majority;
    std::vector<std::size_t> minority_rows;
    std::vector<std::size_t> majority_rows;
};

/// Identifies minority and majority rows; throws ImbalanceError for a single class and
/// InsufficientDataError when the minority has fewer than `min_minority` rows.
ClassSplit split_classes(const EncodedMatrix& matrix, std::size_t min_minority = 2);

/// Borderline category of every minority row (parallel to ClassSplit::minority_rows).
std::vector<BorderlineCategory> borderline_categories(const EncodedMatrix& matrix, const ResampleConfig& cfg);

/// Minority rows that are support vectors of a linear C=1 SVM fitted on the input.
std::vector<std::size_t> minority_support_vectors(const EncodedMatrix& matrix);

/// ADASYN per-minority-row weights r_i (majority share of each k-neighbourhood), unnormalised.
std::vector<double> adasyn_ratios(const EncodedMatrix& matrix, const ResampleConfig& cfg);

/// Splits `total` into integer shares proportional to `weights` (Hamilton / largest remainder;
/// equal remainders go to the lower index). Zero total weight spreads uniformly.
std::vector<std::size_t> largest_remainder_allocation(std::span<const double> weights, std::size_t total);

}  // namespace outcome_forge
