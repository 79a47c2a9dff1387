#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "outcome_forge/outcome_forge.hpp"

namespace fixtures {

using outcome_forge::EncodedMatrix;
using outcome_forge::Label;

inline std::vector<std::vector<double>> rows_of(const EncodedMatrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
    return out;
}

/// Two isotropic Gaussian blobs in p dimensions whose centres are `distance` apart
/// (in units of sigma), half the rows each.
inline EncodedMatrix blobs(std::size_t n, double distance, double sigma, std::uint64_t seed, std::size_t p = 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const Label c = i % 2 == 0 ? 0 : 1;
        std::vector<double> x(p);
        for (double& v : x) v = noise(rng);
        x[0] += c == 1 ? 0.5 * distance * sigma : -0.5 * distance * sigma;
        rows.push_back(std::move(x));
        labels.push_back(c);
    }
    return EncodedMatrix::from_rows(rows, labels);
}

/// Four clusters at (+-1, +-1); the label is 1 when the signs differ.
inline EncodedMatrix xor_clusters(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = (i % 4) < 2 ? -1.0 : 1.0;
        const double b = (i % 2) == 0 ? -1.0 : 1.0;
        rows.push_back({a + noise(rng), b + noise(rng)});
        labels.push_back(a * b < 0 ? 1 : 0);
    }
    return EncodedMatrix::from_rows(rows, labels);
}

/// Random raw matrix with `n_min` minority (label `minority`) and `n_maj` majority rows,
/// interleaved in random order.
inline EncodedMatrix imbalanced(std::size_t n_min, std::size_t n_maj, std::size_t p, std::uint64_t seed,
                                Label minority = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<Label> labels(n_min, minority);
    labels.insert(labels.end(), n_maj, 1 - minority);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::vector<std::vector<double>> rows;
    for (Label c : labels) {
        std::vector<double> x(p);
        for (double& v : x) v = noise(rng) + (c == minority ? 1.0 : 0.0);
        rows.push_back(std::move(x));
    }
    return EncodedMatrix::from_rows(rows, labels);
}

/// A synthetic clinical cohort with labels independent of the features and exactly
/// `zeros` rows labelled 0 (the first ones after generation), the rest 1.
inline std::vector<outcome_forge::PatientRecord> fixed_count_cohort(std::size_t n, std::size_t zeros,
                                                                    std::uint64_t seed) {
    auto spec = outcome_forge::CohortSpec::published();
    spec.association.reset();
    auto records = outcome_forge::synthesize_cohort(spec, n, seed);
    for (std::size_t i = 0; i < n; ++i) records[i].seizure_free = i < zeros ? 0 : 1;
    return records;
}

/// Silences library warnings for the lifetime of the object.
struct QuietLog {
    outcome_forge::LogSink previous;
    QuietLog() : previous(outcome_forge::set_log_sink({})) {}
    ~QuietLog() { outcome_forge::set_log_sink(previous); }
    QuietLog(const QuietLog&) = delete;
    QuietLog& operator=(const QuietLog&) = delete;
};

}  // namespace fixtures
