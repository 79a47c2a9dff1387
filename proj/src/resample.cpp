#include "outcome_forge/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/learners.hpp"
#include "outcome_forge/log.hpp"
#include "outcome_forge/neighbors.hpp"
#include "outcome_forge/random.hpp"

namespace outcome_forge {

namespace {

struct Plan {
    ClassSplit split;
    std::size_t needed = 0;  // synthetic rows to add
};

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

// Neighbours of `row` among `candidates` excluding itself.
std::vector<std::size_t> neighbors_excluding(const EncodedMatrix& m, std::size_t row,
                                             std::span<const std::size_t> candidates, std::size_t k) {
    std::vector<std::size_t> others;
    others.reserve(candidates.size());
    for (std::size_t c : candidates) {
        if (c != row) others.push_back(c);
    }
    return nearest_neighbors(m.row(row), others, k, [&](std::size_t i) { return m.row(i); });
}

std::size_t majority_count_among(const EncodedMatrix& m, std::span<const std::size_t> rows, Label majority) {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return m.labels()[r] == majority; }));
}

ResampleResult assemble(const EncodedMatrix& m, const std::vector<double>& synthetic, std::size_t count,
                        Label minority) {
    ResampleResult result;
    const std::vector<Label> labels(count, minority);
    result.matrix = m.with_appended(synthetic, labels);
    result.synthetic_count = count;
    result.origin.assign(m.rows(), RowOrigin::original);
    result.origin.resize(m.rows() + count, RowOrigin::synthetic);
    return result;
}

ResampleResult unchanged(const EncodedMatrix& m) { return assemble(m, {}, 0, 0); }

// `needed` base rows: full round-robin passes over `bases`, then a uniform draw without
// replacement for the remainder.
std::vector<std::size_t> draw_bases(std::span<const std::size_t> bases, std::size_t needed, Rng& rng) {
    std::vector<std::size_t> out;
    out.reserve(needed);
    const std::size_t passes = needed / bases.size();
    for (std::size_t p = 0; p < passes; ++p) out.insert(out.end(), bases.begin(), bases.end());
    std::vector<std::size_t> rest(bases.begin(), bases.end());
    std::shuffle(rest.begin(), rest.end(), rng);
    rest.resize(needed - out.size());
    std::sort(rest.begin(), rest.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

// SMOTE interpolation from each base row toward one of its k nearest minority rows.
std::vector<double> interpolate_from(const EncodedMatrix& m, const ClassSplit& split, std::span<const std::size_t> bases,
                                     std::size_t k, Rng& rng) {
    k = std::min(k, split.minority_rows.size() - 1);
    std::vector<std::vector<std::size_t>> cache(m.rows());
    std::vector<double> out;
    out.reserve(bases.size() * m.cols());
    for (std::size_t base : bases) {
        auto& nn = cache[base];
        if (nn.empty()) nn = neighbors_excluding(m, base, split.minority_rows, k);
        const std::size_t z = nn[uniform_index(rng, nn.size())];
        const double u = uniform01(rng);
        const auto s = interpolate(m.row(base), m.row(z), u);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

ResampleResult smote_from(const EncodedMatrix& m, const Plan& plan, std::span<const std::size_t> bases,
                          const ResampleConfig& cfg, Rng& rng) {
    const auto chosen = draw_bases(bases, plan.needed, rng);
    const auto synthetic = interpolate_from(m, plan.split, chosen, cfg.k_neighbors, rng);
    return assemble(m, synthetic, plan.needed, plan.split.minority);
}

std::optional<Plan> plan_for(const EncodedMatrix& m, const ResampleConfig& cfg, std::size_t min_minority = 2) {
    cfg.validate();
    const auto labels = m.labels();
    const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const auto zeros = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
    if (ones + zeros != labels.size()) throw DataError("labels must be 0 or 1");
    if (ones == 0 || zeros == 0) throw ImbalanceError("oversampling needs both classes present");
    if (ones == zeros) return std::nullopt;
    Plan plan{split_classes(m, min_minority), 0};
    plan.needed = plan.split.majority_rows.size() - plan.split.minority_rows.size();
    return plan;
}

std::vector<std::size_t> borderline_neighbourhood(const EncodedMatrix& m, std::size_t row, std::size_t m_neighbors) {
    const auto everyone = all_rows(m.rows());
    return neighbors_excluding(m, row, everyone, std::min(m_neighbors, m.rows() - 1));
}

}  // namespace

std::string_view method_name(ResampleMethod m) {
    switch (m) {
        case ResampleMethod::random: return "random";
        case ResampleMethod::smote: return "smote";
        case ResampleMethod::borderline_smote: return "borderline_smote";
        case ResampleMethod::svm_smote: return "svm_smote";
        case ResampleMethod::adasyn: return "adasyn";
    }
    return "?";
}

std::optional<ResampleMethod> parse_resample_method(std::string_view name) {
    for (auto m : {ResampleMethod::random, ResampleMethod::smote, ResampleMethod::borderline_smote,
                   ResampleMethod::svm_smote, ResampleMethod::adasyn}) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

void ResampleConfig::validate() const {
    if (k_neighbors < 1) throw ConfigError("k_neighbors must be at least 1");
    if (m_neighbors < k_neighbors) throw ConfigError("m_neighbors must be at least k_neighbors");
    if (!(adasyn_beta > 0.0 && adasyn_beta <= 1.0)) throw ConfigError("adasyn_beta must be in (0, 1]");
}

std::vector<double> interpolate(std::span<const double> x, std::span<const double> z, double u) {
    std::vector<double> s(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) s[j] = x[j] + u * (z[j] - x[j]);
    return s;
}

BorderlineCategory classify_borderline(std::size_t majority_count, std::size_t m) {
    if (majority_count == m) return BorderlineCategory::noise;
    if (2 * majority_count >= m) return BorderlineCategory::danger;
    return BorderlineCategory::safe;
}

ClassSplit split_classes(const EncodedMatrix& m, std::size_t min_minority) {
    ClassSplit split;
    std::vector<std::size_t> zeros;
    std::vector<std::size_t> ones;
    for (std::size_t i = 0; i < m.rows(); ++i) (m.labels()[i] == 1 ? ones : zeros).push_back(i);
    if (zeros.empty() || ones.empty()) throw ImbalanceError("oversampling needs both classes present");
    // Equal counts: class 0 is reported as the minority.
    if (zeros.size() <= ones.size()) {
        split = {0, 1, std::move(zeros), std::move(ones)};
    } else {
        split = {1, 0, std::move(ones), std::move(zeros)};
    }
    if (split.minority_rows.size() < min_minority) {
        throw InsufficientDataError("minority class needs at least " + std::to_string(min_minority) + " rows");
    }
    return split;
}

std::vector<BorderlineCategory> borderline_categories(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const ClassSplit split = split_classes(m);
    const std::size_t neighbours = std::min(cfg.m_neighbors, m.rows() - 1);
    std::vector<BorderlineCategory> out;
    out.reserve(split.minority_rows.size());
    for (std::size_t row : split.minority_rows) {
        const auto nn = borderline_neighbourhood(m, row, cfg.m_neighbors);
        out.push_back(classify_borderline(majority_count_among(m, nn, split.majority), neighbours));
    }
    return out;
}

std::vector<std::size_t> minority_support_vectors(const EncodedMatrix& m) {
    const ClassSplit split = split_classes(m);
    FitInfo info;
    const Svm svm = fit_svm(m, SvmParams{}, info);
    std::vector<std::size_t> out;
    for (std::size_t i : split.minority_rows) {
        if (svm.alpha[i] > 1e-10) out.push_back(i);
    }
    return out;
}

std::vector<double> adasyn_ratios(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const ClassSplit split = split_classes(m);
    const std::size_t k = std::min(cfg.k_neighbors, m.rows() - 1);
    const auto everyone = all_rows(m.rows());
    std::vector<double> ratios;
    ratios.reserve(split.minority_rows.size());
    for (std::size_t row : split.minority_rows) {
        const auto nn = neighbors_excluding(m, row, everyone, k);
        ratios.push_back(static_cast<double>(majority_count_among(m, nn, split.majority)) / static_cast<double>(k));
    }
    return ratios;
}

std::vector<std::size_t> largest_remainder_allocation(std::span<const double> weights, std::size_t total) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> shares(n, 0);
    if (n == 0) return shares;
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> normalised(n, 1.0 / static_cast<double>(n));
    if (sum > 0.0) {
        for (std::size_t i = 0; i < n; ++i) normalised[i] = weights[i] / sum;
    }
    std::vector<double> remainder(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = normalised[i] * static_cast<double>(total);
        shares[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(shares[i]);
        assigned += shares[i];
    }
    // Floating error can overshoot by a unit; take it back from the smallest remainders.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    while (assigned > total) {
        auto it = std::min_element(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (shares[a] == 0) return false;
            if (shares[b] == 0) return true;
            return remainder[a] < remainder[b];
        });
        --shares[*it];
        --assigned;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
        ++shares[order[k]];
        ++assigned;
    }
    return shares;
}

// ---------------------------------------------------------------------------

ResampleResult random_oversample(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const auto plan = plan_for(m, cfg, 1);
    if (!plan) return unchanged(m);
    Rng rng(cfg.seed);
    const auto& minority = plan->split.minority_rows;
    std::vector<double> synthetic;
    synthetic.reserve(plan->needed * m.cols());
    for (std::size_t s = 0; s < plan->needed; ++s) {
        const auto row = m.row(minority[uniform_index(rng, minority.size())]);
        synthetic.insert(synthetic.end(), row.begin(), row.end());
    }
    return assemble(m, synthetic, plan->needed, plan->split.minority);
}

ResampleResult smote(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const auto plan = plan_for(m, cfg);
    if (!plan) return unchanged(m);
    Rng rng(cfg.seed);
    return smote_from(m, *plan, plan->split.minority_rows, cfg, rng);
}

ResampleResult borderline_smote(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const auto plan = plan_for(m, cfg);
    if (!plan) return unchanged(m);
    const auto categories = borderline_categories(m, cfg);
    std::vector<std::size_t> danger;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == BorderlineCategory::danger) danger.push_back(plan->split.minority_rows[i]);
    }
    Rng rng(cfg.seed);
    if (danger.empty()) {
        log_warning("borderline_smote: no DANGER minority points, falling back to SMOTE");
        return smote_from(m, *plan, plan->split.minority_rows, cfg, rng);
    }
    return smote_from(m, *plan, danger, cfg, rng);
}

ResampleResult svm_smote(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const auto plan = plan_for(m, cfg);
    if (!plan) return unchanged(m);
    const std::size_t neighbours = std::min(cfg.m_neighbors, m.rows() - 1);
    std::vector<std::size_t> bases;
    for (std::size_t row : minority_support_vectors(m)) {
        const auto nn = borderline_neighbourhood(m, row, cfg.m_neighbors);
        const auto category = classify_borderline(majority_count_among(m, nn, plan->split.majority), neighbours);
        if (category != BorderlineCategory::noise) bases.push_back(row);
    }
    Rng rng(cfg.seed);
    if (bases.empty()) {
        log_warning("svm_smote: no usable minority support vectors, falling back to SMOTE");
        return smote_from(m, *plan, plan->split.minority_rows, cfg, rng);
    }
    return smote_from(m, *plan, bases, cfg, rng);
}

ResampleResult adasyn(const EncodedMatrix& m, const ResampleConfig& cfg) {
    const auto plan = plan_for(m, cfg);
    if (!plan) return unchanged(m);
    auto ratios = adasyn_ratios(m, cfg);
    if (std::accumulate(ratios.begin(), ratios.end(), 0.0) <= 0.0) {
        log_warning("adasyn: no minority point has majority neighbours, using uniform weights");
    }
    const auto total = static_cast<std::size_t>(std::llround(cfg.adasyn_beta * static_cast<double>(plan->needed)));
    const auto shares = largest_remainder_allocation(ratios, total);

    std::vector<std::size_t> bases;
    bases.reserve(total);
    for (std::size_t i = 0; i < shares.size(); ++i) bases.insert(bases.end(), shares[i], plan->split.minority_rows[i]);

    Rng rng(cfg.seed);
    const auto synthetic = interpolate_from(m, plan->split, bases, cfg.k_neighbors, rng);
    return assemble(m, synthetic, total, plan->split.minority);
}

ResampleResult oversample(const EncodedMatrix& m, const ResampleConfig& cfg) {
    switch (cfg.method) {
        case ResampleMethod::random: return random_oversample(m, cfg);
        case ResampleMethod::smote: return smote(m, cfg);
        case ResampleMethod::borderline_smote: return borderline_smote(m, cfg);
        case ResampleMethod::svm_smote: return svm_smote(m, cfg);
        case ResampleMethod::adasyn: return adasyn(m, cfg);
    }
    throw ConfigError("unknown resample method");
}

}  // namespace outcome_forge
