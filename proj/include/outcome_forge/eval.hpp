#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outcome_forge/cohort.hpp"
#include "outcome_forge/learners.hpp"
#include "outcome_forge/resample.hpp"

namespace outcome_forge {

// ---------------------------------------------------------------------------
// Fold plans
// ---------------------------------------------------------------------------

enum class CvMode : std::uint8_t { loocv, kfold };

std::string_view cv_name(CvMode mode);
std::optional<CvMode> parse_cv_mode(std::string_view name);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    CvMode mode = CvMode::loocv;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    bool stratified = false;
};

/// n folds, fold i tests {i}.
FoldPlan loocv_plan(std::size_t n);

/// Shuffles 0..n-1 with `seed` and cuts k contiguous folds; the first n % k folds get one
/// extra row. With `stratify_by` (one label per row) rows are dealt class by class so
/// each fold holds every class within one row of its share.
FoldPlan kfold_plan(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const Label> stratify_by = {});

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
    std::array<std::array<std::size_t, 2>, 2> counts{};  // [true][pred]

    std::size_t total() const noexcept { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
    std::size_t support(Label c) const { return counts[c][0] + counts[c][1]; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred);

struct ClassMetrics {
    std::array<double, 2> precision{};
    std::array<double, 2> recall{};
    std::array<double, 2> f1{};
    double accuracy = 0.0;
};

/// Undefined precision or recall (zero denominator) is reported as 0.
ClassMetrics class_metrics(const ConfusionMatrix& cm);

/// Statistics of per-fold accuracies, in percent.
struct KFoldSummary {
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1) standard deviation; 0 for a single fold
    double best = 0.0;
    double worst = 0.0;
};

KFoldSummary kfold_summary(std::span<const double> per_fold_accuracies);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class LeakageMode : std::uint8_t {
    before_split,  // oversample the whole data set once, then cross-validate it
    within_fold,   // standardise and oversample each training split only
};

std::string_view leakage_name(LeakageMode mode);
std::optional<LeakageMode> parse_leakage_mode(std::string_view name);

struct NamedModel {
    std::string id;
    ModelSpec spec;
};

/// Default specifications for the given model identifiers ("all" expands to the ten models).
std::vector<NamedModel> named_models(std::span<const std::string> ids);

struct ExperimentConfig {
    std::vector<NamedModel> models;
    CvMode cv = CvMode::loocv;
    std::size_t k = 8;
    bool stratified = false;
    std::optional<ResampleConfig> resample;
    std::optional<LeakageMode> leakage;  // requires `resample`; within_fold when unset
    std::uint64_t seed = 0;
    std::size_t threads = 0;             // 0 = default_thread_count()

    LeakageMode effective_leakage() const { return leakage.value_or(LeakageMode::within_fold); }
    void validate() const;
};

struct ScoredRow {
    std::size_t row;  // index into ExperimentReport::evaluated
    Label truth;
    Label predicted;
};

struct ModelResult {
    std::string id;
    ConfusionMatrix pooled;
    ClassMetrics metrics;
    std::vector<double> fold_accuracies;  // folds that were run, in plan order
    std::optional<KFoldSummary> summary;  // k-fold only
    bool converged = true;
    std::size_t skipped_folds = 0;
    std::vector<ScoredRow> predictions;
};

struct ExperimentReport {
    CvMode cv = CvMode::loocv;
    FoldPlan plan;
    /// Matrix whose rows the predictions index: the input, or the oversampled set under before_split.
    EncodedMatrix evaluated;
    std::vector<RowOrigin> origin;  // per evaluated row
    std::vector<ModelResult> models;
};

/// Cross-validates every model on an unscaled encoded matrix (see encode_raw).
ExperimentReport run_experiment(const EncodedMatrix& raw, const ExperimentConfig& cfg);
ExperimentReport run_experiment(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                const ExperimentConfig& cfg);

struct GroupMetrics {
    std::string group;
    std::size_t rows = 0;
    ConfusionMatrix confusion;
    ClassMetrics metrics;
};

struct SubgroupReport {
    std::string model;
    std::vector<GroupMetrics> groups;
};

/// Partitions each model's pooled predictions by the category of `group_by` on the scored row.
std::vector<SubgroupReport> subgroup_report(const ExperimentReport& report, const FeatureSchema& schema,
                                            Feature group_by);
std::vector<SubgroupReport> subgroup_report(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                            const ExperimentConfig& cfg, Feature group_by);

// ---------------------------------------------------------------------------
// Feature subset search
// ---------------------------------------------------------------------------

enum class SearchStrategy : std::uint8_t { exhaustive, greedy_forward };

std::optional<SearchStrategy> parse_search_strategy(std::string_view name);

struct SubsetSearchConfig {
    NamedModel model;
    std::size_t max_size = 3;
    SearchStrategy strategy = SearchStrategy::exhaustive;
    CvMode cv = CvMode::loocv;
    std::size_t k = 8;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct SubsetScore {
    std::vector<Feature> features;  // in schema order
    double accuracy = 0.0;
    std::size_t step = 0;           // growth step for greedy_forward (1-based); 0 for exhaustive
};

/// Cross-validated accuracy of the model restricted to each candidate subset, best first
/// (ties: smaller subset, then lexicographic schema order).
std::vector<SubsetScore> feature_subset_search(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                               const SubsetSearchConfig& cfg);

/// Pooled cross-validated accuracy of one model on a matrix, without resampling.
double cross_validated_accuracy(const EncodedMatrix& raw, const NamedModel& model, CvMode cv, std::size_t k,
                                std::uint64_t seed, std::size_t threads = 0);

}  // namespace outcome_forge
