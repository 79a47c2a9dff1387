#include "outcome_forge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/log.hpp"
#include "outcome_forge/parallel.hpp"
#include "outcome_forge/random.hpp"

namespace outcome_forge {

namespace {

std::vector<std::size_t> iota_vector(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

void fill_train(FoldPlan& plan, std::size_t n) {
    for (auto& fold : plan.folds) {
        std::sort(fold.test.begin(), fold.test.end());
        fold.train.clear();
        fold.train.reserve(n - fold.test.size());
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (t < fold.test.size() && fold.test[t] == i) {
                ++t;
            } else {
                fold.train.push_back(i);
            }
        }
    }
}

bool has_both_classes(std::span<const Label> labels) {
    bool has0 = false;
    bool has1 = false;
    for (Label l : labels) (l == 1 ? has1 : has0) = true;
    return has0 && has1;
}

double safe_ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Outcome of one fold for every model.
struct FoldOutcome {
    bool skipped = false;
    std::vector<std::vector<Label>> predictions;  // [model][test position]
    std::vector<bool> converged;                  // [model]
};

}  // namespace

// ---------------------------------------------------------------------------

std::string_view cv_name(CvMode mode) { return mode == CvMode::loocv ? "loocv" : "kfold"; }

std::optional<CvMode> parse_cv_mode(std::string_view name) {
    if (name == "loocv") return CvMode::loocv;
    if (name == "kfold") return CvMode::kfold;
    return std::nullopt;
}

std::string_view leakage_name(LeakageMode mode) {
    return mode == LeakageMode::before_split ? "before_split" : "within_fold";
}

std::optional<LeakageMode> parse_leakage_mode(std::string_view name) {
    if (name == "before_split") return LeakageMode::before_split;
    if (name == "within_fold") return LeakageMode::within_fold;
    return std::nullopt;
}

std::optional<SearchStrategy> parse_search_strategy(std::string_view name) {
    if (name == "exhaustive") return SearchStrategy::exhaustive;
    if (name == "greedy_forward") return SearchStrategy::greedy_forward;
    return std::nullopt;
}

FoldPlan loocv_plan(std::size_t n) {
    if (n < 2) throw PlanError("leave-one-out needs at least two rows");
    FoldPlan plan;
    plan.mode = CvMode::loocv;
    plan.k = n;
    plan.folds.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.folds[i].test = {i};
    fill_train(plan, n);
    return plan;
}

FoldPlan kfold_plan(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const Label> stratify_by) {
    if (k < 2) throw PlanError("k-fold needs k >= 2");
    if (k > n) throw PlanError("k = " + std::to_string(k) + " exceeds the row count " + std::to_string(n));
    if (!stratify_by.empty() && stratify_by.size() != n) throw PlanError("stratification labels must cover every row");

    FoldPlan plan;
    plan.mode = CvMode::kfold;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = !stratify_by.empty();
    plan.folds.resize(k);

    Rng rng(seed);
    std::vector<std::size_t> order = iota_vector(n);
    std::shuffle(order.begin(), order.end(), rng);

    if (plan.stratified) {
        // Deal class by class so that every fold gets each class within one row of its share.
        std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return stratify_by[i] == 0; });
        for (std::size_t p = 0; p < n; ++p) plan.folds[p % k].test.push_back(order[p]);
    } else {
        const std::size_t base = n / k;
        const std::size_t extra = n % k;
        std::size_t pos = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::size_t size = base + (f < extra ? 1 : 0);
            plan.folds[f].test.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                      order.begin() + static_cast<std::ptrdiff_t>(pos + size));
            pos += size;
        }
    }
    fill_train(plan, n);
    return plan;
}

// ---------------------------------------------------------------------------

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t p = 0; p < 2; ++p) counts[t][p] += other.counts[t][p];
    }
    return *this;
}

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
    if (y_true.size() != y_pred.size()) throw ShapeError("label vectors differ in length");
    if (y_true.empty()) throw ShapeError("confusion matrix needs at least one row");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const Label t = y_true[i];
        const Label p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw DataError("labels must be 0 or 1");
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("metrics of an empty confusion matrix");
    ClassMetrics m;
    for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t tp = cm.counts[c][c];
        const std::size_t predicted = cm.counts[0][c] + cm.counts[1][c];
        const std::size_t actual = cm.counts[c][0] + cm.counts[c][1];
        m.precision[c] = safe_ratio(tp, predicted);
        m.recall[c] = safe_ratio(tp, actual);
        const double denom = m.precision[c] + m.recall[c];
        m.f1[c] = denom > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / denom : 0.0;
    }
    m.accuracy = safe_ratio(cm.counts[0][0] + cm.counts[1][1], cm.total());
    return m;
}

KFoldSummary kfold_summary(std::span<const double> acc) {
    if (acc.empty()) throw DataError("k-fold summary needs at least one fold");
    const double n = static_cast<double>(acc.size());
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : acc) ss += (a - mean) * (a - mean);
    const double sd = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    return {100.0 * mean, 100.0 * sd, 100.0 * *hi, 100.0 * *lo};
}

// ---------------------------------------------------------------------------

std::vector<NamedModel> named_models(std::span<const std::string> ids) {
    std::vector<NamedModel> out;
    for (const auto& id : ids) {
        if (id == "all") {
            for (auto known : model_ids()) out.push_back({std::string(known), model_spec(known)});
        } else {
            out.push_back({id, model_spec(id)});
        }
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (models.empty()) throw ConfigError("no models selected");
    for (const auto& m : models) m.spec.validate();
    if (leakage && !resample) throw ConfigError("a leakage mode needs a resample method");
    if (resample) resample->validate();
    if (cv == CvMode::kfold && k < 2) throw ConfigError("k-fold needs k >= 2");
}

ExperimentReport run_experiment(const EncodedMatrix& raw, const ExperimentConfig& cfg) {
    cfg.validate();
    if (raw.rows() == 0) throw InfeasibleError("data set is empty");
    if (!has_both_classes(raw.labels())) throw InfeasibleError("data set contains a single class");

    const bool before_split = cfg.resample && cfg.effective_leakage() == LeakageMode::before_split;

    ExperimentReport report;
    report.cv = cfg.cv;
    if (before_split) {
        ResampleConfig rc = *cfg.resample;
        rc.seed = derive_seed(cfg.seed, hash_tag("resample"), rc.seed);
        ResampleResult augmented = oversample(raw.standardized(iota_vector(raw.rows())), rc);
        report.evaluated = std::move(augmented.matrix);
        report.origin = std::move(augmented.origin);
    } else {
        report.evaluated = raw;
        report.origin.assign(raw.rows(), RowOrigin::original);
    }
    const EncodedMatrix& data = report.evaluated;
    const std::size_t n = data.rows();

    const auto plan_seed = derive_seed(cfg.seed, hash_tag("plan"));
    if (cfg.cv == CvMode::loocv) {
        report.plan = loocv_plan(n);
    } else {
        report.plan = kfold_plan(n, cfg.k, plan_seed, cfg.stratified ? data.labels() : std::span<const Label>{});
    }
    const auto& folds = report.plan.folds;
    const std::size_t n_models = cfg.models.size();

    std::vector<FoldOutcome> outcomes(folds.size());
    parallel_for(folds.size(), cfg.threads, [&](std::size_t f) {
        const Fold& fold = folds[f];
        FoldOutcome& out = outcomes[f];

        EncodedMatrix train;
        EncodedMatrix test;
        if (before_split) {
            train = data.select_rows(fold.train);
            test = data.select_rows(fold.test);
        } else {
            const EncodedMatrix scaled = data.standardized(fold.train);
            train = scaled.select_rows(fold.train);
            test = scaled.select_rows(fold.test);
        }
        if (!has_both_classes(train.labels())) {
            log_warning("fold " + std::to_string(f) + ": training split has a single class, skipped");
            out.skipped = true;
            return;
        }
        if (cfg.resample && !before_split) {
            ResampleConfig rc = *cfg.resample;
            rc.seed = derive_seed(cfg.seed, f, hash_tag("resample"), rc.seed);
            try {
                train = oversample(train, rc).matrix;
            } catch (const InsufficientDataError& e) {
                log_warning("fold " + std::to_string(f) + ": " + e.what() + ", skipped");
                out.skipped = true;
                return;
            }
        }

        out.predictions.resize(n_models);
        out.converged.resize(n_models);
        for (std::size_t m = 0; m < n_models; ++m) {
            ModelSpec spec = cfg.models[m].spec;
            spec.seed = derive_seed(cfg.seed, f, hash_tag(cfg.models[m].id), spec.seed);
            const TrainedModel model = fit(spec, train);
            out.predictions[m] = predict(model, test);
            out.converged[m] = model.info().converged;
        }
    });

    const bool any_run = std::any_of(outcomes.begin(), outcomes.end(), [](const FoldOutcome& o) { return !o.skipped; });
    if (!any_run) throw InfeasibleError("every training split contains a single class");

    for (std::size_t m = 0; m < n_models; ++m) {
        ModelResult result;
        result.id = cfg.models[m].id;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const FoldOutcome& out = outcomes[f];
            if (out.skipped) {
                ++result.skipped_folds;
                continue;
            }
            result.converged = result.converged && out.converged[m];
            std::size_t correct = 0;
            for (std::size_t t = 0; t < folds[f].test.size(); ++t) {
                const std::size_t row = folds[f].test[t];
                const Label truth = data.labels()[row];
                const Label predicted = out.predictions[m][t];
                ++result.pooled.counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
                correct += truth == predicted ? 1 : 0;
                result.predictions.push_back({row, truth, predicted});
            }
            result.fold_accuracies.push_back(safe_ratio(correct, folds[f].test.size()));
        }
        result.metrics = class_metrics(result.pooled);
        if (cfg.cv == CvMode::kfold) result.summary = kfold_summary(result.fold_accuracies);
        report.models.push_back(std::move(result));
    }
    return report;
}

ExperimentReport run_experiment(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                const ExperimentConfig& cfg) {
    return run_experiment(encode_raw(dataset, schema), cfg);
}

// ---------------------------------------------------------------------------

std::vector<SubgroupReport> subgroup_report(const ExperimentReport& report, const FeatureSchema& schema,
                                            Feature group_by) {
    const auto& column = schema.column(group_by);
    if (column.kind == FeatureKind::numeric) throw ConfigError("cannot group by numeric feature '" + column.name + "'");

    std::vector<SubgroupReport> out;
    for (const auto& model : report.models) {
        std::vector<ConfusionMatrix> per_group(column.values.size());
        for (const auto& scored : model.predictions) {
            const int code = decode_category(report.evaluated, scored.row, group_by);
            ++per_group[static_cast<std::size_t>(code)]
                  .counts[static_cast<std::size_t>(scored.truth)][static_cast<std::size_t>(scored.predicted)];
        }
        SubgroupReport sub;
        sub.model = model.id;
        for (std::size_t g = 0; g < per_group.size(); ++g) {
            if (per_group[g].total() == 0) {
                log_warning(column.name + " group '" + column.values[g] + "' is empty, omitted");
                continue;
            }
            sub.groups.push_back({column.values[g], per_group[g].total(), per_group[g], class_metrics(per_group[g])});
        }
        out.push_back(std::move(sub));
    }
    return out;
}

std::vector<SubgroupReport> subgroup_report(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                            const ExperimentConfig& cfg, Feature group_by) {
    if (schema.column(group_by).kind == FeatureKind::numeric) {
        throw ConfigError("cannot group by numeric feature '" + std::string(feature_name(group_by)) + "'");
    }
    return subgroup_report(run_experiment(dataset, schema, cfg), schema, group_by);
}

// ---------------------------------------------------------------------------

double cross_validated_accuracy(const EncodedMatrix& raw, const NamedModel& model, CvMode cv, std::size_t k,
                                std::uint64_t seed, std::size_t threads) {
    ExperimentConfig cfg;
    cfg.models = {model};
    cfg.cv = cv;
    cfg.k = k;
    cfg.seed = seed;
    cfg.threads = threads;
    return run_experiment(raw, cfg).models.front().metrics.accuracy;
}

std::vector<SubsetScore> feature_subset_search(std::span<const PatientRecord> dataset, const FeatureSchema& schema,
                                               const SubsetSearchConfig& cfg) {
    const std::size_t p = schema.columns().size();
    if (cfg.max_size < 1 || cfg.max_size > p) {
        throw ConfigError("max_size must be between 1 and " + std::to_string(p));
    }
    if (cfg.strategy == SearchStrategy::exhaustive && cfg.max_size > 3) {
        throw ConfigError("exhaustive search is limited to max_size <= 3; use greedy_forward");
    }
    cfg.model.spec.validate();

    const EncodedMatrix raw = encode_raw(dataset, schema);
    std::vector<Feature> order;
    for (const auto& column : schema.columns()) order.push_back(column.feature);

    auto evaluate = [&](std::vector<std::vector<Feature>> candidates) {
        if (candidates.empty()) throw ConfigError("no candidate subsets to evaluate");
        std::vector<double> acc(candidates.size());
        parallel_for(candidates.size(), cfg.threads, [&](std::size_t c) {
            acc[c] = cross_validated_accuracy(raw.select_features(candidates[c]), cfg.model, cfg.cv, cfg.k, cfg.seed, 1);
        });
        std::vector<SubsetScore> scores;
        for (std::size_t c = 0; c < candidates.size(); ++c) scores.push_back({std::move(candidates[c]), acc[c], 0});
        return scores;
    };

    std::vector<SubsetScore> results;
    if (cfg.strategy == SearchStrategy::exhaustive) {
        std::vector<std::vector<Feature>> candidates;
        std::vector<std::size_t> pick;
        auto recurse = [&](auto&& self, std::size_t start) -> void {
            if (!pick.empty()) {
                std::vector<Feature> subset;
                for (std::size_t i : pick) subset.push_back(order[i]);
                candidates.push_back(std::move(subset));
            }
            if (pick.size() == cfg.max_size) return;
            for (std::size_t i = start; i < p; ++i) {
                pick.push_back(i);
                self(self, i + 1);
                pick.pop_back();
            }
        };
        recurse(recurse, 0);
        results = evaluate(std::move(candidates));
    } else {
        std::vector<std::size_t> chosen;
        for (std::size_t step = 1; step <= cfg.max_size; ++step) {
            std::vector<std::vector<Feature>> candidates;
            std::vector<std::size_t> added;
            for (std::size_t i = 0; i < p; ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
                auto pick = chosen;
                pick.push_back(i);
                std::sort(pick.begin(), pick.end());
                std::vector<Feature> subset;
                for (std::size_t j : pick) subset.push_back(order[j]);
                candidates.push_back(std::move(subset));
                added.push_back(i);
            }
            auto scores = evaluate(std::move(candidates));
            std::size_t best = 0;
            for (std::size_t c = 1; c < scores.size(); ++c) {
                if (scores[c].accuracy > scores[best].accuracy) best = c;
            }
            chosen.push_back(added[best]);
            scores[best].step = step;
            results.push_back(std::move(scores[best]));
        }
    }

    auto rank_of = [&](Feature f) { return std::find(order.begin(), order.end(), f) - order.begin(); };
    std::stable_sort(results.begin(), results.end(), [&](const SubsetScore& a, const SubsetScore& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.features.size() != b.features.size()) return a.features.size() < b.features.size();
        return std::lexicographical_compare(a.features.begin(), a.features.end(), b.features.begin(), b.features.end(),
                                            [&](Feature x, Feature y) { return rank_of(x) < rank_of(y); });
    });
    return results;
}

}  // namespace outcome_forge
