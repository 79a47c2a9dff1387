#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "outcome_forge/cohort.hpp"

namespace outcome_forge {

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

enum class KernelKind : std::uint8_t { linear, poly, rbf, sigmoid };

struct KernelParams {
    KernelKind kind = KernelKind::linear;
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;
};

double kernel_eval(const KernelParams& params, std::span<const double> x, std::span<const double> z);

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

enum class Family : std::uint8_t {
    decision_tree,
    random_forest,
    mlp,
    logistic_regression,
    knn,
    gradient_boosting,
    svm,
};

struct TreeParams {
    std::optional<std::size_t> max_depth;     // unlimited when empty
    std::size_t min_samples_split = 2;
};

struct ForestParams {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    std::optional<std::size_t> max_features;  // floor(sqrt(p)) when empty
};

struct MlpParams {
    std::size_t hidden_units = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double l2 = 1e-4;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 200;
    double tol = 1e-4;
    std::size_t patience = 10;
};

struct LogisticParams {
    double C = 1.0;
    double tol = 1e-5;
    std::size_t max_iter = 100;
};

struct KnnParams {
    std::size_t k = 5;
};

struct BoostingParams {
    std::size_t n_stages = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
};

struct SvmParams {
    KernelKind kernel = KernelKind::linear;
    double C = 1.0;
    std::optional<double> gamma;  // 1 / (p * mean column variance) when empty
    int degree = 3;
    double coef0 = 0.0;
    double tol = 1e-3;
    std::size_t max_iter = 10'000;
};

using Hyperparams =
    std::variant<TreeParams, ForestParams, MlpParams, LogisticParams, KnnParams, BoostingParams, SvmParams>;

struct ModelSpec {
    Hyperparams params = TreeParams{};
    std::uint64_t seed = 0;

    Family family() const noexcept { return static_cast<Family>(params.index()); }

    /// Throws ConfigError for out-of-range hyperparameters.
    void validate() const;
};

/// Stable identifiers of the ten models: tree, forest, mlp, logreg, knn, gboost,
/// svm-linear, svm-poly, svm-rbf, svm-sigmoid.
std::span<const std::string_view> model_ids();

/// Default specification for a model identifier; throws ConfigError for unknown ids.
ModelSpec model_spec(std::string_view id, std::uint64_t seed = 0);

/// Long display name, e.g. "Support Vector Machine (kernel = RBF)".
std::string_view display_name(std::string_view id);

// ---------------------------------------------------------------------------
// Fitted models
// ---------------------------------------------------------------------------

struct FitInfo {
    std::size_t iterations = 0;
    bool converged = true;
    double objective = 0.0;
};

/// Binary tree with axis-aligned splits; x[feature] <= threshold goes left.
struct Tree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;         // leaf output: regression value or class-1 fraction
        std::size_t count0 = 0;     // training rows of each class reaching the node
        std::size_t count1 = 0;
    };

    std::vector<Node> nodes;

    std::size_t leaf_index(std::span<const double> x) const;
    const Node& leaf(std::span<const double> x) const { return nodes[leaf_index(x)]; }
    std::size_t depth() const;
    std::size_t leaf_count() const;
};

struct DecisionTree {
    Tree tree;
    Label predict_row(std::span<const double> x) const;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    Label predict_row(std::span<const double> x) const;
};

struct Mlp {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;  // inputs x hidden, row-major
    std::vector<double> b1;
    std::vector<double> w2;  // hidden x 2, row-major
    std::vector<double> b2;
    std::vector<double> loss_curve;

    /// Softmax probability of class 1.
    double probability(std::span<const double> x) const;
    Label predict_row(std::span<const double> x) const;
};

struct LogisticRegression {
    std::vector<double> weights;
    double intercept = 0.0;

    double decision(std::span<const double> x) const;
    Label predict_row(std::span<const double> x) const;
};

struct KNearest {
    std::size_t k = 5;
    EncodedMatrix train;

    Label predict_row(std::span<const double> x) const;
};

struct GradientBoosting {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<Tree> stages;
    std::vector<double> train_loss;  // mean log-loss after 0..n stages

    double decision(std::span<const double> x) const;
    Label predict_row(std::span<const double> x) const;
};

struct Svm {
    KernelParams kernel;
    std::vector<double> alpha;               // dual coefficient of every training row
    std::vector<std::vector<double>> support;
    std::vector<double> support_coef;        // alpha_i * y_i for each support vector
    std::vector<std::size_t> support_rows;   // training row of each support vector
    double bias = 0.0;

    double decision(std::span<const double> x) const;
    Label predict_row(std::span<const double> x) const;
};

class TrainedModel {
public:
    using Fitted = std::variant<DecisionTree, RandomForest, Mlp, LogisticRegression, KNearest, GradientBoosting, Svm>;

    TrainedModel(Fitted fitted, FitInfo info, std::size_t n_features)
        : fitted_(std::move(fitted)), info_(info), n_features_(n_features) {}

    Family family() const noexcept { return static_cast<Family>(fitted_.index()); }
    const FitInfo& info() const noexcept { return info_; }
    std::size_t n_features() const noexcept { return n_features_; }
    const Fitted& fitted() const noexcept { return fitted_; }

    template <class T>
    const T& as() const {
        return std::get<T>(fitted_);
    }

    Label predict_row(std::span<const double> x) const;

private:
    Fitted fitted_;
    FitInfo info_;
    std::size_t n_features_;
};

TrainedModel fit(const ModelSpec& spec, const EncodedMatrix& matrix);
std::vector<Label> predict(const TrainedModel& model, const EncodedMatrix& matrix);

// Family-level entry points.
DecisionTree fit_decision_tree(const EncodedMatrix& m, const TreeParams& p);
RandomForest fit_random_forest(const EncodedMatrix& m, const ForestParams& p, std::uint64_t seed);
Mlp fit_mlp(const EncodedMatrix& m, const MlpParams& p, std::uint64_t seed, FitInfo& info);
LogisticRegression fit_logistic(const EncodedMatrix& m, const LogisticParams& p, FitInfo& info);
KNearest fit_knn(const EncodedMatrix& m, const KnnParams& p);
GradientBoosting fit_gradient_boosting(const EncodedMatrix& m, const BoostingParams& p);
Svm fit_svm(const EncodedMatrix& m, const SvmParams& p, FitInfo& info);

/// "scale" gamma: 1 / (p * mean per-column population variance), 1 when that variance is 0.
double scale_gamma(const EncodedMatrix& m);

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

/// 1 - sum_c p_c^2 over the label multiset.
double gini(std::span<const Label> labels);

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;           // decision(x) = sum alpha_i y_i K(x_i, x) + bias
    double objective = 0.0;      // dual objective sum(alpha) - 1/2 alpha' Q alpha
    double kkt_violation = 0.0;  // max over I_up of -y G minus min over I_low of -y G
    std::size_t iterations = 0;
    bool converged = false;
};

/// Sequential minimal optimisation with second-order working-set selection.
/// `kernel` is the row-major n x n Gram matrix; `y` holds +1/-1 labels.
SmoResult smo_solve(std::span<const double> kernel, std::span<const double> y, double C, double tol,
                    std::size_t max_iter);

}  // namespace outcome_forge
