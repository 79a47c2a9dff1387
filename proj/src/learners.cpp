#include <algorithm>
#include <array>
#include <cmath>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/learners.hpp"

namespace outcome_forge {

namespace {

struct ModelEntry {
    std::string_view id;
    std::string_view display;
};

constexpr std::array<ModelEntry, 10> kModels = {{
    {"tree", "Decision Tree"},
    {"forest", "Random Forest"},
    {"mlp", "Multilayer Perceptron"},
    {"logreg", "Logistic Regression"},
    {"knn", "K-Nearest Neighbors"},
    {"gboost", "Gradient Boosting"},
    {"svm-linear", "Support Vector Machine (kernel = linear)"},
    {"svm-poly", "Support Vector Machine (kernel = Poly)"},
    {"svm-rbf", "Support Vector Machine (kernel = RBF)"},
    {"svm-sigmoid", "Support Vector Machine (kernel = Sigmoid)"},
}};

constexpr std::array<std::string_view, 10> kModelIds = {
    kModels[0].id, kModels[1].id, kModels[2].id, kModels[3].id, kModels[4].id,
    kModels[5].id, kModels[6].id, kModels[7].id, kModels[8].id, kModels[9].id,
};

SvmParams svm_with(KernelKind kernel) {
    SvmParams p;
    p.kernel = kernel;
    return p;
}

void require(bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
}

void check_training_data(const ModelSpec& spec, const EncodedMatrix& m) {
    for (double v : m.values()) {
        if (!std::isfinite(v)) throw DataError("training matrix contains non-finite values");
    }
    const bool single_class_ok = spec.family() == Family::knn || spec.family() == Family::decision_tree;
    if (m.rows() == 0) throw InsufficientDataError("training matrix is empty");
    if (single_class_ok) return;
    if (m.rows() < 2) throw InsufficientDataError("training needs at least two rows");
    const auto labels = m.labels();
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1) throw ImbalanceError("training data must contain both classes");
}

}  // namespace

void ModelSpec::validate() const {
    std::visit(
        [](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, TreeParams>) {
                require(p.min_samples_split >= 2, "min_samples_split must be at least 2");
                require(!p.max_depth || *p.max_depth >= 1, "max_depth must be at least 1");
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                require(p.n_trees >= 1, "a forest needs at least one tree");
                require(!p.max_features || *p.max_features >= 1, "max_features must be at least 1");
            } else if constexpr (std::is_same_v<P, MlpParams>) {
                require(p.hidden_units >= 1, "hidden_units must be at least 1");
                require(p.learning_rate > 0.0, "learning_rate must be positive");
                require(p.batch_size >= 1, "batch_size must be at least 1");
                require(p.beta1 >= 0.0 && p.beta1 < 1.0 && p.beta2 >= 0.0 && p.beta2 < 1.0, "Adam decays must be in [0,1)");
                require(p.l2 >= 0.0, "l2 must be non-negative");
            } else if constexpr (std::is_same_v<P, LogisticParams>) {
                require(p.C > 0.0, "C must be positive");
                require(p.tol > 0.0, "tol must be positive");
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                require(p.k >= 1, "k must be at least 1");
            } else if constexpr (std::is_same_v<P, BoostingParams>) {
                require(p.learning_rate > 0.0, "learning_rate must be positive");
                require(p.max_depth >= 1, "max_depth must be at least 1");
            } else if constexpr (std::is_same_v<P, SvmParams>) {
                require(p.C > 0.0, "C must be positive");
                require(!p.gamma || *p.gamma > 0.0, "gamma must be positive");
                require(p.degree >= 1, "degree must be at least 1");
                require(p.tol > 0.0, "tol must be positive");
            }
        },
        params);
}

std::span<const std::string_view> model_ids() { return kModelIds; }

ModelSpec model_spec(std::string_view id, std::uint64_t seed) {
    ModelSpec spec;
    spec.seed = seed;
    if (id == "tree") {
        spec.params = TreeParams{};
    } else if (id == "forest") {
        spec.params = ForestParams{};
    } else if (id == "mlp") {
        spec.params = MlpParams{};
    } else if (id == "logreg") {
        spec.params = LogisticParams{};
    } else if (id == "knn") {
        spec.params = KnnParams{};
    } else if (id == "gboost") {
        spec.params = BoostingParams{};
    } else if (id == "svm-linear") {
        spec.params = svm_with(KernelKind::linear);
    } else if (id == "svm-poly") {
        spec.params = svm_with(KernelKind::poly);
    } else if (id == "svm-rbf") {
        spec.params = svm_with(KernelKind::rbf);
    } else if (id == "svm-sigmoid") {
        spec.params = svm_with(KernelKind::sigmoid);
    } else {
        throw ConfigError("unknown model '" + std::string(id) + "'");
    }
    return spec;
}

std::string_view display_name(std::string_view id) {
    for (const auto& entry : kModels) {
        if (entry.id == id) return entry.display;
    }
    throw ConfigError("unknown model '" + std::string(id) + "'");
}

TrainedModel fit(const ModelSpec& spec, const EncodedMatrix& m) {
    spec.validate();
    check_training_data(spec, m);
    FitInfo info;
    TrainedModel::Fitted fitted = std::visit(
        [&](const auto& p) -> TrainedModel::Fitted {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, TreeParams>) {
                return fit_decision_tree(m, p);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return fit_random_forest(m, p, spec.seed);
            } else if constexpr (std::is_same_v<P, MlpParams>) {
                return fit_mlp(m, p, spec.seed, info);
            } else if constexpr (std::is_same_v<P, LogisticParams>) {
                return fit_logistic(m, p, info);
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                return fit_knn(m, p);
            } else if constexpr (std::is_same_v<P, BoostingParams>) {
                return fit_gradient_boosting(m, p);
            } else {
                return fit_svm(m, p, info);
            }
        },
        spec.params);
    return TrainedModel(std::move(fitted), info, m.cols());
}

Label TrainedModel::predict_row(std::span<const double> x) const {
    if (x.size() != n_features_) throw ShapeError("input has " + std::to_string(x.size()) + " columns, model expects " +
                                                  std::to_string(n_features_));
    return std::visit([&](const auto& model) { return model.predict_row(x); }, fitted_);
}

std::vector<Label> predict(const TrainedModel& model, const EncodedMatrix& m) {
    if (m.cols() != model.n_features()) {
        throw ShapeError("input has " + std::to_string(m.cols()) + " columns, model expects " +
                         std::to_string(model.n_features()));
    }
    std::vector<Label> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = model.predict_row(m.row(i));
    return out;
}

}  // namespace outcome_forge
