#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "outcome_forge/errors.hpp"
#include "tree_builder.hpp"

namespace outcome_forge {

namespace detail {

namespace {

constexpr double kTieEps = 1e-12;

struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;
};

class Grower {
public:
    Grower(const EncodedMatrix& m, std::span<const double> targets, const GrowOptions& options)
        : m_(m), targets_(targets), options_(options), order_(m.cols()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
    }

    Tree grow(std::vector<std::size_t> rows) {
        build(rows, 0);
        return std::move(tree_);
    }

private:
    int build(std::vector<std::size_t>& rows, std::size_t depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        {
            Tree::Node& node = tree_.nodes.back();
            double sum = 0.0;
            for (std::size_t r : rows) {
                (m_.labels()[r] == 1 ? node.count1 : node.count0) += 1;
                sum += targets_[r];
            }
            node.value = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
        }

        const bool depth_ok = !options_.max_depth || depth < *options_.max_depth;
        if (!depth_ok || rows.size() < options_.min_samples_split || rows.size() < 2 || impurity(rows) <= kTieEps) {
            return id;
        }
        const Split split = find_split(rows);
        if (!split.found) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) (m_.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = build(left, depth + 1);
        const int rr = build(right, depth + 1);
        Tree::Node& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        node.left = l;
        node.right = rr;
        return id;
    }

    double impurity(const std::vector<std::size_t>& rows) const {
        const double n = static_cast<double>(rows.size());
        if (options_.criterion == Criterion::gini) {
            double c1 = 0.0;
            for (std::size_t r : rows) c1 += targets_[r];
            const double p = c1 / n;
            return 1.0 - p * p - (1.0 - p) * (1.0 - p);
        }
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t r : rows) {
            sum += targets_[r];
            sq += targets_[r] * targets_[r];
        }
        return std::max(0.0, sq / n - (sum / n) * (sum / n));
    }

    // Weighted child impurity times node size, for a left block of size nl.
    double child_score(double nl, double sl, double ql, double nr, double sr, double qr) const {
        if (options_.criterion == Criterion::gini) {
            // targets are 0/1: gini(n, c1) * n = 2 c1 (n - c1) / n
            return 2.0 * sl * (nl - sl) / nl + 2.0 * sr * (nr - sr) / nr;
        }
        return (ql - sl * sl / nl) + (qr - sr * sr / nr);
    }

    Split find_split(const std::vector<std::size_t>& rows) {
        const std::size_t p = m_.cols();
        std::size_t budget = p;
        if (options_.max_features) {
            budget = std::max<std::size_t>(1, std::min(*options_.max_features, p));
            std::shuffle(order_.begin(), order_.end(), *options_.rng);
        }

        double total_s = 0.0;
        double total_q = 0.0;
        for (std::size_t r : rows) {
            total_s += targets_[r];
            total_q += targets_[r] * targets_[r];
        }
        const double n = static_cast<double>(rows.size());

        Split best;
        std::size_t visited = 0;
        std::vector<std::pair<double, std::size_t>> sorted(rows.size());
        for (std::size_t feature : order_) {
            if (visited >= budget && best.found) break;
            for (std::size_t k = 0; k < rows.size(); ++k) sorted[k] = {m_.at(rows[k], feature), rows[k]};
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front().first == sorted.back().first) continue;
            ++visited;

            double sl = 0.0;
            double ql = 0.0;
            for (std::size_t k = 1; k < sorted.size(); ++k) {
                const double t = targets_[sorted[k - 1].second];
                sl += t;
                ql += t * t;
                const double lo = sorted[k - 1].first;
                const double hi = sorted[k].first;
                if (!(lo < hi)) continue;
                const double nl = static_cast<double>(k);
                const double score = child_score(nl, sl, ql, n - nl, total_s - sl, total_q - ql);
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi)) threshold = lo;
                if (!best.found || score < best.score - kTieEps ||
                    (score <= best.score + kTieEps &&
                     (feature < best.feature || (feature == best.feature && threshold < best.threshold)))) {
                    best = {true, feature, threshold, score};
                }
            }
        }
        return best;
    }

    const EncodedMatrix& m_;
    std::span<const double> targets_;
    const GrowOptions& options_;
    std::vector<std::size_t> order_;
    Tree tree_;
};

}  // namespace

Tree grow_tree(const EncodedMatrix& m, std::vector<std::size_t> rows, std::span<const double> targets,
               const GrowOptions& options) {
    if (options.max_features && options.rng == nullptr) throw ConfigError("feature subsampling needs an RNG");
    return Grower(m, targets, options).grow(std::move(rows));
}

}  // namespace detail

// ---------------------------------------------------------------------------

std::size_t Tree::leaf_index(std::span<const double> x) const {
    std::size_t id = 0;
    while (nodes[id].feature >= 0) {
        const Node& node = nodes[id];
        id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                   : node.right);
    }
    return id;
}

std::size_t Tree::depth() const {
    std::vector<std::size_t> depth_of(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        deepest = std::max(deepest, depth_of[id]);
        if (nodes[id].feature >= 0) {
            depth_of[static_cast<std::size_t>(nodes[id].left)] = depth_of[id] + 1;
            depth_of[static_cast<std::size_t>(nodes[id].right)] = depth_of[id] + 1;
        }
    }
    return deepest;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const Node& node) { return node.feature < 0; }));
}

double gini(std::span<const Label> labels) {
    if (labels.empty()) throw DataError("gini of an empty label set");
    std::map<Label, std::size_t> counts;
    for (Label l : labels) ++counts[l];
    const double n = static_cast<double>(labels.size());
    double sum_sq = 0.0;
    for (const auto& [label, count] : counts) {
        const double p = static_cast<double>(count) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> label_targets(const EncodedMatrix& m) {
    std::vector<double> targets(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) targets[i] = m.labels()[i] == 1 ? 1.0 : 0.0;
    return targets;
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace

DecisionTree fit_decision_tree(const EncodedMatrix& m, const TreeParams& p) {
    const auto targets = label_targets(m);
    detail::GrowOptions options;
    options.max_depth = p.max_depth;
    options.min_samples_split = p.min_samples_split;
    return {detail::grow_tree(m, all_rows(m.rows()), targets, options)};
}

Label DecisionTree::predict_row(std::span<const double> x) const {
    const auto& node = tree.leaf(x);
    return node.count1 > node.count0 ? 1 : 0;
}

RandomForest fit_random_forest(const EncodedMatrix& m, const ForestParams& p, std::uint64_t seed) {
    const auto targets = label_targets(m);
    const std::size_t n = m.rows();
    const std::size_t features =
        p.max_features.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(m.cols())))));

    RandomForest forest;
    forest.trees.reserve(p.n_trees);
    for (std::size_t t = 0; t < p.n_trees; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> rows(n);
        if (p.bootstrap) {
            for (auto& r : rows) r = uniform_index(rng, n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        detail::GrowOptions options;
        options.max_features = features;
        options.rng = &rng;
        forest.trees.push_back({detail::grow_tree(m, std::move(rows), targets, options)});
    }
    return forest;
}

Label RandomForest::predict_row(std::span<const double> x) const {
    std::size_t votes1 = 0;
    for (const auto& tree : trees) votes1 += tree.predict_row(x) == 1 ? 1 : 0;
    return 2 * votes1 > trees.size() ? 1 : 0;
}

// ---------------------------------------------------------------------------

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double log_loss(std::span<const Label> y, std::span<const double> score) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably
        const double s = y[i] == 1 ? score[i] : -score[i];
        total += s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
    }
    return total / static_cast<double>(y.size());
}

}  // namespace

GradientBoosting fit_gradient_boosting(const EncodedMatrix& m, const BoostingParams& p) {
    const std::size_t n = m.rows();
    const auto y = m.labels();
    const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior = positives / static_cast<double>(n);

    GradientBoosting model;
    model.learning_rate = p.learning_rate;
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<double> score(n, model.base_score);
    std::vector<double> residual(n);
    model.train_loss.push_back(log_loss(y, score));

    detail::GrowOptions options;
    options.criterion = detail::Criterion::squared_error;
    options.max_depth = p.max_depth;
    options.min_samples_split = 2;

    for (std::size_t stage = 0; stage < p.n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = (y[i] == 1 ? 1.0 : 0.0) - sigmoid(score[i]);
        Tree tree = detail::grow_tree(m, all_rows(n), residual, options);

        // One Newton step per leaf: sum(residual) / sum(p (1 - p)).
        std::vector<double> numerator(tree.nodes.size(), 0.0);
        std::vector<double> denominator(tree.nodes.size(), 0.0);
        std::vector<std::size_t> leaf_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            leaf_of[i] = tree.leaf_index(m.row(i));
            const double prob = sigmoid(score[i]);
            numerator[leaf_of[i]] += residual[i];
            denominator[leaf_of[i]] += prob * (1.0 - prob);
        }
        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            if (tree.nodes[id].feature >= 0) continue;
            tree.nodes[id].value = std::abs(denominator[id]) < 1e-150 ? 0.0 : numerator[id] / denominator[id];
        }
        for (std::size_t i = 0; i < n; ++i) score[i] += p.learning_rate * tree.nodes[leaf_of[i]].value;
        model.stages.push_back(std::move(tree));
        model.train_loss.push_back(log_loss(y, score));
    }
    return model;
}

double GradientBoosting::decision(std::span<const double> x) const {
    double s = base_score;
    for (const auto& tree : stages) s += learning_rate * tree.leaf(x).value;
    return s;
}

Label GradientBoosting::predict_row(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }

}  // namespace outcome_forge
