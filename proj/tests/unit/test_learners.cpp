#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "outcome_forge/outcome_forge.hpp"

using namespace outcome_forge;

namespace {

ModelSpec spec_of(Hyperparams params, std::uint64_t seed = 0) {
    ModelSpec s;
    s.params = std::move(params);
    s.seed = seed;
    return s;
}

SvmParams svm(KernelKind kind, double C = 1.0) {
    SvmParams p;
    p.kernel = kind;
    p.C = C;
    return p;
}

double training_accuracy(const TrainedModel& model, const EncodedMatrix& m) {
    const auto pred = predict(model, m);
    double hits = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) hits += pred[i] == m.labels()[i];
    return hits / static_cast<double>(m.rows());
}

EncodedMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed, double label_noise = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(p);
        for (double& v : x) v = g(rng);
        Label y = x[0] + 0.5 * (p > 1 ? x[1] : 0.0) > 0 ? 1 : 0;
        if (u(rng) < label_noise) y = 1 - y;
        rows.push_back(std::move(x));
        labels.push_back(y);
    }
    // Both classes are always present.
    labels[0] = 0;
    labels[1] = 1;
    return EncodedMatrix::from_rows(rows, labels);
}

std::vector<double> gram(const KernelParams& k, const oracle::Matrix& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = kernel_eval(k, x[i], x[j]);
    }
    return out;
}

}  // namespace

TEST_SUITE("kernels and impurity") {
    TEST_CASE("kernel values") {
        KernelParams k;
        const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
        CHECK(kernel_eval(k, e1, e2) == 0.0);
        k.kind = KernelKind::rbf;
        for (double gamma : {0.1, 1.0, 7.0}) {
            k.gamma = gamma;
            const std::vector<double> x{0.3, -2.0, 5.0};
            CHECK(kernel_eval(k, x, x) == 1.0);
        }
        k = KernelParams{KernelKind::poly, 1.0, 3, 0.0};
        const std::vector<double> a{1.0, 1.0}, b{1.0, 1.0};
        CHECK(kernel_eval(k, a, b) == doctest::Approx(8.0));
        k = KernelParams{KernelKind::sigmoid, 0.5, 3, 0.25};
        CHECK(kernel_eval(k, a, b) == doctest::Approx(std::tanh(0.5 * 2.0 + 0.25)));
    }

    TEST_CASE("gini values") {
        CHECK(gini(std::vector<Label>{1, 1, 1}) == 0.0);
        CHECK(gini(std::vector<Label>{0, 1}) == doctest::Approx(0.5));
        CHECK(gini(std::vector<Label>{0, 0, 1}) == doctest::Approx(4.0 / 9.0));
    }

    TEST_CASE("linear and rbf Gram matrices are positive semidefinite") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> g(0.0, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 2 + rng() % 29;
            oracle::Matrix x(n, std::vector<double>(1 + rng() % 5));
            for (auto& row : x) {
                for (double& v : row) v = g(rng);
            }
            for (KernelKind kind : {KernelKind::linear, KernelKind::rbf}) {
                KernelParams k;
                k.kind = kind;
                k.gamma = 0.3;
                const auto K = gram(k, x);
                Eigen::MatrixXd M(n, n);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = K[i * n + j];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
                CHECK(solver.eigenvalues().minCoeff() >= -1e-8);
            }
        }
    }
}

TEST_SUITE("decision tree") {
    TEST_CASE("one split at 1.5 separates [0,1,2,3] / [0,0,1,1]") {
        const auto m = EncodedMatrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 1, 1});
        const auto model = fit(spec_of(TreeParams{}), m);
        const auto& tree = model.as<DecisionTree>().tree;
        CHECK(tree.nodes[0].feature == 0);
        CHECK(tree.nodes[0].threshold == 1.5);
        CHECK(tree.leaf_count() == 2);
        CHECK(tree.depth() == 1);
        CHECK(training_accuracy(model, m) == 1.0);
    }

    TEST_CASE("root split matches the exhaustive oracle") {
        int compared = 0;
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            auto m = random_matrix(8 + seed % 20, 1 + seed % 4, seed);
            const auto best = oracle::best_split(fixtures::rows_of(m), {m.labels().begin(), m.labels().end()});
            if (!best || !best->unique) continue;
            const auto root = fit_decision_tree(m, TreeParams{}).tree.nodes[0];
            CHECK(static_cast<std::size_t>(root.feature) == best->feature);
            CHECK(root.threshold == doctest::Approx(best->threshold).epsilon(1e-12));
            ++compared;
        }
        CHECK(compared > 40);
    }

    TEST_CASE("impurity ties go to the lower feature index") {
        // Both columns separate the classes perfectly.
        const auto m = EncodedMatrix::from_rows({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}}, {0, 0, 1, 1});
        CHECK(fit_decision_tree(m, TreeParams{}).tree.nodes[0].feature == 0);
    }

    TEST_CASE("unlimited depth fits consistent data perfectly") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto m = random_matrix(40, 3, seed);
            CHECK(training_accuracy(fit(spec_of(TreeParams{}), m), m) == 1.0);
        }
    }

    TEST_CASE("single-class input predicts that class") {
        const auto m = EncodedMatrix::from_rows({{0.0}, {1.0}}, {1, 1});
        const auto model = fit(spec_of(TreeParams{}), m);
        CHECK(model.predict_row(std::vector<double>{5.0}) == 1);
    }

    TEST_CASE("depth cap") {
        TreeParams p;
        p.max_depth = 2;
        const auto m = random_matrix(60, 3, 4);
        CHECK(fit_decision_tree(m, p).tree.depth() <= 2);
    }
}

TEST_SUITE("random forest") {
    TEST_CASE("prediction is the mode of member trees, ties to 0") {
        const auto m = random_matrix(80, 4, 3);
        ForestParams p;
        p.n_trees = 10;  // even count makes ties possible
        const auto model = fit(spec_of(p, 5), m);
        const auto& forest = model.as<RandomForest>();
        REQUIRE(forest.trees.size() == 10);
        const auto probe = random_matrix(200, 4, 99);
        for (std::size_t i = 0; i < probe.rows(); ++i) {
            std::size_t ones = 0;
            for (const auto& t : forest.trees) ones += t.predict_row(probe.row(i)) == 1;
            CHECK(model.predict_row(probe.row(i)) == (2 * ones > forest.trees.size() ? 1 : 0));
        }
    }

    TEST_CASE("same seed, same forest; thread count does not matter") {
        const auto m = random_matrix(60, 4, 8);
        const auto a = fit(spec_of(ForestParams{}, 11), m);
        const auto b = fit(spec_of(ForestParams{}, 11), m);
        const auto probe = random_matrix(100, 4, 1);
        CHECK(predict(a, probe) == predict(b, probe));
    }
}

TEST_SUITE("gradient boosting") {
    TEST_CASE("zero stages predicts the majority class") {
        BoostingParams p;
        p.n_stages = 0;
        const auto m = EncodedMatrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}}, {1, 0, 1, 1, 0});
        const auto model = fit(spec_of(p), m);
        for (double x : {-5.0, 0.0, 2.5, 9.0}) CHECK(model.predict_row(std::vector<double>{x}) == 1);
        CHECK(model.as<GradientBoosting>().base_score == doctest::Approx(std::log(3.0 / 2.0)));
    }

    TEST_CASE("training log-loss never increases with stages") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto m = random_matrix(70, 3, seed);
            const auto model = fit(spec_of(BoostingParams{}), m);
            const auto& gb = model.as<GradientBoosting>();
            REQUIRE(gb.train_loss.size() == 101);
            for (std::size_t s = 1; s < gb.train_loss.size(); ++s) {
                CHECK(gb.train_loss[s] <= gb.train_loss[s - 1] + 1e-12);
            }
        }
    }
}

TEST_SUITE("logistic regression") {
    TEST_CASE("symmetric data gives a zero intercept") {
        const auto base = random_matrix(30, 3, 7);
        std::vector<std::vector<double>> rows = fixtures::rows_of(base);
        std::vector<Label> labels(base.labels().begin(), base.labels().end());
        for (std::size_t i = 0; i < base.rows(); ++i) {
            std::vector<double> neg(base.row(i).begin(), base.row(i).end());
            for (double& v : neg) v = -v;
            rows.push_back(neg);
            labels.push_back(1 - base.labels()[i]);
        }
        const auto model = fit(spec_of(LogisticParams{}), EncodedMatrix::from_rows(rows, labels));
        CHECK(std::abs(model.as<LogisticRegression>().intercept) <= 1e-6);
    }

    TEST_CASE("the regularised gradient vanishes at the solution") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto m = random_matrix(50, 4, seed);
            const auto model = fit(spec_of(LogisticParams{}), m);
            CHECK(model.info().converged);
            const auto& lr = model.as<LogisticRegression>();
            std::vector<double> g(lr.weights);  // from 1/2 |w|^2
            double gb = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                const double y = m.labels()[i] == 1 ? 1.0 : -1.0;
                double z = lr.intercept;
                for (std::size_t j = 0; j < m.cols(); ++j) z += lr.weights[j] * m.at(i, j);
                const double s = 1.0 / (1.0 + std::exp(y * z));  // sigma(-y z)
                for (std::size_t j = 0; j < m.cols(); ++j) g[j] -= y * s * m.at(i, j);
                gb -= y * s;
            }
            double norm = std::abs(gb);
            for (double v : g) norm = std::max(norm, std::abs(v));
            CHECK(norm <= 1e-5);
        }
    }
}

TEST_SUITE("k nearest neighbours") {
    TEST_CASE("k=1 returns the nearest label") {
        KnnParams p;
        p.k = 1;
        const auto m = EncodedMatrix::from_rows({{0.1, 0.0}, {3.0, 3.0}}, {1, 0});
        CHECK(fit(spec_of(p), m).predict_row(std::vector<double>{0.0, 0.0}) == 1);
    }

    TEST_CASE("matches the all-pairs oracle") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng() % 49;
            const std::size_t p = 1 + rng() % 8;
            KnnParams kp;
            kp.k = 1 + rng() % 7;
            const auto m = random_matrix(n, p, rng(), 0.5);
            const auto model = fit(spec_of(kp), m);
            const auto rows = fixtures::rows_of(m);
            const std::vector<int> y(m.labels().begin(), m.labels().end());
            const auto probe = random_matrix(20, p, rng());
            for (std::size_t i = 0; i < probe.rows(); ++i) {
                CHECK(model.predict_row(probe.row(i)) == oracle::knn_predict(rows, y, probe.row(i), kp.k));
            }
        }
    }

    TEST_CASE("vote ties go to 0 and distance ties to the lower row") {
        KnnParams p;
        p.k = 2;
        const auto m = EncodedMatrix::from_rows({{1.0}, {-1.0}, {1.0}}, {1, 0, 0});
        CHECK(fit(spec_of(p), m).predict_row(std::vector<double>{0.0}) == 0);
        p.k = 1;
        CHECK(fit(spec_of(p), m).predict_row(std::vector<double>{0.0}) == 1);
    }
}

TEST_SUITE("mlp") {
    TEST_CASE("full-batch training loss is non-increasing") {
        MlpParams p;
        p.batch_size = 1000;
        p.max_epochs = 150;
        p.hidden_units = 16;
        const auto m = random_matrix(40, 3, 2, 0.0);
        const auto model = fit(spec_of(p, 3), m);
        const auto& curve = model.as<Mlp>().loss_curve;
        REQUIRE(curve.size() >= 2);
        for (std::size_t e = 1; e < curve.size(); ++e) CHECK(curve[e] <= curve[e - 1] + 1e-12);
    }

    TEST_CASE("same seed, same network") {
        const auto m = random_matrix(50, 3, 4);
        const auto a = fit(spec_of(MlpParams{}, 9), m);
        const auto b = fit(spec_of(MlpParams{}, 9), m);
        CHECK(a.as<Mlp>().w1 == b.as<Mlp>().w1);
        CHECK(a.as<Mlp>().loss_curve == b.as<Mlp>().loss_curve);
    }

    TEST_CASE("learns separable blobs") {
        const auto m = fixtures::blobs(60, 10.0, 1.0, 3);
        CHECK(training_accuracy(fit(spec_of(MlpParams{}, 1), m), m) == 1.0);
    }
}

TEST_SUITE("svm") {
    TEST_CASE("two-point instance") {
        const auto m = EncodedMatrix::from_rows({{-1.0}, {1.0}}, {0, 1});
        const auto model = fit(spec_of(svm(KernelKind::linear)), m);
        const auto& s = model.as<Svm>();
        CHECK(s.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(s.alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(std::abs(s.bias) <= 1e-6);
        CHECK(std::abs(s.decision(std::vector<double>{0.0})) <= 1e-6);
        CHECK(model.predict_row(std::vector<double>{0.0}) == 1);  // decision 0 maps to 1
        CHECK(model.predict_row(std::vector<double>{-0.1}) == 0);

        const std::vector<double> K{1.0, -1.0, -1.0, 1.0};
        const std::vector<double> y{-1.0, 1.0};
        const auto r = smo_solve(K, y, 1.0, 1e-3, 10000);
        CHECK(r.alpha[0] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(r.alpha[1] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(std::abs(r.bias) <= 1e-6);
        CHECK(r.converged);
    }

    TEST_CASE("dual objective agrees with projected gradient") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t n = 2 + rng() % 19;
            oracle::Matrix x(n, std::vector<double>(2));
            std::vector<double> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (double& v : x[i]) v = g(rng);
                y[i] = (x[i][0] + 0.7 * g(rng)) > 0 ? 1.0 : -1.0;
            }
            y[0] = 1.0;
            y[1] = -1.0;
            KernelParams k;
            k.kind = trial % 2 == 0 ? KernelKind::linear : KernelKind::rbf;
            k.gamma = 0.5;
            const double C = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 4.0);
            const auto K = gram(k, x);
            const auto r = smo_solve(K, y, C, 1e-3, 10000);
            oracle::Matrix Km(n, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) Km[i][j] = K[i * n + j];
            }
            CAPTURE(trial);
            CHECK(std::abs(r.objective - oracle::svm_dual_reference(Km, y, C)) <= 1e-3);
            CHECK(r.kkt_violation <= 1e-3);
            double balance = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(r.alpha[i] >= 0.0);
                CHECK(r.alpha[i] <= C);
                balance += r.alpha[i] * y[i];
            }
            CHECK(std::abs(balance) <= 1e-9);
        }
    }

    TEST_CASE("duplicating every point keeps the decision function") {
        const auto m = fixtures::blobs(30, 6.0, 1.0, 4);
        std::vector<std::vector<double>> rows = fixtures::rows_of(m);
        std::vector<Label> labels(m.labels().begin(), m.labels().end());
        const std::size_t n = rows.size();
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back(rows[i]);
            labels.push_back(labels[i]);
        }
        const auto doubled = EncodedMatrix::from_rows(rows, labels);
        for (KernelKind kind : {KernelKind::linear, KernelKind::rbf}) {
            SvmParams p = svm(kind);
            p.gamma = 0.2;
            p.C = 1000.0;
            FitInfo ia, ib;
            const auto a = fit_svm(m, p, ia);
            const auto b = fit_svm(doubled, p, ib);
            for (double alpha : a.alpha) REQUIRE(alpha < p.C - 1e-6);  // no bound support vectors
            int compared = 0;
            for (double gx = -8.0; gx <= 8.0; gx += 0.5) {
                for (double gy = -4.0; gy <= 4.0; gy += 0.5) {
                    const std::vector<double> q{gx, gy};
                    const double da = a.decision(q);
                    if (std::abs(da) < 1e-2) continue;
                    CHECK((da >= 0) == (b.decision(q) >= 0));
                    ++compared;
                }
            }
            CHECK(compared > 500);
        }
    }

    TEST_CASE("fitted models are dual feasible") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto m = random_matrix(40, 3, seed);
            for (KernelKind kind : {KernelKind::linear, KernelKind::poly, KernelKind::rbf, KernelKind::sigmoid}) {
                FitInfo info;
                const auto s = fit_svm(m, svm(kind), info);
                double balance = 0.0;
                for (std::size_t i = 0; i < m.rows(); ++i) {
                    CHECK(s.alpha[i] >= 0.0);
                    CHECK(s.alpha[i] <= 1.0);
                    balance += s.alpha[i] * (m.labels()[i] == 1 ? 1.0 : -1.0);
                }
                CHECK(std::abs(balance) <= 1e-9);
            }
        }
    }

    TEST_CASE("scale gamma") {
        const auto m = EncodedMatrix::from_rows({{0.0, 1.0}, {2.0, 1.0}, {4.0, 1.0}}, {0, 1, 0});
        // Column variances 8/3 and 0, mean 4/3, p = 2.
        CHECK(scale_gamma(m) == doctest::Approx(1.0 / (2.0 * 4.0 / 3.0)));
        const auto flat = EncodedMatrix::from_rows({{1.0}, {1.0}}, {0, 1});
        CHECK(scale_gamma(flat) == 1.0);
    }
}

TEST_SUITE("fit contract") {
    TEST_CASE("every registered model fits, predicts 0/1 and is deterministic") {
        const auto m = random_matrix(40, 3, 6);
        const auto probe = random_matrix(30, 3, 7);
        for (auto id : model_ids()) {
            CAPTURE(id);
            const auto spec = model_spec(id, 4);
            const auto a = predict(fit(spec, m), probe);
            const auto b = predict(fit(spec, m), probe);
            CHECK(a == b);
            for (Label l : a) CHECK((l == 0 || l == 1));
            CHECK_FALSE(display_name(id).empty());
        }
        CHECK_THROWS_AS(model_spec("naive-bayes"), ConfigError);
    }

    TEST_CASE("errors") {
        const auto m = random_matrix(20, 2, 1);
        const auto model = fit(model_spec("logreg"), m);
        CHECK_THROWS_AS(predict(model, random_matrix(5, 3, 2)), ShapeError);
        CHECK_THROWS_AS(model.predict_row(std::vector<double>{1.0}), ShapeError);

        auto rows = fixtures::rows_of(m);
        rows[3][1] = std::numeric_limits<double>::quiet_NaN();
        const auto bad = EncodedMatrix::from_rows(rows, {m.labels().begin(), m.labels().end()});
        CHECK_THROWS_AS(fit(model_spec("knn"), bad), DataError);

        const auto single = EncodedMatrix::from_rows({{0.0}, {1.0}, {2.0}}, {0, 0, 0});
        CHECK_THROWS_AS(fit(model_spec("svm-rbf"), single), ImbalanceError);
        CHECK(fit(model_spec("knn"), single).predict_row(std::vector<double>{1.0}) == 0);

        SvmParams p;
        p.C = -1.0;
        CHECK_THROWS_AS(fit(spec_of(p), m), ConfigError);
        KnnParams k;
        k.k = 0;
        CHECK_THROWS_AS(fit(spec_of(k), m), ConfigError);
    }

    TEST_CASE("iteration caps are reported, not hidden") {
        SvmParams p = svm(KernelKind::rbf);
        p.max_iter = 1;
        const auto model = fit(spec_of(p), random_matrix(40, 3, 2));
        CHECK_FALSE(model.info().converged);
    }
}
