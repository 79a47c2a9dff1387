#include <Eigen/Dense>
#include <cmath>

#include "outcome_forge/learners.hpp"

namespace outcome_forge {

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

// Minimises 1/2 |w|^2 + C * sum log(1 + exp(-y_i (w.x_i + b))) with damped Newton steps.
// The intercept is unpenalised.
LogisticRegression fit_logistic(const EncodedMatrix& m, const LogisticParams& p, FitInfo& info) {
    const auto n = static_cast<Eigen::Index>(m.rows());
    const auto d = static_cast<Eigen::Index>(m.cols());
    Eigen::MatrixXd x(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        x(i, d) = 1.0;
        y(i) = m.labels()[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Ones(d + 1);
    penalty(d) = 0.0;

    auto objective = [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd margin = (x * w).cwiseProduct(y);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) loss += log1pexp(-margin(i));
        return 0.5 * w.cwiseProduct(penalty).squaredNorm() + p.C * loss;
    };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    double f = objective(w);
    info.converged = false;
    std::size_t iter = 0;
    for (; iter < p.max_iter; ++iter) {
        const Eigen::VectorXd margin = (x * w).cwiseProduct(y);
        Eigen::VectorXd coeff(n);   // d loss / d z_i
        Eigen::VectorXd weight(n);  // d2 loss / d z_i^2
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sigmoid(-margin(i));
            coeff(i) = -y(i) * s;
            weight(i) = s * (1.0 - s);
        }
        const Eigen::VectorXd grad = w.cwiseProduct(penalty) + p.C * (x.transpose() * coeff);
        if (grad.lpNorm<Eigen::Infinity>() <= p.tol) {
            info.converged = true;
            break;
        }
        Eigen::MatrixXd hessian = p.C * (x.transpose() * weight.asDiagonal() * x);
        hessian.diagonal() += penalty;
        hessian.diagonal().array() += 1e-12;
        const Eigen::VectorXd step = hessian.ldlt().solve(-grad);

        double t = 1.0;
        const double slope = grad.dot(step);
        Eigen::VectorXd candidate = w + step;
        double fc = objective(candidate);
        while (fc > f + 1e-4 * t * slope && t > 1e-10) {
            t *= 0.5;
            candidate = w + t * step;
            fc = objective(candidate);
        }
        w = candidate;
        f = fc;
    }
    info.iterations = iter;
    info.objective = f;

    LogisticRegression model;
    model.weights.assign(w.data(), w.data() + d);
    model.intercept = w(d);
    return model;
}

double LogisticRegression::decision(std::span<const double> x) const {
    double z = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
    return z;
}

Label LogisticRegression::predict_row(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }

}  // namespace outcome_forge
