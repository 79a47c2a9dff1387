#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "outcome_forge/learners.hpp"
#include "outcome_forge/random.hpp"

namespace outcome_forge {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::RowVectorXd;

struct Adam {
    Matrix m;
    Matrix v;

    explicit Adam(Eigen::Index rows, Eigen::Index cols) : m(Matrix::Zero(rows, cols)), v(Matrix::Zero(rows, cols)) {}

    void step(Matrix& param, const Matrix& grad, const MlpParams& p, double step_size) {
        m = p.beta1 * m + (1.0 - p.beta1) * grad;
        v = p.beta2 * v + (1.0 - p.beta2) * grad.cwiseProduct(grad);
        param.array() -= step_size * m.array() / (v.array().sqrt() + p.epsilon);
    }
};

struct Network {
    Matrix w1, b1, w2, b2;  // b1: 1 x hidden, b2: 1 x 2
};

// Mean cross-entropy plus the L2 term, for rows of x with one-hot targets t.
struct Pass {
    Matrix hidden;
    Matrix prob;
};

Pass forward(const Network& net, const Matrix& x) {
    Pass pass;
    pass.hidden = ((x * net.w1).rowwise() + net.b1.row(0)).cwiseMax(0.0);
    Matrix logits = (pass.hidden * net.w2).rowwise() + net.b2.row(0);
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    logits = logits.colwise() - row_max;
    pass.prob = logits.array().exp();
    Eigen::VectorXd denom = pass.prob.rowwise().sum();
    for (Eigen::Index i = 0; i < pass.prob.rows(); ++i) pass.prob.row(i) /= denom(i);
    return pass;
}

double loss_of(const Network& net, const Pass& pass, const Matrix& targets, double l2) {
    const double rows = static_cast<double>(targets.rows());
    const double eps = std::numeric_limits<double>::min();
    const double ce = -(targets.array() * pass.prob.array().max(eps).log()).sum() / rows;
    return ce + 0.5 * l2 * (net.w1.squaredNorm() + net.w2.squaredNorm()) / rows;
}

}  // namespace

Mlp fit_mlp(const EncodedMatrix& m, const MlpParams& p, std::uint64_t seed, FitInfo& info) {
    const auto n = static_cast<Eigen::Index>(m.rows());
    const auto d = static_cast<Eigen::Index>(m.cols());
    const auto h = static_cast<Eigen::Index>(p.hidden_units);

    Matrix x(n, d);
    Matrix targets = Matrix::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        targets(i, m.labels()[static_cast<std::size_t>(i)] == 1 ? 1 : 0) = 1.0;
    }

    Rng rng(seed);
    auto glorot = [&](Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
        }
        return w;
    };
    Network net;
    net.w1 = glorot(d, h, double(d), double(h));
    net.b1 = glorot(1, h, double(d), double(h));
    net.w2 = glorot(h, 2, double(h), 2.0);
    net.b2 = glorot(1, 2, double(h), 2.0);

    Adam opt_w1(d, h), opt_b1(1, h), opt_w2(h, 2), opt_b2(1, 2);

    const std::size_t batch = std::clamp<std::size_t>(p.batch_size, 1, m.rows());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    Mlp model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t no_improvement = 0;
    std::size_t t = 0;
    info.converged = false;

    std::size_t epoch = 0;
    for (; epoch < p.max_epochs; ++epoch) {
        if (batch < m.rows()) std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < m.rows(); start += batch) {
            const std::size_t stop = std::min(start + batch, m.rows());
            const auto rows = static_cast<Eigen::Index>(stop - start);
            Matrix xb(rows, d);
            Matrix tb(rows, 2);
            for (Eigen::Index r = 0; r < rows; ++r) {
                xb.row(r) = x.row(order[start + static_cast<std::size_t>(r)]);
                tb.row(r) = targets.row(order[start + static_cast<std::size_t>(r)]);
            }
            const Pass pass = forward(net, xb);
            epoch_loss += loss_of(net, pass, tb, p.l2) * static_cast<double>(rows);

            const double scale = 1.0 / static_cast<double>(rows);
            Matrix delta2 = (pass.prob - tb) * scale;
            Matrix grad_w2 = pass.hidden.transpose() * delta2 + p.l2 * scale * net.w2;
            Matrix grad_b2 = delta2.colwise().sum();
            Matrix delta1 = (delta2 * net.w2.transpose()).cwiseProduct((pass.hidden.array() > 0.0).cast<double>().matrix());
            Matrix grad_w1 = xb.transpose() * delta1 + p.l2 * scale * net.w1;
            Matrix grad_b1 = delta1.colwise().sum();

            ++t;
            const double step = p.learning_rate * std::sqrt(1.0 - std::pow(p.beta2, double(t))) /
                                (1.0 - std::pow(p.beta1, double(t)));
            opt_w1.step(net.w1, grad_w1, p, step);
            opt_b1.step(net.b1, grad_b1, p, step);
            opt_w2.step(net.w2, grad_w2, p, step);
            opt_b2.step(net.b2, grad_b2, p, step);
        }
        epoch_loss /= static_cast<double>(n);
        model.loss_curve.push_back(epoch_loss);

        if (epoch_loss > best_loss - p.tol) {
            ++no_improvement;
        } else {
            no_improvement = 0;
        }
        best_loss = std::min(best_loss, epoch_loss);
        if (no_improvement > p.patience) {
            info.converged = true;
            ++epoch;
            break;
        }
    }
    info.iterations = epoch;
    info.objective = model.loss_curve.empty() ? 0.0 : model.loss_curve.back();

    model.inputs = static_cast<std::size_t>(d);
    model.hidden = static_cast<std::size_t>(h);
    model.w1.assign(net.w1.data(), net.w1.data() + net.w1.size());
    model.b1.assign(net.b1.data(), net.b1.data() + net.b1.size());
    model.w2.assign(net.w2.data(), net.w2.data() + net.w2.size());
    model.b2.assign(net.b2.data(), net.b2.data() + net.b2.size());
    return model;
}

double Mlp::probability(std::span<const double> x) const {
    double z0 = b2[0];
    double z1 = b2[1];
    for (std::size_t u = 0; u < hidden; ++u) {
        double a = b1[u];
        for (std::size_t j = 0; j < inputs; ++j) a += x[j] * w1[j * hidden + u];
        if (a > 0.0) {
            z0 += a * w2[u * 2];
            z1 += a * w2[u * 2 + 1];
        }
    }
    return 1.0 / (1.0 + std::exp(z0 - z1));
}

Label Mlp::predict_row(std::span<const double> x) const { return probability(x) > 0.5 ? 1 : 0; }

}  // namespace outcome_forge
