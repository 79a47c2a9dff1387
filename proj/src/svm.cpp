#include <algorithm>
#include <cmath>
#include <limits>

#include "outcome_forge/errors.hpp"
#include "outcome_forge/learners.hpp"

namespace outcome_forge {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

}  // namespace

double kernel_eval(const KernelParams& params, std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) throw ShapeError("kernel arguments differ in dimension");
    switch (params.kind) {
        case KernelKind::linear: return dot(x, z);
        case KernelKind::poly: return std::pow(params.gamma * dot(x, z) + params.coef0, params.degree);
        case KernelKind::rbf: {
            double d = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) d += (x[j] - z[j]) * (x[j] - z[j]);
            return std::exp(-params.gamma * d);
        }
        case KernelKind::sigmoid: return std::tanh(params.gamma * dot(x, z) + params.coef0);
    }
    return 0.0;
}

// Working-set selection and pair update follow the LIBSVM formulation
// (Fan, Chen & Lin 2005), with C_i = C for every row.
SmoResult smo_solve(std::span<const double> kernel, std::span<const double> y, double C, double tol,
                    std::size_t max_iter) {
    const std::size_t n = y.size();
    if (kernel.size() != n * n) throw ShapeError("kernel matrix must be n x n");
    if (!(C > 0.0)) throw ConfigError("C must be positive");
    for (double v : y) {
        if (v != 1.0 && v != -1.0) throw DataError("SMO labels must be +1 or -1");
    }

    auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };
    auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K(i, j); };

    SmoResult result;
    result.alpha.assign(n, 0.0);
    std::vector<double>& alpha = result.alpha;
    std::vector<double> grad(n, -1.0);

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

    auto kkt_gap = [&] {
        double gmax = -kInf;
        double gmin = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t)) gmax = std::max(gmax, v);
            if (in_low(t)) gmin = std::min(gmin, v);
        }
        return (gmax == -kInf || gmin == kInf) ? 0.0 : std::max(0.0, gmax - gmin);
    };

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        double gmax = -kInf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmin = kInf;
        std::size_t j = n;
        double best_obj = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = -y[t] * grad[t];
            gmin = std::min(gmin, v);
            if (i == n) continue;
            const double b = gmax - v;
            if (b > 0.0) {
                double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax - gmin < tol) {
            result.converged = true;
            break;
        }

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = K(i, i) + K(j, j) + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = K(i, i) + K(j, j) - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * dai + Q(t, j) * daj;
    }
    result.iterations = iter;

    // Bias: average over free vectors, else the midpoint of the feasible interval.
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    double rho = 0.0;
    if (n_free > 0) {
        rho = sum_free / static_cast<double>(n_free);
    } else if (std::isfinite(ub) && std::isfinite(lb)) {
        rho = 0.5 * (ub + lb);
    } else if (std::isfinite(ub)) {
        rho = ub;
    } else if (std::isfinite(lb)) {
        rho = lb;
    }
    result.bias = -rho;

    // With grad = Q alpha - e: objective = sum alpha - 1/2 alpha'Q alpha = -1/2 sum alpha_i (grad_i - 1).
    double objective = 0.0;
    for (std::size_t t = 0; t < n; ++t) objective -= 0.5 * alpha[t] * (grad[t] - 1.0);
    result.objective = objective;
    result.kkt_violation = kkt_gap();
    return result;
}

double scale_gamma(const EncodedMatrix& m) {
    if (m.cols() == 0 || m.rows() == 0) return 1.0;
    double total = 0.0;
    const double n = static_cast<double>(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) mean += m.at(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) var += (m.at(i, j) - mean) * (m.at(i, j) - mean);
        total += var / n;
    }
    const double mean_var = total / static_cast<double>(m.cols());
    return mean_var > 0.0 ? 1.0 / (static_cast<double>(m.cols()) * mean_var) : 1.0;
}

Svm fit_svm(const EncodedMatrix& m, const SvmParams& p, FitInfo& info) {
    const std::size_t n = m.rows();
    Svm model;
    model.kernel = {p.kernel, p.gamma.value_or(scale_gamma(m)), p.degree, p.coef0};

    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double k = kernel_eval(model.kernel, m.row(i), m.row(j));
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = m.labels()[i] == 1 ? 1.0 : -1.0;

    SmoResult smo = smo_solve(gram, y, p.C, p.tol, p.max_iter);
    info.iterations = smo.iterations;
    info.converged = smo.converged;
    info.objective = smo.objective;

    model.alpha = smo.alpha;
    model.bias = smo.bias;
    for (std::size_t i = 0; i < n; ++i) {
        if (smo.alpha[i] > 0.0) {
            const auto row = m.row(i);
            model.support.emplace_back(row.begin(), row.end());
            model.support_coef.push_back(smo.alpha[i] * y[i]);
            model.support_rows.push_back(i);
        }
    }
    return model;
}

double Svm::decision(std::span<const double> x) const {
    double s = bias;
    for (std::size_t k = 0; k < support.size(); ++k) s += support_coef[k] * kernel_eval(kernel, support[k], x);
    return s;
}

Label Svm::predict_row(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : 0; }

}  // namespace outcome_forge
