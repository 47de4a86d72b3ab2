#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftloc/learners.hpp"

namespace driftloc {

Standardizer Standardizer::fit(const Matrix& X) {
    Standardizer s;
    const double n = static_cast<double>(X.rows());
    s.mean.assign(X.cols(), 0.0);
    s.scale.assign(X.cols(), 0.0);
    for (std::size_t f = 0; f < X.cols(); ++f) {
        double m = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) m += X(r, f);
        m /= n;
        double var = 0.0;
        bool constant = true;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            var += (X(r, f) - m) * (X(r, f) - m);
            constant = constant && X(r, f) == X(0, f);
        }
        s.mean[f] = m;
        s.scale[f] = constant ? 0.0 : std::sqrt(var / n);
    }
    return s;
}

Matrix Standardizer::transform(const Matrix& X) const {
    Matrix Z(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t f = 0; f < X.cols(); ++f)
            Z(r, f) = scale[f] > 0.0 ? (X(r, f) - mean[f]) / scale[f] : 0.0;
    return Z;
}

namespace {

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }
// 1 / (1 + exp(m))
double sigmoid_neg(double m) {
    if (m >= 0) {
        const double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

double sign_of(int label) { return label ? 1.0 : -1.0; }

double margin(const Matrix& Z, std::size_t i, std::span<const double> theta) {
    const auto F = Z.cols();
    double m = theta[F];
    for (std::size_t f = 0; f < F; ++f) m += theta[f] * Z(i, f);
    return m;
}

}  // namespace

double LogisticObjective::value(std::span<const double> theta) const {
    const auto F = Z.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < Z.rows(); ++i) loss += softplus_neg(sign_of(y[i]) * margin(Z, i, theta));
    loss /= static_cast<double>(Z.rows());
    double reg = 0.0;
    for (std::size_t f = 0; f < F; ++f) reg += theta[f] * theta[f];
    return loss + 0.5 * lambda * reg;
}

std::vector<double> LogisticObjective::gradient(std::span<const double> theta) const {
    const auto F = Z.cols();
    std::vector<double> g(F + 1, 0.0);
    for (std::size_t i = 0; i < Z.rows(); ++i) {
        const double s = sign_of(y[i]);
        const double coef = -s * sigmoid_neg(s * margin(Z, i, theta));
        for (std::size_t f = 0; f < F; ++f) g[f] += coef * Z(i, f);
        g[F] += coef;
    }
    const double n = static_cast<double>(Z.rows());
    for (auto& v : g) v /= n;
    for (std::size_t f = 0; f < F; ++f) g[f] += lambda * theta[f];
    return g;
}

FittedModel fit_logreg(const LabeledWindowDataset& d, double c, std::size_t epochs, std::uint64_t seed) {
    validate(d);
    if (!(c > 0.0)) throw std::invalid_argument("fit_logreg: C must be positive");
    const auto stdz = Standardizer::fit(d.X);
    const Matrix Z = stdz.transform(d.X);
    const LogisticObjective objective{Z, d.y, 1.0 / (c * static_cast<double>(d.size()))};

    const auto F = d.features();
    std::vector<double> theta(F + 1, 0.0), trial(F + 1);
    LinearModel lin;
    double f0 = objective.value(theta);
    double step_size = 1.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const auto g = objective.gradient(theta);
        const double gnorm2 = std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        if (gnorm2 < 1e-20) {
            lin.loss_history.push_back(f0);
            continue;
        }
        step_size *= 2.0;
        double f1 = f0;
        for (;;) {
            for (std::size_t k = 0; k <= F; ++k) trial[k] = theta[k] - step_size * g[k];
            f1 = objective.value(trial);
            if (f1 <= f0 - 0.5 * step_size * gnorm2) break;
            step_size *= 0.5;
            if (step_size < 1e-20) {
                trial = theta;
                f1 = f0;
                break;
            }
        }
        theta = trial;
        f0 = f1;
        lin.loss_history.push_back(f0);
    }
    lin.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(F));
    lin.intercept = theta[F];
    lin.mean = stdz.mean;
    lin.scale = stdz.scale;
    lin.c = c;
    return {ModelFamily::logistic_regression, std::move(lin), seed};
}

FittedModel fit_logreg_cv(const LabeledWindowDataset& d, const std::vector<double>& c_grid, std::size_t folds,
                          std::size_t epochs, std::uint64_t seed) {
    validate(d);
    if (c_grid.empty()) throw std::invalid_argument("fit_logreg_cv: empty C grid");
    const auto fold_rows = stratified_folds(d.y, folds, seed);
    for (const auto& fold : fold_rows) {
        bool has0 = false, has1 = false;
        for (auto r : fold) (d.y[r] ? has1 : has0) = true;
        if (!has0 || !has1) throw std::invalid_argument("fit_logreg_cv: degenerate single-class fold");
    }

    std::vector<double> grid = c_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<std::pair<double, double>> scores;
    double best_c = grid.front(), best_acc = -1.0;
    for (double c : grid) {
        double acc = 0.0;
        for (std::size_t k = 0; k < fold_rows.size(); ++k) {
            std::vector<std::size_t> train;
            for (std::size_t j = 0; j < fold_rows.size(); ++j)
                if (j != k) train.insert(train.end(), fold_rows[j].begin(), fold_rows[j].end());
            std::sort(train.begin(), train.end());
            auto model = fit_logreg(subset(d, train), c, epochs, seed);
            acc += accuracy(model, subset(d, fold_rows[k]));
        }
        acc /= static_cast<double>(fold_rows.size());
        scores.emplace_back(c, acc);
        // Strictly better only: ties keep the smaller C (stronger regularization).
        if (acc > best_acc + 1e-12) {
            best_acc = acc;
            best_c = c;
        }
    }
    auto model = fit_logreg(d, best_c, epochs, seed);
    auto lin = model.linear();
    lin.cv_accuracy = std::move(scores);
    return {ModelFamily::logistic_regression, std::move(lin), seed};
}

double svm_objective(const Matrix& Z, std::span<const int> y, std::span<const double> weights, double bias,
                     double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < Z.rows(); ++i) {
        double m = bias;
        for (std::size_t f = 0; f < Z.cols(); ++f) m += weights[f] * Z(i, f);
        hinge += std::max(0.0, 1.0 - sign_of(y[i]) * m);
    }
    double reg = bias * bias;
    for (double w : weights) reg += w * w;
    return 0.5 * lambda * reg + hinge / static_cast<double>(Z.rows());
}

FittedModel fit_linear_svm(const LabeledWindowDataset& d, double c, std::size_t epochs, std::uint64_t seed) {
    validate(d);
    if (!(c > 0.0)) throw std::invalid_argument("fit_linear_svm: C must be positive");
    if (epochs == 0) throw std::invalid_argument("fit_linear_svm: epochs must be >= 1");
    const auto stdz = Standardizer::fit(d.X);
    const Matrix Z = stdz.transform(d.X);
    const auto n = d.size();
    const auto F = d.features();
    const double lambda = 1.0 / (c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);

    // theta = (w..., b); the bias acts on a constant 1 feature.
    std::vector<double> theta(F + 1, 0.0), average(F + 1, 0.0);
    std::size_t averaged = 0;
    const std::size_t total_steps = epochs * n;
    std::vector<std::size_t> order(n);
    Rng rng(seed);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(rng)]);
        }
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double s = sign_of(d.y[i]);
            const bool active = s * margin(Z, i, theta) < 1.0;
            const double shrink = 1.0 - eta * lambda;
            for (auto& v : theta) v *= shrink;
            if (active) {
                for (std::size_t f = 0; f < F; ++f) theta[f] += eta * s * Z(i, f);
                theta[F] += eta * s;
            }
            const double norm = std::sqrt(std::inner_product(theta.begin(), theta.end(), theta.begin(), 0.0));
            if (norm > radius)
                for (auto& v : theta) v *= radius / norm;
            if (2 * t > total_steps) {
                ++averaged;
                for (std::size_t k = 0; k <= F; ++k) average[k] += (theta[k] - average[k]) / static_cast<double>(averaged);
            }
        }
    }
    LinearModel lin;
    lin.weights.assign(average.begin(), average.begin() + static_cast<std::ptrdiff_t>(F));
    lin.intercept = average[F];
    for (std::size_t f = 0; f < F; ++f)
        if (stdz.scale[f] == 0.0) lin.weights[f] = 0.0;
    lin.mean = stdz.mean;
    lin.scale = stdz.scale;
    lin.c = c;
    return {ModelFamily::linear_svm, std::move(lin), seed};
}

}  // namespace driftloc
