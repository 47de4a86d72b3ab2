#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "driftloc/matrix.hpp"
#include "driftloc/rng.hpp"

namespace driftloc {

/// Samples are time steps, features are sensors; label 0 = before onset,
/// 1 = at/after onset.
struct LabeledWindowDataset {
    Matrix X;
    std::vector<int> y;
    std::vector<std::string> feature_ids;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t features() const noexcept { return X.cols(); }
};

/// Throws unless shapes agree, labels are binary and both classes occur.
void validate(const LabeledWindowDataset& d);
LabeledWindowDataset subset(const LabeledWindowDataset& d, std::span<const std::size_t> rows);

struct TrainHoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
};

/// Per-class shuffled split; each class contributes round(fraction * n_c)
/// holdout rows (at least one when the class has two or more rows).
TrainHoldoutSplit stratified_split(std::span<const int> y, double holdout_fraction, std::uint64_t seed);
/// k disjoint folds, each class dealt round-robin after a per-class shuffle.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> y, std::size_t k,
                                                       std::uint64_t seed);

class ImportanceVector {
public:
    ImportanceVector() = default;
    /// Scores must be nonnegative; `normalize` rescales to unit sum when any score is positive.
    ImportanceVector(std::vector<double> scores, bool normalize);
    /// Rebuilds a stored vector as-is (no renormalization).
    static ImportanceVector restore(std::vector<double> scores, bool normalized);

    std::size_t size() const noexcept { return scores_.size(); }
    double operator[](std::size_t i) const { return scores_[i]; }
    const std::vector<double>& scores() const noexcept { return scores_; }
    bool normalized() const noexcept { return normalized_; }

private:
    std::vector<double> scores_;
    bool normalized_ = false;
};

enum class ModelFamily { random_forest, extra_trees, logistic_regression, linear_svm };
std::string_view to_string(ModelFamily family);

enum class SplitRule {
    /// Best threshold among all midpoints (CART / random forest).
    best,
    /// One uniform threshold per candidate feature (extra trees).
    random_threshold,
};

struct TreeParams {
    SplitRule rule = SplitRule::best;
    std::size_t max_depth = 8;
    /// Non-constant candidate features examined per split; 0 means all.
    std::size_t max_features = 0;
};

struct TreeNode {
    int feature = -1;  // < 0 for leaves
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int label = 0;
    std::size_t samples = 0;
    /// (n_node / n_tree) * (gini_node - weighted child gini)
    double weighted_impurity_decrease = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int predict(std::span<const double> x) const;
    std::size_t depth() const;
};

/// Fits one Gini tree on `rows` of X (duplicates allowed, e.g. bootstrap).
/// `feature_keys` (one per column) decide candidate order and tie-breaks, so
/// permuting columns together with their keys permutes the tree.
DecisionTree fit_decision_tree(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                               const TreeParams& params, std::span<const std::uint64_t> feature_keys,
                               std::uint64_t seed);

struct TreeEnsemble {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
};

struct LinearModel {
    /// Weights act on standardized features; constant columns keep weight 0.
    std::vector<double> weights;
    double intercept = 0.0;
    std::vector<double> mean;
    std::vector<double> scale;  // 0 marks a dropped constant column
    double c = 1.0;             // inverse regularization strength
    std::vector<std::pair<double, double>> cv_accuracy;  // (C, mean fold accuracy)
    std::vector<double> loss_history;
};

class FittedModel {
public:
    FittedModel(ModelFamily family, std::variant<TreeEnsemble, LinearModel> params, std::uint64_t seed)
        : family_(family), params_(std::move(params)), seed_(seed) {}

    ModelFamily family() const noexcept { return family_; }
    bool is_tree() const noexcept { return std::holds_alternative<TreeEnsemble>(params_); }
    const TreeEnsemble& trees() const { return std::get<TreeEnsemble>(params_); }
    const LinearModel& linear() const { return std::get<LinearModel>(params_); }
    std::uint64_t seed() const noexcept { return seed_; }

    int predict(std::span<const double> x) const;

private:
    ModelFamily family_;
    std::variant<TreeEnsemble, LinearModel> params_;
    std::uint64_t seed_;
};

/// Anything with `int predict(std::span<const double>) const`.
template <typename M>
concept Classifier = requires(const M& m, std::span<const double> x) {
    { m.predict(x) } -> std::convertible_to<int>;
};

template <Classifier M>
double accuracy(const M& model, const LabeledWindowDataset& d) {
    if (d.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.size(); ++i) hits += model.predict(d.X.row(i)) == d.y[i];
    return static_cast<double>(hits) / static_cast<double>(d.size());
}

enum class TreeEnsembleKind { rf, et };

struct EnsembleParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 8;
};

/// rf: bootstrap rows, best split among sqrt(F) candidates.
/// et: all rows, one random threshold per candidate, best candidate wins.
/// Prediction is a majority vote, ties to class 0.
FittedModel fit_tree_ensemble(const LabeledWindowDataset& d, TreeEnsembleKind kind, std::size_t n_trees,
                              std::size_t max_depth, std::uint64_t seed);

/// Mean over trees of the summed weighted Gini decrease per feature, normalized.
ImportanceVector impurity_importance(const FittedModel& model);

/// Mean accuracy drop over `repeats` shuffles of each column, clipped at 0.
/// Each feature's shuffles are seeded from (seed, feature id).
template <Classifier M>
std::vector<double> permutation_drops(const M& model, const LabeledWindowDataset& holdout, std::size_t repeats,
                                      std::uint64_t seed) {
    if (repeats == 0) throw std::invalid_argument("permutation_importance: repeats must be >= 1");
    if (holdout.size() == 0) throw std::invalid_argument("permutation_importance: empty holdout");
    const double baseline = accuracy(model, holdout);
    std::vector<double> drops(holdout.features(), 0.0);
    std::vector<double> row(holdout.features());
    std::vector<std::size_t> perm(holdout.size());
    for (std::size_t f = 0; f < holdout.features(); ++f) {
        const auto key = f < holdout.feature_ids.size() ? stable_hash(holdout.feature_ids[f]) : f;
        Rng rng(derive_seed(seed, key));
        double total = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            for (std::size_t i = perm.size(); i > 1; --i) {
                std::uniform_int_distribution<std::size_t> pick(0, i - 1);
                std::swap(perm[i - 1], perm[pick(rng)]);
            }
            std::size_t hits = 0;
            for (std::size_t i = 0; i < holdout.size(); ++i) {
                auto src = holdout.X.row(i);
                std::copy(src.begin(), src.end(), row.begin());
                row[f] = holdout.X(perm[i], f);
                hits += model.predict(row) == holdout.y[i];
            }
            total += baseline - static_cast<double>(hits) / static_cast<double>(holdout.size());
        }
        drops[f] = std::max(0.0, total / static_cast<double>(repeats));
    }
    return drops;
}

/// permutation_drops normalized to unit sum.
template <Classifier M>
ImportanceVector permutation_importance(const M& model, const LabeledWindowDataset& holdout,
                                        std::size_t repeats, std::uint64_t seed) {
    return ImportanceVector(permutation_drops(model, holdout, repeats, seed), true);
}

/// l2-regularized logistic loss on standardized features:
///   f(w, b) = mean_i log(1 + exp(-s_i (w.z_i + b))) + lambda/2 ||w||^2,  s_i = 2 y_i - 1.
/// theta = (w..., b).
struct LogisticObjective {
    const Matrix& Z;
    std::span<const int> y;
    double lambda;

    double value(std::span<const double> theta) const;
    std::vector<double> gradient(std::span<const double> theta) const;
};

struct LogRegParams {
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0, 100.0};
    std::size_t folds = 5;
    std::size_t epochs = 200;
};

/// Single fit at inverse strength C (lambda = 1 / (C n)), full-batch gradient
/// descent with Armijo backtracking. `loss_history` records f per epoch.
FittedModel fit_logreg(const LabeledWindowDataset& d, double c, std::size_t epochs, std::uint64_t seed);

/// Picks C from `c_grid` by stratified k-fold accuracy (ties go to the
/// smaller C), then refits on all of `d`.
FittedModel fit_logreg_cv(const LabeledWindowDataset& d, const std::vector<double>& c_grid, std::size_t folds,
                          std::size_t epochs, std::uint64_t seed);

/// Primal linear SVM objective with the bias folded into the weights:
///   lambda/2 (||w||^2 + b^2) + mean_i max(0, 1 - s_i (w.z_i + b)),  lambda = 1 / (C n).
double svm_objective(const Matrix& Z, std::span<const int> y, std::span<const double> weights, double bias,
                     double lambda);

/// Averaged stochastic subgradient descent (Pegasos step size, deterministic
/// per-epoch shuffles); the iterate average over the second half is returned.
FittedModel fit_linear_svm(const LabeledWindowDataset& d, double c, std::size_t epochs, std::uint64_t seed);

/// |w| per feature in standardized space, normalized.
ImportanceVector linear_importance(const FittedModel& model);

/// Standardization used by the linear learners (population std; 0 for constant columns).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;
    static Standardizer fit(const Matrix& X);
    Matrix transform(const Matrix& X) const;
};

nlohmann::json to_json(const FittedModel& model);

}  // namespace driftloc
