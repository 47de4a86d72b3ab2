#include "driftloc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace driftloc {

void validate(const LabeledWindowDataset& d) {
    if (d.size() == 0) throw std::invalid_argument("dataset is empty");
    if (d.X.rows() != d.y.size()) throw std::invalid_argument("dataset: label count does not match rows");
    if (!d.feature_ids.empty() && d.feature_ids.size() != d.X.cols())
        throw std::invalid_argument("dataset: feature ids do not match columns");
    bool has0 = false, has1 = false;
    for (int label : d.y) {
        if (label != 0 && label != 1) throw std::invalid_argument("dataset: labels must be 0 or 1");
        (label ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw std::invalid_argument("dataset: both classes must be present");
    for (double x : d.X.data())
        if (!std::isfinite(x)) throw std::invalid_argument("dataset: non-finite feature value");
}

LabeledWindowDataset subset(const LabeledWindowDataset& d, std::span<const std::size_t> rows) {
    LabeledWindowDataset out{d.X.select_rows(rows), {}, d.feature_ids};
    out.y.reserve(rows.size());
    for (auto r : rows) out.y.push_back(d.y.at(r));
    return out;
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_classes(std::span<const int> y, Rng& rng) {
    std::vector<std::vector<std::size_t>> classes(2);
    for (std::size_t i = 0; i < y.size(); ++i) classes.at(static_cast<std::size_t>(y[i])).push_back(i);
    for (auto& c : classes)
        for (std::size_t i = c.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(c[i - 1], c[pick(rng)]);
        }
    return classes;
}

}  // namespace

TrainHoldoutSplit stratified_split(std::span<const int> y, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw std::invalid_argument("stratified_split: holdout fraction must lie in (0, 1)");
    Rng rng(seed);
    TrainHoldoutSplit split;
    for (const auto& members : shuffled_classes(y, rng)) {
        auto k = static_cast<std::size_t>(std::lround(holdout_fraction * static_cast<double>(members.size())));
        if (members.size() >= 2) k = std::clamp<std::size_t>(k, 1, members.size() - 1);
        else k = 0;
        split.holdout.insert(split.holdout.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.holdout.begin(), split.holdout.end());
    return split;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    for (const auto& members : shuffled_classes(y, rng))
        for (std::size_t i = 0; i < members.size(); ++i) folds[i % k].push_back(members[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

ImportanceVector::ImportanceVector(std::vector<double> scores, bool normalize)
    : scores_(std::move(scores)), normalized_(normalize) {
    for (double s : scores_)
        if (!(s >= 0.0)) throw std::invalid_argument("importance scores must be nonnegative");
    if (normalize) {
        const double total = std::accumulate(scores_.begin(), scores_.end(), 0.0);
        if (total > 0.0)
            for (auto& s : scores_) s /= total;
    }
}

ImportanceVector ImportanceVector::restore(std::vector<double> scores, bool normalized) {
    ImportanceVector v(std::move(scores), false);
    v.normalized_ = normalized;
    return v;
}

std::string_view to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::random_forest: return "rf";
        case ModelFamily::extra_trees: return "et";
        case ModelFamily::logistic_regression: return "logreg";
        case ModelFamily::linear_svm: return "svm";
    }
    return "unknown";
}

int FittedModel::predict(std::span<const double> x) const {
    if (const auto* ens = std::get_if<TreeEnsemble>(&params_)) {
        std::size_t ones = 0;
        for (const auto& t : ens->trees) ones += static_cast<std::size_t>(t.predict(x));
        return 2 * ones > ens->trees.size() ? 1 : 0;
    }
    const auto& lin = std::get<LinearModel>(params_);
    double margin = lin.intercept;
    for (std::size_t f = 0; f < lin.weights.size(); ++f)
        if (lin.scale[f] > 0.0) margin += lin.weights[f] * (x[f] - lin.mean[f]) / lin.scale[f];
    return margin > 0.0 ? 1 : 0;
}

ImportanceVector linear_importance(const FittedModel& model) {
    if (model.is_tree())
        throw std::invalid_argument("weight importance requires a linear model, got " +
                                    std::string(to_string(model.family())));
    std::vector<double> scores;
    for (double w : model.linear().weights) scores.push_back(std::abs(w));
    return ImportanceVector(std::move(scores), true);
}

namespace {

nlohmann::json tree_to_json(const DecisionTree& tree, std::size_t i) {
    const auto& n = tree.nodes[i];
    if (n.is_leaf()) return {{"leaf", n.label}, {"samples", n.samples}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"samples", n.samples},
            {"impurity_decrease", n.weighted_impurity_decrease},
            {"left", tree_to_json(tree, static_cast<std::size_t>(n.left))},
            {"right", tree_to_json(tree, static_cast<std::size_t>(n.right))}};
}

}  // namespace

nlohmann::json to_json(const FittedModel& model) {
    nlohmann::json j{{"family", to_string(model.family())}, {"seed", model.seed()}};
    if (model.is_tree()) {
        auto trees = nlohmann::json::array();
        for (const auto& t : model.trees().trees) trees.push_back(tree_to_json(t, 0));
        j["n_features"] = model.trees().n_features;
        j["trees"] = std::move(trees);
    } else {
        const auto& lin = model.linear();
        j["weights"] = lin.weights;
        j["intercept"] = lin.intercept;
        j["mean"] = lin.mean;
        j["scale"] = lin.scale;
        j["C"] = lin.c;
        auto cv = nlohmann::json::array();
        for (auto [c, acc] : lin.cv_accuracy) cv.push_back({{"C", c}, {"accuracy", acc}});
        j["cv"] = std::move(cv);
    }
    return j;
}

}  // namespace driftloc
