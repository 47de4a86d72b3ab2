#include "driftloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace driftloc {

bool LocalizationResult::operator==(const LocalizationResult& o) const {
    return method == o.method && sensors == o.sensors && scores.scores() == o.scores.scores() &&
           scores.normalized() == o.scores.normalized() && ranking == o.ranking && selected == o.selected &&
           model_accuracy == o.model_accuracy;
}

LocalizationResult make_result(std::string method, std::vector<NodeId> sensors, ImportanceVector scores,
                               std::optional<double> model_accuracy) {
    if (sensors.empty()) throw std::invalid_argument("localization needs at least one sensor");
    if (scores.size() != sensors.size()) throw std::invalid_argument("one score per sensor required");
    std::vector<std::size_t> order(sensors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return sensors[a] < sensors[b];
    });
    LocalizationResult r;
    r.method = std::move(method);
    for (auto i : order) r.ranking.push_back(sensors[i]);
    r.selected = r.ranking.front();
    r.sensors = std::move(sensors);
    r.scores = std::move(scores);
    r.model_accuracy = model_accuracy;
    return r;
}

namespace {

void check_window(const MeasurementWindow& mw) {
    if (mw.half_window == 0) throw std::invalid_argument("window half-size must be >= 1");
    if (mw.values.rows() < 2 * mw.half_window)
        throw std::invalid_argument("window has " + std::to_string(mw.values.rows()) + " rows, needs 2w = " +
                                    std::to_string(2 * mw.half_window));
    if (mw.values.cols() != mw.sensors.size()) throw std::invalid_argument("window columns do not match sensor ids");
}

}  // namespace

LocalizationResult localize_mean(const MeasurementWindow& mw) {
    check_window(mw);
    const auto w = mw.half_window;
    std::vector<double> scores(mw.sensors.size());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < w; ++i) before += mw.values(i, j);
        for (std::size_t i = w; i < 2 * w; ++i) after += mw.values(i, j);
        scores[j] = std::abs(before - after);
    }
    return make_result("mean", mw.sensors, ImportanceVector(std::move(scores), false));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() || j < b.size()) {
        // Next distinct value; both CDFs jump past all copies of it.
        double x;
        if (i == a.size()) x = b[j];
        else if (j == b.size()) x = a[i];
        else x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

LocalizationResult localize_ks(const MeasurementWindow& mw) {
    check_window(mw);
    const auto w = mw.half_window;
    std::vector<double> scores(mw.sensors.size());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        std::vector<double> before(w), after(w);
        for (std::size_t i = 0; i < w; ++i) {
            before[i] = mw.values(i, j);
            after[i] = mw.values(w + i, j);
        }
        scores[j] = ks_statistic(std::move(before), std::move(after));
    }
    return make_result("ks", mw.sensors, ImportanceVector(std::move(scores), false));
}

LocalizationResult localize_random(const std::vector<NodeId>& sensors, std::uint64_t seed) {
    if (sensors.empty()) throw std::invalid_argument("localize_random: empty sensor list");
    Rng rng(seed);
    const auto pick = std::uniform_int_distribution<std::size_t>(0, sensors.size() - 1)(rng);
    std::vector<double> scores(sensors.size(), 0.0);
    scores[pick] = 1.0;
    return make_result("random", sensors, ImportanceVector(std::move(scores), true));
}

std::string method_id(const LearnerSpec& spec) {
    switch (spec.family) {
        case ModelFamily::random_forest:
        case ModelFamily::extra_trees:
            return std::string(spec.importance == ImportanceKind::permutation ? "pfi_" : "fi_") +
                   std::string(to_string(spec.family));
        case ModelFamily::logistic_regression:
        case ModelFamily::linear_svm:
            return std::string(to_string(spec.family)) + (spec.importance == ImportanceKind::permutation ? "_pfi" : "");
    }
    return "unknown";
}

LabeledWindowDataset window_dataset(const MeasurementWindow& mw) {
    check_window(mw);
    const auto w = mw.half_window;
    LabeledWindowDataset d{mw.values.slice_rows(0, 2 * w), std::vector<int>(2 * w, 0), mw.sensors};
    std::fill(d.y.begin() + static_cast<std::ptrdiff_t>(w), d.y.end(), 1);
    return d;
}

DriftExplainer make_explainer(const LearnerSpec& spec) {
    const bool tree = spec.family == ModelFamily::random_forest || spec.family == ModelFamily::extra_trees;
    if (tree && spec.importance == ImportanceKind::weights)
        throw std::invalid_argument("weight importance is undefined for tree ensembles");
    if (!tree && spec.importance == ImportanceKind::impurity)
        throw std::invalid_argument("impurity importance (FI) is undefined for linear models");

    return [spec](const LabeledWindowDataset& train, const LabeledWindowDataset& holdout,
                        std::uint64_t seed) -> Explanation {
        const auto fit_seed = derive_seed(seed, 1);
        auto model = [&] {
            switch (spec.family) {
                case ModelFamily::random_forest:
                    return fit_tree_ensemble(train, TreeEnsembleKind::rf, spec.n_trees, spec.max_depth, fit_seed);
                case ModelFamily::extra_trees:
                    return fit_tree_ensemble(train, TreeEnsembleKind::et, spec.n_trees, spec.max_depth, fit_seed);
                case ModelFamily::logistic_regression:
                    return fit_logreg_cv(train, spec.c_grid, spec.folds, spec.epochs, fit_seed);
                case ModelFamily::linear_svm:
                    return fit_linear_svm(train, spec.svm_c, spec.epochs, fit_seed);
            }
            throw std::logic_error("unhandled model family");
        }();
        Explanation out;
        out.accuracy = holdout.size() ? std::optional<double>(accuracy(model, holdout)) : std::nullopt;
        switch (spec.importance) {
            case ImportanceKind::impurity: out.importance = impurity_importance(model); break;
            case ImportanceKind::permutation:
                out.importance = permutation_importance(model, holdout, spec.pfi_repeats, derive_seed(seed, 2));
                break;
            case ImportanceKind::weights: out.importance = linear_importance(model); break;
        }
        return out;
    };
}

LocalizationResult localize_model_based(const MeasurementWindow& mw, const DriftExplainer& explainer,
                                        std::string method, std::uint64_t seed, double holdout_fraction) {
    auto data = window_dataset(mw);
    const auto split = stratified_split(data.y, holdout_fraction, derive_seed(seed, 0));
    auto explanation = explainer(subset(data, split.train), subset(data, split.holdout), seed);
    if (explanation.importance.size() != mw.sensors.size())
        throw std::runtime_error("explainer returned " + std::to_string(explanation.importance.size()) +
                                 " scores for " + std::to_string(mw.sensors.size()) + " sensors");
    return make_result(std::move(method), mw.sensors, std::move(explanation.importance), explanation.accuracy);
}

LocalizationResult localize_model_based(const MeasurementWindow& mw, const LearnerSpec& spec, std::uint64_t seed) {
    return localize_model_based(mw, make_explainer(spec), method_id(spec), seed, spec.holdout_fraction);
}

nlohmann::json to_json(const LocalizationResult& r) {
    nlohmann::json j{{"method", r.method},
                     {"sensors", r.sensors},
                     {"scores", r.scores.scores()},
                     {"normalized", r.scores.normalized()},
                     {"ranking", r.ranking},
                     {"selected", r.selected}};
    j["model_accuracy"] = r.model_accuracy ? nlohmann::json(*r.model_accuracy) : nlohmann::json(nullptr);
    return j;
}

LocalizationResult localization_from_json(const nlohmann::json& j) {
    std::optional<double> acc;
    if (j.contains("model_accuracy") && !j.at("model_accuracy").is_null()) acc = j.at("model_accuracy").get<double>();
    return make_result(j.at("method").get<std::string>(), j.at("sensors").get<std::vector<NodeId>>(),
                       ImportanceVector::restore(j.at("scores").get<std::vector<double>>(), j.value("normalized", false)),
                       acc);
}

}  // namespace driftloc
