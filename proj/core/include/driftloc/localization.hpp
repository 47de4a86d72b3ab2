#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "driftloc/dynamics.hpp"
#include "driftloc/learners.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

struct LocalizationResult {
    std::string method;
    std::vector<NodeId> sensors;       // score order
    ImportanceVector scores;
    std::vector<NodeId> ranking;       // descending score, ties by smaller sensor id
    NodeId selected;                   // ranking.front()
    std::optional<double> model_accuracy;

    bool operator==(const LocalizationResult& other) const;
};

/// Ranks sensors by score and fills ranking/selected.
LocalizationResult make_result(std::string method, std::vector<NodeId> sensors, ImportanceVector scores,
                               std::optional<double> model_accuracy = std::nullopt);

/// |sum of the w pre-onset values - sum of the w post-onset values| per sensor.
LocalizationResult localize_mean(const MeasurementWindow& mw);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Per-sensor KS statistic between the pre- and post-onset halves.
LocalizationResult localize_ks(const MeasurementWindow& mw);

LocalizationResult localize_random(const std::vector<NodeId>& sensors, std::uint64_t seed);

enum class ImportanceKind { impurity, permutation, weights };

struct LearnerSpec {
    ModelFamily family = ModelFamily::random_forest;
    ImportanceKind importance = ImportanceKind::impurity;
    std::size_t n_trees = 100;
    std::size_t max_depth = 8;
    std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0, 100.0};
    std::size_t folds = 5;
    std::size_t epochs = 200;
    double svm_c = 1.0;
    std::size_t pfi_repeats = 10;
    double holdout_fraction = 0.3;
};

/// Method id such as "fi_rf", "pfi_et", "logreg", "svm".
std::string method_id(const LearnerSpec& spec);

/// Output of a drift explainer: importance over the window's sensors plus
/// optional holdout accuracy.
struct Explanation {
    ImportanceVector importance;
    std::optional<double> accuracy;
};

using DriftExplainer = std::function<Explanation(const LabeledWindowDataset& train,
                                                 const LabeledWindowDataset& holdout, std::uint64_t seed)>;

/// Pre-onset rows labeled 0, post-onset rows 1.
LabeledWindowDataset window_dataset(const MeasurementWindow& mw);

/// Explainer for a learner family + importance kind. Throws for combinations
/// that do not exist (impurity on linear models, weights on trees).
DriftExplainer make_explainer(const LearnerSpec& spec);

/// Splits the labeled window into stratified train/holdout, runs `explainer`
/// and ranks sensors by the returned importance.
LocalizationResult localize_model_based(const MeasurementWindow& mw, const DriftExplainer& explainer,
                                        std::string method, std::uint64_t seed,
                                        double holdout_fraction = 0.3);
LocalizationResult localize_model_based(const MeasurementWindow& mw, const LearnerSpec& spec,
                                        std::uint64_t seed);

nlohmann::json to_json(const LocalizationResult& r);
LocalizationResult localization_from_json(const nlohmann::json& j);

}  // namespace driftloc
