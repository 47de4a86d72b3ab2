#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "driftloc/anomaly.hpp"
#include "driftloc/localization.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

struct Type1Metrics {
    Hops distance_topo;
    double distance_geo = 0.0;
    std::size_t n_closer = 0;
    /// Absent when the anomaly node is itself a sensor.
    std::optional<double> rel_dist;
    std::size_t best3 = 0;
};

struct Type2Metrics {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::size_t hits = 0;
    std::size_t scenarios = 0;
    std::size_t predictions = 0;
};

Type1Metrics eval_type1(const LocalizationResult& r, const AnomalyScenario& scenario, const NetworkGraph& g);

/// Micro-averaged over all scenarios; a scenario is a hit iff the selected
/// sensor is the faulty one.
Type2Metrics eval_type2(const std::vector<std::pair<LocalizationResult, AnomalyScenario>>& results);

struct SummaryStats {
    double median = 0.0;
    double mean = 0.0;
    double std = 0.0;  // population
    std::size_t count = 0;
};

/// Median, mean and population std. Throws on empty input.
SummaryStats summarize(std::span<const double> values);

struct AggregateRow {
    std::string method;
    std::string metric;
    SummaryStats stats;
};

struct AggregateReport {
    std::vector<AggregateRow> rows;
    std::size_t runs = 0;

    const AggregateRow& at(const std::string& method, const std::string& metric) const;
    /// CSV header `method,metric,median,mean,std`.
    void write_csv(std::ostream& os) const;
};

inline const std::vector<std::string>& type1_metric_names() {
    static const std::vector<std::string> names{"distance_topo", "distance_geo", "n_closer", "rel_dist", "best3"};
    return names;
}

/// `metrics[i]` was produced by `method_ids[i]`. rel_dist is aggregated over
/// defined cases only; methods appear in first-seen order.
AggregateReport aggregate(const std::vector<Type1Metrics>& metrics, const std::vector<std::string>& method_ids);

/// Expected topological distance of a uniformly random sensor pick.
double random_baseline_distance(const NetworkGraph& g, std::size_t node);

struct ErrorMapEntry {
    NodeId node;
    Point position;
    double score = 0.0;
};

/// Per anomaly node: (mean distance - closest sensor distance) /
/// (random mean - closest sensor distance), clamped to [0, 1]; 0 when the
/// denominator vanishes.
std::vector<ErrorMapEntry> error_map(const std::map<NodeId, std::vector<double>>& distances_by_node,
                                     const NetworkGraph& g, const std::map<NodeId, double>& random_baseline_mean);

nlohmann::json to_json(const std::vector<ErrorMapEntry>& map);

struct WilcoxonResult {
    double statistic = 0.0;  // sum of ranks of positive differences
    double z = 0.0;
    double p_value = 1.0;    // one-sided, H1: x tends to be smaller than y
    std::size_t n = 0;       // non-zero differences
};

/// Paired Wilcoxon signed-rank test of x - y (zero differences dropped,
/// average ranks for ties, tie-corrected normal approximation).
WilcoxonResult wilcoxon_less(std::span<const double> x, std::span<const double> y);

}  // namespace driftloc
