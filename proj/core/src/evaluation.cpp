#include "driftloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace driftloc {

Type1Metrics eval_type1(const LocalizationResult& r, const AnomalyScenario& scenario, const NetworkGraph& g) {
    if (scenario.kind != AnomalyKind::type_i) throw std::invalid_argument("eval_type1: expected a type-I scenario");
    const auto v = g.index_of(scenario.node);
    const auto selected = g.index_of(r.selected);
    const auto hops = hops_from(g, v);
    const auto sensors = g.sensor_indices();

    Type1Metrics m;
    m.distance_topo = hops[selected];
    m.distance_geo = geographic_distance(g, selected, v);

    Hops closest = Hops::infinite();
    for (auto s : sensors) {
        if (hops[s] < m.distance_topo) ++m.n_closer;
        closest = std::min(closest, hops[s]);
    }
    if (!g.is_sensor(v) && closest.is_finite())
        m.rel_dist = m.distance_topo.as_double() / closest.as_double();

    // 3 closest sensors by (hops, id); sensor indices are id-sorted already.
    std::vector<std::size_t> by_distance(sensors.begin(), sensors.end());
    std::stable_sort(by_distance.begin(), by_distance.end(),
                     [&](std::size_t a, std::size_t b) { return hops[a] < hops[b]; });
    const auto k = std::min<std::size_t>(3, by_distance.size());
    for (std::size_t i = 0; i < std::min(k, r.ranking.size()); ++i) {
        const auto ranked = g.index_of(r.ranking[i]);
        if (std::find(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k), ranked) !=
            by_distance.begin() + static_cast<std::ptrdiff_t>(k))
            ++m.best3;
    }
    return m;
}

Type2Metrics eval_type2(const std::vector<std::pair<LocalizationResult, AnomalyScenario>>& results) {
    Type2Metrics m;
    for (const auto& [r, s] : results) {
        if (s.kind != AnomalyKind::type_ii) throw std::invalid_argument("eval_type2: expected type-II scenarios");
        ++m.scenarios;
        ++m.predictions;
        if (r.selected == s.node) ++m.hits;
    }
    // Each scenario has exactly one faulty sensor and one prediction, so the
    // micro-averaged confusion counts are tp = hits, fp = fn = misses.
    if (m.predictions) m.precision = static_cast<double>(m.hits) / static_cast<double>(m.predictions);
    if (m.scenarios) m.recall = static_cast<double>(m.hits) / static_cast<double>(m.scenarios);
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    SummaryStats s;
    s.count = sorted.size();
    const auto mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    // Summing in sorted order keeps the result independent of input order.
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count));
    return s;
}

const AggregateRow& AggregateReport::at(const std::string& method, const std::string& metric) const {
    for (const auto& row : rows)
        if (row.method == method && row.metric == metric) return row;
    throw std::out_of_range("no aggregate row for " + method + "/" + metric);
}

void AggregateReport::write_csv(std::ostream& os) const {
    os << "method,metric,median,mean,std\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g", row.stats.median, row.stats.mean, row.stats.std);
        os << row.method << ',' << row.metric << ',' << buf << '\n';
    }
}

AggregateReport aggregate(const std::vector<Type1Metrics>& metrics, const std::vector<std::string>& method_ids) {
    if (metrics.empty()) throw std::invalid_argument("aggregate: no metrics");
    if (metrics.size() != method_ids.size()) throw std::invalid_argument("aggregate: one method id per metric");
    std::vector<std::string> methods;
    for (const auto& id : method_ids)
        if (std::find(methods.begin(), methods.end(), id) == methods.end()) methods.push_back(id);

    AggregateReport report;
    report.runs = metrics.size() / methods.size();
    for (const auto& method : methods) {
        std::map<std::string, std::vector<double>> columns;
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            if (method_ids[i] != method) continue;
            const auto& m = metrics[i];
            columns["distance_topo"].push_back(m.distance_topo.as_double());
            columns["distance_geo"].push_back(m.distance_geo);
            columns["n_closer"].push_back(static_cast<double>(m.n_closer));
            if (m.rel_dist) columns["rel_dist"].push_back(*m.rel_dist);
            columns["best3"].push_back(static_cast<double>(m.best3));
        }
        for (const auto& name : type1_metric_names()) {
            auto it = columns.find(name);
            if (it == columns.end() || it->second.empty()) continue;
            report.rows.push_back({method, name, summarize(it->second)});
        }
    }
    return report;
}

double random_baseline_distance(const NetworkGraph& g, std::size_t node) {
    const auto hops = hops_from(g, node);
    const auto sensors = g.sensor_indices();
    if (sensors.empty()) throw std::invalid_argument("random_baseline_distance: graph has no sensors");
    double total = 0.0;
    for (auto s : sensors) total += hops[s].as_double();
    return total / static_cast<double>(sensors.size());
}

std::vector<ErrorMapEntry> error_map(const std::map<NodeId, std::vector<double>>& distances_by_node,
                                     const NetworkGraph& g, const std::map<NodeId, double>& random_baseline_mean) {
    std::vector<ErrorMapEntry> out;
    for (const auto& [node, distances] : distances_by_node) {
        if (distances.empty()) continue;
        const auto v = g.index_of(node);
        auto baseline = random_baseline_mean.find(node);
        if (baseline == random_baseline_mean.end())
            throw std::invalid_argument("error_map: no random baseline for node '" + node + "'");
        const auto hops = hops_from(g, v);
        Hops closest = Hops::infinite();
        for (auto s : g.sensor_indices()) closest = std::min(closest, hops[s]);

        const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) /
                            static_cast<double>(distances.size());
        const double best = closest.as_double();
        const double span = baseline->second - best;
        double score = 0.0;
        if (std::isfinite(span) && span > 0.0) score = std::clamp((mean - best) / span, 0.0, 1.0);
        out.push_back({node, g.position(v), score});
    }
    return out;
}

nlohmann::json to_json(const std::vector<ErrorMapEntry>& map) {
    auto arr = nlohmann::json::array();
    for (const auto& e : map)
        arr.push_back({{"node", e.node}, {"x", e.position.x}, {"y", e.position.y}, {"score", e.score}});
    return arr;
}

WilcoxonResult wilcoxon_less(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("wilcoxon: samples must be paired");
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) d.push_back(x[i] - y[i]);
    WilcoxonResult res;
    res.n = d.size();
    if (d.empty()) return res;

    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(d[a]) < std::abs(d[b]); });
    std::vector<double> rank(d.size());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0) res.statistic += rank[i];

    const double n = static_cast<double>(d.size());
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    res.z = var > 0.0 ? (res.statistic - mean) / std::sqrt(var) : 0.0;
    res.p_value = 0.5 * std::erfc(-res.z / std::sqrt(2.0));
    return res;
}

}  // namespace driftloc
