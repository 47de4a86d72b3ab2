#include "driftloc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "driftloc/io.hpp"
#include "driftloc/rng.hpp"

namespace driftloc {

namespace {

const std::vector<std::string> kMethods{"random", "mean",   "ks",  "fi_rf",      "pfi_rf",
                                        "fi_et",  "pfi_et", "logreg", "svm", "logreg_pfi", "svm_pfi"};

}  // namespace

std::vector<std::string> registered_methods() { return kMethods; }

MethodSpec make_method(const std::string& id, const LearnerSpec& learners) {
    if (id == "random" || id == "mean" || id == "ks") return {id, std::nullopt};
    LearnerSpec spec = learners;
    if (id == "fi_rf" || id == "pfi_rf") spec.family = ModelFamily::random_forest;
    else if (id == "fi_et" || id == "pfi_et") spec.family = ModelFamily::extra_trees;
    else if (id == "logreg" || id == "logreg_pfi") spec.family = ModelFamily::logistic_regression;
    else if (id == "svm" || id == "svm_pfi") spec.family = ModelFamily::linear_svm;
    else throw std::invalid_argument("unknown method '" + id + "'");

    if (id.starts_with("fi_")) spec.importance = ImportanceKind::impurity;
    else if (id.starts_with("pfi_") || id.ends_with("_pfi")) spec.importance = ImportanceKind::permutation;
    else spec.importance = ImportanceKind::weights;
    return {id, spec};
}

std::uint64_t method_seed(std::uint64_t seed, const std::string& method_id) {
    return derive_seed(seed, stable_hash(method_id));
}

LocalizationResult run_method(const MethodSpec& method, const MeasurementWindow& mw, std::uint64_t seed) {
    if (method.learner) return localize_model_based(mw, *method.learner, seed);
    if (method.id == "mean") return localize_mean(mw);
    if (method.id == "ks") return localize_ks(mw);
    if (method.id == "random") return localize_random(mw.sensors, seed);
    throw std::invalid_argument("unknown method '" + method.id + "'");
}

DemandModel DemandConfig::model(std::size_t nodes) const {
    return DemandModel::uniform(nodes, base, sinusoidal_profile(period, amplitude), persistence, volatility, noise);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object() && !j.is_null()) fail("expected a table");
    }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    [[noreturn]] void fail(const std::string& what, const std::string& key = {}) const {
        throw std::invalid_argument(path_ + (key.empty() ? "" : "." + key) + ": " + what);
    }

    const nlohmann::json& raw(const std::string& key) {
        used_.insert(key);
        return j_->at(key);
    }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number()) fail("expected a number", key);
        return v.get<double>();
    }

    std::size_t count(const std::string& key, std::size_t def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail("expected a nonnegative integer", key);
        return v.get<std::size_t>();
    }

    std::string text(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_string()) fail("expected a string", key);
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_array()) fail("expected an array of numbers", key);
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail("expected an array of numbers", key);
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        if (!has(key)) return {};
        const auto& v = raw(key);
        if (!v.is_array()) fail("expected an array of strings", key);
        std::vector<std::string> out;
        for (const auto& x : v) {
            if (!x.is_string()) fail("expected an array of strings", key);
            out.push_back(x.get<std::string>());
        }
        return out;
    }

    Section sub(const std::string& key) {
        static const nlohmann::json empty = nlohmann::json::object();
        if (!has(key)) return Section(empty, path_ + "." + key);
        return Section(raw(key), path_ + "." + key);
    }

    const std::string& path() const { return path_; }

    void finish() const {
        if (!j_->is_object()) return;
        for (const auto& [key, value] : j_->items())
            if (!used_.contains(key)) fail("unknown key", key);
    }

private:
    const nlohmann::json* j_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<double> magnitudes(Section& s, const std::string& key, double mean_demand) {
    if (!s.has(key)) return {};
    const auto& v = s.raw(key);
    if (!v.is_array()) s.fail("expected an array of magnitudes", key);
    std::vector<double> out;
    for (const auto& x : v) {
        if (x.is_number()) out.push_back(x.get<double>());
        else if (x == "small") out.push_back(0.5 * mean_demand);
        else if (x == "medium") out.push_back(2.0 * mean_demand);
        else s.fail("magnitudes are numbers or \"small\" / \"medium\"", key);
        if (!(out.back() >= 0.0) || !std::isfinite(out.back())) s.fail("magnitudes must be finite and >= 0", key);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    Section root(j, "config");
    if (!j.is_object()) root.fail("expected a table");
    ExperimentConfig cfg;

    if (!root.has("seed")) root.fail("missing mandatory key", "seed");
    {
        const auto& s = root.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            root.fail("expected a nonnegative integer", "seed");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.output = root.text("output", "out");

    auto graph = root.sub("graph");
    if (graph.has("file")) cfg.graph.file = graph.text("file", "");
    cfg.graph.nodes = graph.count("nodes", cfg.graph.nodes);
    cfg.graph.radius = graph.number("radius", cfg.graph.radius);
    cfg.graph.sensors = graph.count("sensors", cfg.graph.sensors);
    if (!(cfg.graph.radius > 0.0)) graph.fail("must be positive", "radius");
    graph.finish();

    auto dyn = root.sub("dynamics");
    const auto mode = dyn.text("mode", "realistic");
    if (mode == "theorem") cfg.dynamics.mode = DynamicsMode::theorem;
    else if (mode == "realistic") cfg.dynamics.mode = DynamicsMode::realistic;
    else dyn.fail("expected \"theorem\" or \"realistic\"", "mode");
    if (dyn.has("c")) cfg.dynamics.contraction = dyn.number("c", 0.0);
    cfg.dynamics.demand_gain = dyn.number("k", cfg.dynamics.demand_gain);
    cfg.dynamics.demand_exponent = dyn.number("alpha", cfg.dynamics.demand_exponent);
    cfg.dynamics.base_level = dyn.number("b", cfg.dynamics.base_level);
    cfg.dynamics.process_noise = dyn.number("process_noise", cfg.dynamics.process_noise);
    cfg.sigma1 = dyn.number("sigma1", cfg.sigma1);
    cfg.sigma0 = dyn.number("sigma0", cfg.sigma0);
    cfg.burn_in = dyn.count("burn_in", cfg.burn_in);
    if (cfg.sigma1 < 0.0) dyn.fail("must be >= 0", "sigma1");
    if (cfg.sigma0 < 0.0) dyn.fail("must be >= 0", "sigma0");
    dyn.finish();

    auto dem = root.sub("demand");
    cfg.demand.base = dem.number("base", cfg.demand.base);
    cfg.demand.period = dem.count("period", cfg.demand.period);
    cfg.demand.amplitude = dem.number("amplitude", cfg.demand.amplitude);
    cfg.demand.persistence = dem.number("persistence", cfg.demand.persistence);
    cfg.demand.volatility = dem.number("volatility", cfg.demand.volatility);
    cfg.demand.noise = dem.number("noise", cfg.demand.noise);
    if (cfg.demand.period == 0) dem.fail("must be >= 1", "period");
    if (!(cfg.demand.persistence >= 0.0 && cfg.demand.persistence < 1.0)) dem.fail("must lie in [0, 1)", "persistence");
    dem.finish();

    auto& batch = cfg.scenarios.batch;
    batch.half_window = root.count("window", batch.half_window);
    if (batch.half_window == 0) root.fail("must be >= 1", "window");
    auto sc = root.sub("scenarios");
    batch.windows = sc.count("windows", batch.windows);
    batch.window_length = sc.count("window_length", batch.window_length);
    batch.window_offset = sc.count("window_offset", batch.window_offset);
    batch.onsets_per_window = sc.count("onsets_per_window", batch.onsets_per_window);
    batch.ramp = sc.count("ramp", batch.ramp);
    if (sc.has("nodes_per_onset")) batch.nodes_per_onset = sc.count("nodes_per_onset", 1);
    batch.targets = sc.strings("targets");
    if (sc.has("profiles")) {
        batch.profiles.clear();
        for (const auto& p : sc.strings("profiles")) {
            try {
                batch.profiles.push_back(parse_fault_profile(p));
            } catch (const std::exception& e) {
                sc.fail(e.what(), "profiles");
            }
        }
    }
    const double mean_demand = cfg.demand.base;  // the sinusoidal profile averages to 1
    cfg.scenarios.type1_magnitudes = magnitudes(sc, "type1", mean_demand);
    cfg.scenarios.type2_magnitudes = magnitudes(sc, "type2", mean_demand);
    sc.finish();

    auto ls = root.sub("learners");
    LearnerSpec learners;
    learners.n_trees = ls.count("n_trees", learners.n_trees);
    learners.max_depth = ls.count("max_depth", learners.max_depth);
    learners.c_grid = ls.numbers("c_grid", learners.c_grid);
    learners.folds = ls.count("folds", learners.folds);
    learners.epochs = ls.count("epochs", learners.epochs);
    learners.svm_c = ls.number("svm_c", learners.svm_c);
    learners.pfi_repeats = ls.count("pfi_repeats", learners.pfi_repeats);
    learners.holdout_fraction = ls.number("holdout_fraction", learners.holdout_fraction);
    if (learners.n_trees == 0) ls.fail("must be >= 1", "n_trees");
    if (learners.c_grid.empty()) ls.fail("must not be empty", "c_grid");
    for (double c : learners.c_grid)
        if (!(c > 0.0)) ls.fail("entries must be positive", "c_grid");
    if (!(learners.holdout_fraction > 0.0 && learners.holdout_fraction < 1.0))
        ls.fail("must lie in (0, 1)", "holdout_fraction");
    ls.finish();

    const auto ids = root.strings("methods");
    if (ids.empty()) throw std::invalid_argument("no methods configured");
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) root.fail("duplicate method '" + id + "'", "methods");
        try {
            cfg.methods.push_back(make_method(id, learners));
        } catch (const std::exception& e) {
            root.fail(e.what(), "methods");
        }
    }
    root.finish();
    if (cfg.scenarios.type1_magnitudes.empty() && cfg.scenarios.type2_magnitudes.empty())
        root.fail("no scenarios configured (set type1 and/or type2 magnitudes)", "scenarios");
    return cfg;
}

NetworkGraph resolve_graph(const ExperimentConfig& cfg) {
    if (cfg.graph.file) {
        auto g = load_graph(*cfg.graph.file);
        if (g.sensor_indices().empty()) {
            std::vector<NodeId> ids;
            for (auto v : farthest_point_sensors(g, cfg.graph.sensors)) ids.push_back(g.id(v));
            g = with_sensors(g, ids);
        }
        return g;
    }
    return random_geometric_graph(cfg.graph.nodes, cfg.graph.radius, cfg.graph.sensors,
                                  derive_seed(cfg.seed, stable_hash("graph")));
}

std::vector<AnomalyScenario> resolve_scenarios(const ExperimentConfig& cfg, const NetworkGraph& g) {
    std::vector<AnomalyScenario> out;
    if (!cfg.scenarios.type1_magnitudes.empty())
        out = generate_scenarios(g, cfg.scenarios.batch, {AnomalyKind::type_i}, cfg.scenarios.type1_magnitudes,
                                 derive_seed(cfg.seed, stable_hash("scenarios"), 1));
    if (!cfg.scenarios.type2_magnitudes.empty()) {
        if (g.sensor_indices().empty()) throw std::invalid_argument("type-II scenarios need sensors");
        auto t2 = generate_scenarios(g, cfg.scenarios.batch, {AnomalyKind::type_ii}, cfg.scenarios.type2_magnitudes,
                                     derive_seed(cfg.seed, stable_hash("scenarios"), 2));
        out.insert(out.end(), t2.begin(), t2.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario execution

MeasurementWindow scenario_window(const ExperimentConfig& cfg, const NetworkGraph& g, const TransitionModel& model,
                                  const AnomalyScenario& s, std::uint64_t scenario_seed) {
    const auto w = cfg.scenarios.batch.half_window;
    if (s.onset < w) throw std::invalid_argument("scenario onset " + std::to_string(s.onset) + " is before w");
    // The simulated segment covers [onset - w, onset + w); locally the onset is row w.
    AnomalyScenario local = s;
    local.onset = w;
    Matrix anomaly;
    if (s.kind == AnomalyKind::type_i) anomaly = anomaly_demand_series(local, g, 2 * w);

    const auto demand = cfg.demand.model(g.node_count());
    const auto obs = simulate(model, demand, anomaly, 2 * w, cfg.burn_in, scenario_seed, s.onset - w);
    auto series = measure(obs, g, {}, cfg.sigma1, cfg.sigma0, derive_seed(scenario_seed, 3));
    if (s.kind == AnomalyKind::type_ii)
        series.values = apply_sensor_fault(series.values, series.sensors, local, cfg.sigma0, derive_seed(scenario_seed, 4));
    return extract_window(series, w, w);
}

// Scenarios sharing (window, onset) share the nominal demand and noise draws,
// so targets and profiles are compared on common random numbers.
std::uint64_t simulation_seed(std::uint64_t master, const AnomalyScenario& s) {
    return derive_seed(master, stable_hash("simulate"), s.window, s.onset);
}

namespace {

std::uint64_t localization_seed(std::uint64_t master, std::size_t index) {
    return derive_seed(master, stable_hash("localize"), index);
}

}  // namespace

ScenarioRecord run_scenario(const ExperimentConfig& cfg, const NetworkGraph& g, const TransitionModel& model,
                            const AnomalyScenario& s, std::size_t index) {
    const auto mw = scenario_window(cfg, g, model, s, simulation_seed(cfg.seed, s));
    ScenarioRecord record{index, s, {}};
    const auto seed = localization_seed(cfg.seed, index);
    for (const auto& m : cfg.methods) {
        MethodOutcome outcome{run_method(m, mw, method_seed(seed, m.id)), std::nullopt};
        outcome.result.method = m.id;
        if (s.kind == AnomalyKind::type_i) outcome.metrics = eval_type1(outcome.result, s, g);
        record.outcomes.push_back(std::move(outcome));
    }
    return record;
}

namespace {

nlohmann::json metrics_json(const Type1Metrics& m) {
    nlohmann::json j;
    j["distance_topo"] = m.distance_topo.is_finite() ? nlohmann::json(m.distance_topo.value()) : nlohmann::json();
    j["distance_geo"] = m.distance_geo;
    j["n_closer"] = m.n_closer;
    j["rel_dist"] = m.rel_dist ? nlohmann::json(*m.rel_dist) : nlohmann::json();
    j["best3"] = m.best3;
    return j;
}

Type1Metrics metrics_from_json(const nlohmann::json& j) {
    Type1Metrics m;
    m.distance_topo = j.at("distance_topo").is_null() ? Hops::infinite() : Hops(j.at("distance_topo").get<std::size_t>());
    m.distance_geo = j.at("distance_geo").get<double>();
    m.n_closer = j.at("n_closer").get<std::size_t>();
    if (!j.at("rel_dist").is_null()) m.rel_dist = j.at("rel_dist").get<double>();
    m.best3 = j.at("best3").get<std::size_t>();
    return m;
}

std::string format_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

}  // namespace

std::string to_jsonl(const ScenarioRecord& record) {
    std::string out;
    for (const auto& o : record.outcomes) {
        nlohmann::json j{{"index", record.index},
                         {"scenario", to_json(record.scenario)},
                         {"method", o.result.method},
                         {"selected", o.result.selected},
                         {"ranking", o.result.ranking}};
        j["accuracy"] = o.result.model_accuracy ? nlohmann::json(*o.result.model_accuracy) : nlohmann::json();
        j["hit"] = record.scenario.kind == AnomalyKind::type_ii ? nlohmann::json(o.result.selected == record.scenario.node)
                                                                : nlohmann::json();
        j["metrics"] = o.metrics ? metrics_json(*o.metrics) : nlohmann::json();
        out += j.dump() + '\n';
    }
    return out;
}

AggregateReport aggregate_records(std::istream& jsonl) {
    std::vector<Type1Metrics> metrics;
    std::vector<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(jsonl, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.at("metrics").is_null()) continue;
            metrics.push_back(metrics_from_json(j.at("metrics")));
            ids.push_back(j.at("method").get<std::string>());
        } catch (const std::exception& e) {
            throw std::runtime_error("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return aggregate(metrics, ids);
}

std::string type2_csv(const std::map<std::string, Type2Metrics>& type2, const std::vector<std::string>& order) {
    std::string out = "method,recall,precision,f1,hits,scenarios\n";
    for (const auto& id : order) {
        auto it = type2.find(id);
        if (it == type2.end()) continue;
        const auto& m = it->second;
        out += id + ',' + format_g(m.recall) + ',' + format_g(m.precision) + ',' + format_g(m.f1) + ',' +
               std::to_string(m.hits) + ',' + std::to_string(m.scenarios) + '\n';
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs, bool write_outputs) {
    if (cfg.methods.empty()) throw std::invalid_argument("no methods configured");
    ExperimentResult result{resolve_graph(cfg), {}, std::nullopt, {}, {}};
    const auto& g = result.graph;
    const auto model = TransitionModel::uniform(g, cfg.dynamics);
    const auto scenarios = resolve_scenarios(cfg, g);

    std::ofstream jsonl;
    if (write_outputs) {
        std::filesystem::create_directories(cfg.output);
        jsonl.open(cfg.output / "records.jsonl", std::ios::binary | std::ios::trunc);
        if (!jsonl) throw std::runtime_error("cannot write " + (cfg.output / "records.jsonl").string());
    }

    // Workers pull scenario indices; the writer appends records strictly in
    // index order so the JSONL is identical for any worker count.
    result.records.resize(scenarios.size());
    std::vector<char> done(scenarios.size(), 0);
    std::size_t next_write = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex mu;

    auto worker = [&] {
        while (!stop) {
            const auto i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                auto record = run_scenario(cfg, g, model, scenarios[i], i);
                std::lock_guard lock(mu);
                result.records[i] = std::move(record);
                done[i] = 1;
                while (next_write < done.size() && done[next_write]) {
                    if (jsonl.is_open()) jsonl << to_jsonl(result.records[next_write]) << std::flush;
                    ++next_write;
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    const auto workers = std::max<std::size_t>(1, std::min(jobs, scenarios.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    if (jsonl.is_open()) jsonl.close();

    std::vector<std::string> order;
    for (const auto& m : cfg.methods) order.push_back(m.id);

    std::vector<Type1Metrics> metrics;
    std::vector<std::string> ids;
    std::map<std::string, std::vector<double>> distances;
    std::map<std::string, std::map<NodeId, std::vector<double>>> by_node;
    std::map<std::string, std::vector<std::pair<LocalizationResult, AnomalyScenario>>> type2;
    for (const auto& r : result.records) {
        for (const auto& o : r.outcomes) {
            if (o.metrics) {
                metrics.push_back(*o.metrics);
                ids.push_back(o.result.method);
                distances[o.result.method].push_back(o.metrics->distance_topo.as_double());
                by_node[o.result.method][r.scenario.node].push_back(o.metrics->distance_topo.as_double());
            } else {
                type2[o.result.method].emplace_back(o.result, r.scenario);
            }
        }
    }
    if (!metrics.empty()) result.type1 = aggregate(metrics, ids);
    for (const auto& [id, rs] : type2) result.type2[id] = eval_type2(rs);
    if (distances.contains("random"))
        for (const auto& id : order)
            if (id != "random" && distances.contains(id))
                result.versus_random[id] = wilcoxon_less(distances[id], distances["random"]);

    if (write_outputs) {
        if (result.type1) {
            std::ostringstream table;
            result.type1->write_csv(table);
            write_text(cfg.output / "table.csv", table.str());

            std::map<NodeId, double> baseline;
            for (const auto& [node, _] : by_node.begin()->second)
                baseline[node] = random_baseline_distance(g, g.index_of(node));
            for (const auto& [id, nodes] : by_node)
                write_text(cfg.output / ("error_map_" + id + ".json"),
                           to_json(error_map(nodes, g, baseline)).dump(1) + '\n');
        }
        if (!result.type2.empty()) write_text(cfg.output / "type2.csv", type2_csv(result.type2, order));
        if (!result.versus_random.empty()) {
            std::string csv = "method,baseline,statistic,z,p_value,n\n";
            for (const auto& id : order) {
                auto it = result.versus_random.find(id);
                if (it == result.versus_random.end()) continue;
                const auto& w = it->second;
                csv += id + ",random," + format_g(w.statistic) + ',' + format_g(w.z) + ',' + format_g(w.p_value) +
                       ',' + std::to_string(w.n) + '\n';
            }
            write_text(cfg.output / "wilcoxon.csv", csv);
        }
    }
    return result;
}

std::vector<LocalizationResult> ingest_external(const SensorSeries& series, std::size_t onset, std::size_t w,
                                                const std::vector<MethodSpec>& methods, std::uint64_t seed) {
    if (methods.empty()) throw std::invalid_argument("no methods configured");
    if (onset < w || onset + w > series.values.rows())
        throw std::out_of_range("onset " + std::to_string(onset) + " is too close to the series boundary for w = " +
                                std::to_string(w) + " (" + std::to_string(series.values.rows()) + " rows)");
    const auto mw = extract_window(series, onset, w);
    std::vector<LocalizationResult> out;
    for (const auto& m : methods) {
        auto r = run_method(m, mw, method_seed(seed, m.id));
        r.method = m.id;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<LocalizationResult> ingest_external(const std::filesystem::path& csv, std::size_t onset, std::size_t w,
                                                const std::vector<MethodSpec>& methods, std::uint64_t seed) {
    return ingest_external(to_sensor_series(read_series_csv(csv)), onset, w, methods, seed);
}

}  // namespace driftloc
