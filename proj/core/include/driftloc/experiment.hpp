#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftloc/anomaly.hpp"
#include "driftloc/dynamics.hpp"
#include "driftloc/evaluation.hpp"
#include "driftloc/localization.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

/// A localization method: "random", "mean", "ks" or a learner-based id
/// (fi_rf, pfi_rf, fi_et, pfi_et, logreg, svm, logreg_pfi, svm_pfi).
struct MethodSpec {
    std::string id;
    std::optional<LearnerSpec> learner;
};

/// Resolves a method id against the registry; `learners` overrides the
/// hyperparameter defaults. Throws for unknown ids.
MethodSpec make_method(const std::string& id, const LearnerSpec& learners = {});
std::vector<std::string> registered_methods();

/// Seed handed to a method for a given scenario (or ingest) seed.
std::uint64_t method_seed(std::uint64_t seed, const std::string& method_id);
LocalizationResult run_method(const MethodSpec& method, const MeasurementWindow& mw, std::uint64_t seed);

struct GraphSource {
    std::optional<std::filesystem::path> file;
    std::size_t nodes = 100;
    double radius = 0.18;
    std::size_t sensors = 10;
};

struct DemandConfig {
    double base = 1.0;
    std::size_t period = 144;
    double amplitude = 0.3;
    double persistence = 0.9;
    double volatility = 0.05;
    double noise = 0.1;

    DemandModel model(std::size_t nodes) const;
};

struct ScenarioConfig {
    ScenarioBatch batch;
    std::vector<double> type1_magnitudes;  // absolute demand units
    std::vector<double> type2_magnitudes;
};

struct ExperimentConfig {
    GraphSource graph;
    DynamicsParams dynamics;
    double sigma1 = 0.05;
    double sigma0 = 0.5;
    std::size_t burn_in = 200;
    DemandConfig demand;
    ScenarioConfig scenarios;
    std::vector<MethodSpec> methods;
    std::uint64_t seed = 0;
    std::filesystem::path output = "out";
};

/// Builds a config from a parsed JSON/TOML tree. Errors name the offending
/// path (e.g. "config.dynamics.c: expected a number"). `seed` is mandatory.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

NetworkGraph resolve_graph(const ExperimentConfig& cfg);
std::vector<AnomalyScenario> resolve_scenarios(const ExperimentConfig& cfg, const NetworkGraph& g);

struct MethodOutcome {
    LocalizationResult result;
    std::optional<Type1Metrics> metrics;  // type-I scenarios only
};

struct ScenarioRecord {
    std::size_t index = 0;
    AnomalyScenario scenario;
    std::vector<MethodOutcome> outcomes;  // config method order
};

std::uint64_t simulation_seed(std::uint64_t master, const AnomalyScenario& s);

/// Simulates one scenario and returns the measurement window around its onset.
MeasurementWindow scenario_window(const ExperimentConfig& cfg, const NetworkGraph& g, const TransitionModel& model,
                                  const AnomalyScenario& s, std::uint64_t scenario_seed);

ScenarioRecord run_scenario(const ExperimentConfig& cfg, const NetworkGraph& g, const TransitionModel& model,
                            const AnomalyScenario& s, std::size_t index);

struct ExperimentResult {
    NetworkGraph graph;
    std::vector<ScenarioRecord> records;
    std::optional<AggregateReport> type1;
    std::map<std::string, Type2Metrics> type2;
    /// Paired one-sided test of each method's topological distance against "random".
    std::map<std::string, WilcoxonResult> versus_random;
};

/// Runs every scenario with `jobs` workers. With `write_outputs` the results
/// go to cfg.output: records.jsonl, table.csv, type2.csv, wilcoxon.csv and
/// error_map_<method>.json. Output is independent of `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1, bool write_outputs = true);

/// One JSON line per (scenario, method).
std::string to_jsonl(const ScenarioRecord& record);
/// Recomputes the method/metric aggregate from records.jsonl contents.
AggregateReport aggregate_records(std::istream& jsonl);
std::string type2_csv(const std::map<std::string, Type2Metrics>& type2, const std::vector<std::string>& order);

/// Localizes on an external `t,<sensor ids...>` CSV; onset is a row index.
std::vector<LocalizationResult> ingest_external(const std::filesystem::path& csv, std::size_t onset, std::size_t w,
                                                const std::vector<MethodSpec>& methods, std::uint64_t seed);
std::vector<LocalizationResult> ingest_external(const SensorSeries& series, std::size_t onset, std::size_t w,
                                                const std::vector<MethodSpec>& methods, std::uint64_t seed);

}  // namespace driftloc
