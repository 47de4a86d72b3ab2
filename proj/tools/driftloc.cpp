#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "driftloc/config.hpp"
#include "driftloc/experiment.hpp"
#include "driftloc/io.hpp"
#include "driftloc/theory.hpp"

namespace fs = std::filesystem;
using namespace driftloc;

namespace {

// Exit codes: 0 ok, 1 a verification suite failed, 2 bad input.
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

ExperimentConfig load_experiment(const std::string& path, std::optional<std::uint64_t> seed,
                                 const std::string& out) {
    auto j = load_config(path);
    if (seed) j["seed"] = *seed;
    auto cfg = parse_experiment_config(j);
    if (!out.empty()) cfg.output = out;
    return cfg;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") std::cout << text;
    else write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor-network anomaly localization via drift explanation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "driftloc 0.1.0");

    std::string config_path, out;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;

    // graph gen
    auto* graph = app.add_subcommand("graph", "Graph utilities");
    graph->require_subcommand(1);
    auto* graph_gen = graph->add_subcommand("gen", "Generate a random geometric graph");
    std::size_t nodes = 100, sensors = 10;
    double radius = 0.18;
    graph_gen->add_option("--nodes", nodes, "Node count before keeping the largest component")->capture_default_str();
    graph_gen->add_option("--radius", radius, "Connection radius in the unit square")->capture_default_str();
    graph_gen->add_option("--sensors", sensors, "Sensors placed by farthest-point sampling")->capture_default_str();
    graph_gen->add_option("--seed", seed, "Seed")->required();
    graph_gen->add_option("--out", out, "Output graph JSON (default stdout)");

    // scenarios generate
    auto* scen = app.add_subcommand("scenarios", "Scenario utilities");
    scen->require_subcommand(1);
    auto* scen_gen = scen->add_subcommand("generate", "Expand the configured scenario batch to a JSON list");
    scen_gen->add_option("--config", config_path, "Experiment config (JSON or TOML)")->required()->check(CLI::ExistingFile);
    scen_gen->add_option("--seed", seed, "Override the config seed");
    scen_gen->add_option("--out", out, "Output scenario JSON (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate one scenario (or a nominal run) and export CSV");
    std::string scenario_file;
    std::size_t index = 0, steps = 0;
    sim->add_option("--config", config_path, "Experiment config (JSON or TOML)")->required()->check(CLI::ExistingFile);
    sim->add_option("--seed", seed, "Override the config seed");
    sim->add_option("--scenarios", scenario_file, "Scenario JSON list (default: generated from the config)");
    sim->add_option("--index", index, "Scenario index")->capture_default_str();
    sim->add_option("--steps", steps, "Nominal run of this many steps instead of a scenario");
    sim->add_option("--out", out, "Output directory")->required();

    // localize
    auto* loc = app.add_subcommand("localize", "Localize on a t,<sensor ids...> CSV");
    std::string csv_path;
    std::size_t onset = 0, window = 0;
    std::vector<std::string> methods;
    loc->add_option("--csv", csv_path, "Measurement CSV")->required()->check(CLI::ExistingFile);
    loc->add_option("--onset", onset, "Onset row index")->required();
    loc->add_option("--window", window, "Half-window w")->required();
    loc->add_option("--method", methods, "Method id (repeatable)")->required();
    loc->add_option("--config", config_path, "Optional config for learner hyperparameters");
    loc->add_option("--seed", seed, "Seed (default 0)");
    loc->add_option("--out", out, "Output JSON (default stdout)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Aggregate records.jsonl into the method/metric table");
    std::string records_path;
    eval->add_option("--records", records_path, "records.jsonl from `run`")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", out, "Output CSV (default stdout)");

    // verify
    auto* verify = app.add_subcommand("verify", "Check the analytical bounds numerically");
    std::string suite = "all";
    TheorySweepConfig sweep;
    verify->add_option("--suite", suite, "fixpoint|hoelder|mean|decay|necessity|all")
        ->check(CLI::IsMember({"fixpoint", "hoelder", "mean", "decay", "necessity", "all"}))
        ->capture_default_str();
    verify->add_option("--instances", sweep.instances, "Random instances per suite")->capture_default_str();
    verify->add_option("--max-nodes", sweep.max_nodes, "Largest random graph")->capture_default_str();
    verify->add_option("--seed", seed, "Seed (default 0)");
    verify->add_option("--out", out, "Output JSON report (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "End-to-end experiment");
    run->add_option("--config", config_path, "Experiment config (JSON or TOML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--out", out, "Override the output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph_gen->parsed()) {
            const auto g = random_geometric_graph(nodes, radius, sensors, *seed);
            emit(out, graph_to_json(g).dump(1) + '\n');
        } else if (scen_gen->parsed()) {
            const auto cfg = load_experiment(config_path, seed, "");
            emit(out, scenarios_to_json(resolve_scenarios(cfg, resolve_graph(cfg))).dump(1) + '\n');
        } else if (sim->parsed()) {
            const auto cfg = load_experiment(config_path, seed, out);
            const auto g = resolve_graph(cfg);
            const auto model = TransitionModel::uniform(g, cfg.dynamics);
            std::ostringstream obs_csv, meas_csv;
            if (steps > 0) {
                const auto obs = simulate(model, cfg.demand.model(g.node_count()), {}, steps, cfg.burn_in,
                                          derive_seed(cfg.seed, stable_hash("simulate")));
                write_series_csv(obs_csv, obs, g);
                write_series_csv(meas_csv, measure(obs, g, {}, cfg.sigma1, cfg.sigma0, derive_seed(cfg.seed, 3)));
            } else {
                const auto scenarios = scenario_file.empty()
                                           ? resolve_scenarios(cfg, g)
                                           : scenarios_from_json(nlohmann::json::parse(read_text(scenario_file)));
                if (index >= scenarios.size())
                    throw std::out_of_range("scenario index " + std::to_string(index) + " out of range (" +
                                            std::to_string(scenarios.size()) + " scenarios)");
                const auto& s = scenarios[index];
                const auto mw = scenario_window(cfg, g, model, s, simulation_seed(cfg.seed, s));
                write_series_csv(meas_csv, mw.values, mw.sensors, s.onset - mw.half_window);
                write_text(fs::path(cfg.output) / "scenario.json", to_json(s).dump(1) + '\n');
            }
            if (!obs_csv.str().empty()) write_text(fs::path(cfg.output) / "observables.csv", obs_csv.str());
            write_text(fs::path(cfg.output) / "measurements.csv", meas_csv.str());
            write_text(fs::path(cfg.output) / "graph.json", graph_to_json(g).dump(1) + '\n');
        } else if (loc->parsed()) {
            LearnerSpec learners;
            if (!config_path.empty()) {
                auto j = load_config(config_path);
                if (!j.contains("seed")) j["seed"] = 0;
                if (!j.contains("methods")) j["methods"] = methods;
                const auto cfg = parse_experiment_config(j);
                for (const auto& m : cfg.methods)
                    if (m.learner) learners = *m.learner;
            }
            std::vector<MethodSpec> specs;
            for (const auto& id : methods) specs.push_back(make_method(id, learners));
            auto arr = nlohmann::json::array();
            for (const auto& r : ingest_external(fs::path(csv_path), onset, window, specs, seed.value_or(0)))
                arr.push_back(to_json(r));
            emit(out, arr.dump(1) + '\n');
        } else if (eval->parsed()) {
            std::ifstream in(records_path);
            std::ostringstream csv;
            aggregate_records(in).write_csv(csv);
            emit(out, csv.str());
        } else if (verify->parsed()) {
            const auto results = run_theory_suite(parse_theory_suite(suite), sweep, seed.value_or(0));
            const auto report = to_json(results);
            emit(out, report.dump(1) + '\n');
            if (!report["pass"].get<bool>()) {
                std::cerr << "verify: at least one bound check failed\n";
                return kFailed;
            }
        } else if (run->parsed()) {
            const auto cfg = load_experiment(config_path, seed, out);
            const auto result = run_experiment(cfg, jobs, true);
            std::cerr << "run: " << result.records.size() << " scenarios, outputs in " << cfg.output.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    }
    return 0;
}
