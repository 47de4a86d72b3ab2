// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "driftloc/config.hpp"
#include "driftloc/experiment.hpp"
#include "driftloc/io.hpp"
#include "driftloc/learners.hpp"
#include "driftloc/localization.hpp"
#include "driftloc/theory.hpp"
#include "fixtures.hpp"

using namespace driftloc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig load_benchmark(const std::string& name, const fs::path& out) {
    auto cfg = parse_experiment_config(load_config(fs::path(DRIFTLOC_CONFIG_DIR) / name));
    cfg.output = out;
    return cfg;
}

// ---------------------------------------------------------------------------

Outcome theory_suite() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    TheorySweepConfig cfg;
    cfg.instances = 100;
    cfg.max_nodes = 50;
    for (const auto& r : run_theory_suite(TheorySuite::all, cfg, 1)) {
        o.require(r.pass(), r.suite + " (" + std::to_string(r.failures) + " of " + std::to_string(r.checks) + " checks)");
        o.note(r.suite + " " + std::to_string(r.checks) + " checks, worst ratio " + fmt(r.worst_ratio));
    }
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto r = necessity_example(n, 0.3);
        o.require(std::abs(r.ratio - 0.3 * static_cast<double>(n)) <= 1e-12, "necessity ratio at n=" + std::to_string(n));
    }
    const double elapsed = seconds_since(start);
    o.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s >= 120 s");
    o.note(fmt(elapsed, 3) + " s");
    return o;
}

// ---------------------------------------------------------------------------

double ks_quadratic(const std::vector<double>& a, const std::vector<double>& b) {
    auto cdf = [](const std::vector<double>& s, double x) {
        double c = 0;
        for (double v : s) c += v <= x;
        return c / static_cast<double>(s.size());
    };
    double best = 0.0;
    for (const auto* s : {&a, &b})
        for (double x : *s) best = std::max(best, std::abs(cdf(a, x) - cdf(b, x)));
    return best;
}

Eigen::VectorXd dense_steady(const TransitionModel& m, std::span<const double> d) {
    const auto n = static_cast<Eigen::Index>(m.node_count());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    const auto rows = m.row_offsets();
    for (Eigen::Index v = 0; v < n; ++v)
        for (auto e = rows[v]; e < rows[v + 1]; ++e)
            A(v, static_cast<Eigen::Index>(m.column_indices()[e])) -= m.contraction() * m.weights()[e];
    Eigen::VectorXd rhs(n);
    for (Eigen::Index v = 0; v < n; ++v) rhs(v) = m.base_levels()[v] - m.demand_gain() * d[v];
    return A.partialPivLu().solve(rhs);
}

Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;

    std::size_t mean_mismatch = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t w = 10 + static_cast<std::size_t>(trial), sensors = 1 + trial % 7;
        MeasurementWindow mw{Matrix(2 * w, sensors), {}, w};
        for (std::size_t j = 0; j < sensors; ++j) mw.sensors.push_back("s" + std::to_string(j));
        for (std::size_t i = 0; i < 2 * w; ++i)
            for (std::size_t j = 0; j < sensors; ++j) mw.values(i, j) = 50 + z(rng);
        const auto r = localize_mean(mw);
        for (std::size_t j = 0; j < sensors; ++j) {
            double before = 0.0, after = 0.0;
            for (std::size_t i = 0; i < w; ++i) before += mw.values(i, j);
            for (std::size_t i = w; i < 2 * w; ++i) after += mw.values(i, j);
            mean_mismatch += r.scores[j] != std::abs(before - after);
        }
    }
    o.require(mean_mismatch == 0, "mean scores differ from brute force in " + std::to_string(mean_mismatch) + " cases");

    double ks_worst = 0.0;
    std::uniform_int_distribution<int> len(1, 60), coarse(0, 8);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(len(rng)), b(len(rng));
        for (auto* s : {&a, &b})
            for (auto& v : *s) v = trial % 2 ? coarse(rng) : z(rng);
        ks_worst = std::max(ks_worst, std::abs(ks_statistic(a, b) - ks_quadratic(a, b)));
    }
    o.require(ks_worst <= 1e-12, "KS deviation " + fmt(ks_worst));
    o.note("KS max deviation " + fmt(ks_worst) + " over 1000 pairs");

    double steady_worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = fixtures::random_graph(5 + seed % 40, 0.15, 500 + seed);
        const auto m = fixtures::random_model(g, seed);
        const auto d = fixtures::random_vector(g.node_count(), rng, 0, 3);
        const auto p = steady_state(m, d);
        const auto ref = dense_steady(m, d);
        double l1 = 0.0;
        for (std::size_t v = 0; v < p.size(); ++v) l1 += std::abs(p[v] - ref(static_cast<Eigen::Index>(v)));
        steady_worst = std::max(steady_worst, l1);
    }
    o.require(steady_worst <= 1e-8, "steady state l1 deviation " + fmt(steady_worst));
    o.note("steady state max l1 deviation " + fmt(steady_worst) + " over 50 models");
    return o;
}

// ---------------------------------------------------------------------------

LabeledWindowDataset separable(std::size_t n, std::size_t features, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    LabeledWindowDataset d{Matrix(n, features), std::vector<int>(n), {}};
    for (std::size_t f = 0; f < features; ++f) d.feature_ids.push_back("f" + std::to_string(f));
    for (std::size_t i = 0; i < n; ++i) {
        d.y[i] = static_cast<int>(i % 2);
        for (std::size_t f = 0; f < features; ++f) d.X(i, f) = z(rng);
        const double v = std::abs(d.X(i, 0)) + 0.5;
        d.X(i, 0) = d.y[i] ? v : -v;
        d.X(i, features - 1) = 3.0;  // constant column
    }
    return d;
}

Outcome learner_sanity() {
    Outcome o;
    const auto d = separable(120, 4, 3);
    const auto constant = d.features() - 1;

    const auto Z = Standardizer::fit(d.X).transform(d.X);
    const LogisticObjective f{Z, d.y, 0.01};
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    double worst = 0.0;
    for (int point = 0; point < 5; ++point) {
        std::vector<double> theta(d.features() + 1);
        for (auto& t : theta) t = z(rng);
        const auto g = f.gradient(theta);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            auto up = theta, down = theta;
            up[k] += 1e-6;
            down[k] -= 1e-6;
            const double fd = (f.value(up) - f.value(down)) / 2e-6;
            worst = std::max(worst, std::abs(fd - g[k]) / std::max(std::abs(g[k]), 1e-3));
        }
    }
    o.require(worst < 1e-5, "gradient relative error " + fmt(worst));
    o.note("gradient rel. error " + fmt(worst, 3));

    const std::vector<std::pair<std::string, FittedModel>> models{
        {"rf", fit_tree_ensemble(d, TreeEnsembleKind::rf, 50, 8, 1)},
        {"et", fit_tree_ensemble(d, TreeEnsembleKind::et, 50, 8, 1)},
        {"logreg", fit_logreg_cv(d, {0.1, 1.0, 10.0}, 5, 200, 1)},
        {"svm", fit_linear_svm(d, 10.0, 200, 1)}};
    for (const auto& [name, m] : models) {
        const double acc = accuracy(m, d);
        o.require(acc == 1.0, name + " training accuracy " + fmt(acc));
        if (m.is_tree()) {
            o.require(impurity_importance(m)[constant] == 0.0, name + " FI of constant feature");
            o.require(permutation_importance(m, d, 10, 2)[constant] == 0.0, name + " PFI of constant feature");
        } else {
            o.require(m.linear().weights[constant] == 0.0, name + " weight of constant feature");
            o.require(linear_importance(m)[constant] == 0.0, name + " importance of constant feature");
        }
    }
    o.note("rf/et/logreg/svm training accuracy 1.0 and zero importance on the constant column");
    return o;
}

// ---------------------------------------------------------------------------

Outcome type1_ordinal(const fs::path& out) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = load_benchmark("type1.toml", out / "type1");
    const auto result = run_experiment(cfg, 1, true);
    const double elapsed = seconds_since(start);
    o.require(result.records.size() == 200, std::to_string(result.records.size()) + " scenarios instead of 200");
    o.require(result.type1.has_value(), "no type-I aggregate");
    if (!result.type1) return o;

    for (const auto* method : {"mean", "ks"}) {
        const auto it = result.versus_random.find(method);
        const double p = it == result.versus_random.end() ? 1.0 : it->second.p_value;
        o.require(p < 0.01, std::string(method) + " vs random p = " + fmt(p));
        o.note(std::string(method) + " vs random p=" + fmt(p, 3));
    }
    const double n_closer = result.type1->at("fi_rf", "n_closer").stats.median;
    const double fi_dist = result.type1->at("fi_rf", "distance_topo").stats.median;
    const double mean_dist = result.type1->at("mean", "distance_topo").stats.median;
    o.require(n_closer == 0.0, "fi_rf median n_closer " + fmt(n_closer));
    o.require(fi_dist <= mean_dist, "fi_rf median distance " + fmt(fi_dist) + " > mean " + fmt(mean_dist));
    o.note("fi_rf median n_closer " + fmt(n_closer) + ", median distance fi_rf " + fmt(fi_dist) + " vs mean " +
           fmt(mean_dist));
    o.require(elapsed < 600.0, "runtime " + fmt(elapsed) + " s >= 600 s");
    o.note(fmt(elapsed, 3) + " s");
    return o;
}

Outcome type2_faults(const fs::path& out) {
    Outcome o;
    const auto cfg = load_benchmark("type2.toml", out / "type2");
    for (double a : cfg.scenarios.type2_magnitudes)
        o.require(a >= 5 * cfg.sigma1, "offset " + fmt(a) + " below 5 sigma1");
    const auto result = run_experiment(cfg, 1, true);
    o.require(result.records.size() == 200, std::to_string(result.records.size()) + " scenarios instead of 200");

    const auto sensors = static_cast<double>(result.graph.sensor_indices().size());
    for (const auto* method : {"fi_rf", "fi_et"}) {
        const auto it = result.type2.find(method);
        const double f1 = it == result.type2.end() ? 0.0 : it->second.f1;
        o.require(f1 >= 0.9, std::string(method) + " F1 " + fmt(f1));
        o.note(std::string(method) + " F1 " + fmt(f1));
    }
    const auto it = result.type2.find("random");
    const double random_f1 = it == result.type2.end() ? -1.0 : it->second.f1;
    o.require(std::abs(random_f1 - 1.0 / sensors) <= 0.05, "random F1 " + fmt(random_f1));
    o.note("random F1 " + fmt(random_f1) + " (1/|S| = " + fmt(1.0 / sensors) + ")");
    return o;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_text(e.path());
    return files;
}

Outcome determinism(const fs::path& out) {
    Outcome o;
    const auto config = fs::path(DRIFTLOC_CONFIG_DIR) / "smoke.toml";
    std::vector<std::map<std::string, std::string>> runs;
    for (auto [name, jobs] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}, {"c", 3}}) {
        const auto dir = out / ("determinism_" + name);
        fs::remove_all(dir);
#ifdef DRIFTLOC_CLI
        const auto cmd = std::string(DRIFTLOC_CLI) + " run --config " + config.string() + " --jobs " +
                         std::to_string(jobs) + " --out " + dir.string() + " 2>/dev/null";
        o.require(std::system(cmd.c_str()) == 0, "driftloc run failed");
#else
        auto cfg = parse_experiment_config(load_config(config));
        cfg.output = dir;
        run_experiment(cfg, static_cast<std::size_t>(jobs), true);
#endif
        runs.push_back(read_dir(dir));
    }
    o.require(!runs[0].empty(), "no outputs written");
    o.require(runs[0] == runs[1], "two --jobs 1 runs differ");
    o.require(runs[0] == runs[2], "--jobs 1 and --jobs 3 differ");
    o.note(std::to_string(runs[0].size()) + " output files identical across 3 runs (jobs 1, 1, 3)");
    return o;
}

// ---------------------------------------------------------------------------

Outcome decay_envelope() {
    Outcome o;
    auto cfg = parse_experiment_config(nlohmann::json::parse(R"({
      "seed": 5,
      "window": 288,
      "methods": ["mean"],
      "dynamics": {"mode": "theorem", "sigma1": 0.0, "burn_in": 300},
      "demand": {"amplitude": 0.0, "volatility": 0.0, "noise": 0.0},
      "scenarios": {"type1": ["medium"]}
    })"));
    const auto w = cfg.scenarios.batch.half_window;
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = random_geometric_graph(60, 0.22, 10, derive_seed(seed, 77));
        const auto model = TransitionModel::uniform(g, cfg.dynamics);
        if (!satisfies_decay_hypothesis(model)) {
            o.require(false, "instance " + std::to_string(seed) + " violates the decay hypothesis");
            continue;
        }
        std::mt19937_64 rng(seed);
        const auto node = std::uniform_int_distribution<std::size_t>(0, g.node_count() - 1)(rng);
        const double a = 2.0 * cfg.demand.base;
        const AnomalyScenario s{AnomalyKind::type_i, g.id(node), 1000, a, FaultProfile::offset, 0, 0};
        const auto mw = scenario_window(cfg, g, model, s, derive_seed(seed, 1));
        const auto result = localize_mean(mw);
        const auto hops = hops_from(g, node);

        // Sensors in order of distance; each score must lie under w times the envelope.
        std::vector<std::size_t> order(mw.sensors.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
            return hops[g.index_of(mw.sensors[x])] < hops[g.index_of(mw.sensors[y])];
        });
        for (auto j : order) {
            const auto d = hops[g.index_of(mw.sensors[j])];
            const double envelope = static_cast<double>(w) * decay_bound(model, a, d);
            const double score = result.scores[j];
            ++checks;
            // 1e-8 absorbs rounding in the two 288-term sums.
            if (score > envelope + 1e-8)
                o.require(false, "instance " + std::to_string(seed) + " sensor " + mw.sensors[j] + " score " +
                                     fmt(score) + " > envelope " + fmt(envelope));
            if (envelope > 0) worst = std::max(worst, score / envelope);
        }
    }
    o.note(std::to_string(checks) + " sensor scores on 20 instances, worst score/envelope " + fmt(worst));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    fs::path out = fs::temp_directory_path() / "driftloc_acceptance";
    app.add_option("--out", out, "Scratch directory for benchmark outputs");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 theory suite", theory_suite},
        {"AC2 oracle equivalence", oracle_equivalence},
        {"AC3 learner sanity", learner_sanity},
        {"AC4 type-I ordinal ranking", [&] { return type1_ordinal(out); }},
        {"AC5 type-II fault localization", [&] { return type2_faults(out); }},
        {"AC6 determinism across --jobs", [&] { return determinism(out); }},
        {"AC7 decay envelope", decay_envelope},
    };

    bool all = true;
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        summary.push_back({{"criterion", name}, {"pass", o.pass}, {"detail", o.detail}});
    }
    write_text(out / "acceptance.json", summary.dump(1) + '\n');
    return all ? 0 : 1;
}
