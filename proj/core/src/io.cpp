#include "driftloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace driftloc {

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
    throw std::runtime_error("malformed CSV, line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_series_csv(std::ostream& os, const Matrix& values, const std::vector<std::string>& ids, std::size_t t0) {
    if (ids.size() != values.cols()) throw std::invalid_argument("write_series_csv: one id per column required");
    os << 't';
    for (const auto& id : ids) os << ',' << id;
    os << '\n';
    for (std::size_t r = 0; r < values.rows(); ++r) {
        os << t0 + r;
        for (std::size_t c = 0; c < values.cols(); ++c) os << ',' << format_double(values(r, c));
        os << '\n';
    }
}

void write_series_csv(std::ostream& os, const SensorSeries& series) {
    write_series_csv(os, series.values, series.sensors, series.t0);
}

void write_series_csv(std::ostream& os, const ObservableSeries& series, const NetworkGraph& g) {
    write_series_csv(os, series.values, g.node_ids(), series.t0);
}

CsvSeries read_series_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line)) malformed(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_fields(line);
    if (header.size() < 2 || header.front() != "t") malformed(1, "header must be t,<ids...>");
    CsvSeries out;
    out.ids.assign(header.begin() + 1, header.end());
    for (const auto& id : out.ids)
        if (id.empty()) malformed(1, "empty column id");

    std::vector<double> data;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size())
            malformed(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        try {
            std::size_t used = 0;
            out.t.push_back(std::stoll(fields[0], &used));
            if (used != fields[0].size()) throw std::invalid_argument("t");
            for (std::size_t c = 1; c < fields.size(); ++c) {
                const double v = std::stod(fields[c], &used);
                if (used != fields[c].size() || !std::isfinite(v)) throw std::invalid_argument(fields[c]);
                data.push_back(v);
            }
        } catch (const std::exception&) {
            malformed(line_no, "non-numeric or non-finite field");
        }
    }
    out.values = Matrix(out.t.size(), out.ids.size(), std::move(data));
    return out;
}

CsvSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_series_csv(in);
}

SensorSeries to_sensor_series(const CsvSeries& csv) {
    const auto t0 = csv.t.empty() ? 0 : csv.t.front();
    if (t0 < 0) throw std::runtime_error("CSV time index must be nonnegative");
    return {csv.values, csv.ids, static_cast<std::size_t>(t0)};
}

nlohmann::json graph_to_json(const NetworkGraph& g) {
    auto nodes = nlohmann::json::array();
    for (std::size_t v = 0; v < g.node_count(); ++v)
        nodes.push_back({{"id", g.id(v)}, {"x", g.position(v).x}, {"y", g.position(v).y}});
    auto edges = nlohmann::json::array();
    for (auto [a, b] : g.edges()) edges.push_back({g.id(a), g.id(b)});
    return {{"nodes", nodes}, {"edges", edges}, {"sensors", g.sensor_ids()}};
}

NetworkGraph graph_from_json(const nlohmann::json& j) {
    try {
        std::vector<std::pair<NodeId, Point>> positions;
        for (const auto& n : j.at("nodes"))
            positions.emplace_back(n.at("id").get<std::string>(), Point{n.at("x").get<double>(), n.at("y").get<double>()});
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph: edges must be [a, b] pairs");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        std::vector<NodeId> sensors;
        if (j.contains("sensors")) sensors = j.at("sensors").get<std::vector<NodeId>>();
        return build_graph(edges, positions, sensors);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("graph file: ") + e.what());
    }
}

NetworkGraph load_graph(const std::filesystem::path& path) {
    return graph_from_json(nlohmann::json::parse(read_text(path)));
}

nlohmann::json to_json(const AnomalyScenario& s) {
    return {{"kind", to_string(s.kind)}, {"node", s.node},           {"onset", s.onset}, {"magnitude", s.magnitude},
            {"profile", to_string(s.profile)}, {"ramp", s.ramp}, {"window", s.window}};
}

AnomalyScenario scenario_from_json(const nlohmann::json& j) {
    AnomalyScenario s;
    s.kind = parse_anomaly_kind(j.at("kind").get<std::string>());
    s.node = j.at("node").get<std::string>();
    s.onset = j.at("onset").get<std::size_t>();
    s.magnitude = j.at("magnitude").get<double>();
    s.profile = parse_fault_profile(j.value("profile", std::string("offset")));
    s.ramp = j.value("ramp", std::size_t{0});
    s.window = j.value("window", std::size_t{0});
    return s;
}

nlohmann::json scenarios_to_json(const std::vector<AnomalyScenario>& scenarios) {
    auto arr = nlohmann::json::array();
    for (const auto& s : scenarios) arr.push_back(to_json(s));
    return arr;
}

std::vector<AnomalyScenario> scenarios_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("scenario file must hold a JSON list");
    std::vector<AnomalyScenario> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(scenario_from_json(j[i]));
        } catch (const std::exception& e) {
            throw std::invalid_argument("scenario " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace driftloc
