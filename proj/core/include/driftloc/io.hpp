#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftloc/anomaly.hpp"
#include "driftloc/dynamics.hpp"
#include "driftloc/matrix.hpp"
#include "driftloc/network.hpp"

namespace driftloc {

/// Time series table with header `t,<ids...>`.
struct CsvSeries {
    std::vector<std::string> ids;
    std::vector<long long> t;
    Matrix values;
};

/// Values are printed with %.17g so a read reproduces them bit for bit.
void write_series_csv(std::ostream& os, const Matrix& values, const std::vector<std::string>& ids, std::size_t t0);
void write_series_csv(std::ostream& os, const SensorSeries& series);
void write_series_csv(std::ostream& os, const ObservableSeries& series, const NetworkGraph& g);

/// Throws std::runtime_error("malformed CSV ...") with a line number.
CsvSeries read_series_csv(std::istream& is);
CsvSeries read_series_csv(const std::filesystem::path& path);

/// Sensor series view of a CSV table (t0 taken from the first row).
SensorSeries to_sensor_series(const CsvSeries& csv);

nlohmann::json graph_to_json(const NetworkGraph& g);
NetworkGraph graph_from_json(const nlohmann::json& j);
NetworkGraph load_graph(const std::filesystem::path& path);

nlohmann::json to_json(const AnomalyScenario& s);
AnomalyScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenarios_to_json(const std::vector<AnomalyScenario>& scenarios);
std::vector<AnomalyScenario> scenarios_from_json(const nlohmann::json& j);

std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace driftloc
