#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "collapse/ensemble.hpp"

namespace collapse::cli {

using Json = nlohmann::json;

/// Header attached to every output file.
Json metadata(const std::string& command, std::uint64_t seed, double dt, const Json& thresholds);

/// %.17g, which round-trips every finite double; NaN prints as "nan".
std::string format_number(double x);

/// JSON value for a double; NaN and infinities become null.
Json number(double x);
double number_from(const Json& v);

void write_json(const std::string& path, const Json& doc);
Json read_json(const std::string& path);

/// Numeric table: first line "# <metadata as compact JSON>", then a header row
/// and one row per sample.
struct Table {
  Json metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);

/// String table, same layout, for mixed-type reports.
void write_text_csv(const std::string& path, const Json& meta, const std::vector<std::string>& columns,
                    const std::vector<std::vector<std::string>>& rows);

Json to_json(const BornTestResult& r);
BornTestResult born_result_from_json(const Json& j);

Json to_json(const SeriesStats& s);
Json to_json(const EnsembleStats& s);
SeriesStats series_from_json(const Json& j);
/// Inverse of to_json(EnsembleStats) for the fields it writes (no densities or samples).
EnsembleStats ensemble_stats_from_json(const Json& j);

}  // namespace collapse::cli
