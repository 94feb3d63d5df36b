#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "collapse/cli.hpp"
#include "config.hpp"

namespace collapse::cli {

Json metadata(const std::string& command, std::uint64_t seed, double dt, const Json& thresholds) {
  return {{"command", command}, {"version", kVersion}, {"schema_version", kSchemaVersion},
          {"seed", seed},       {"dt", number(dt)},    {"thresholds", thresholds}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_from(const Json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

void write_json(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot write '" + path + "'", "output");
  out << doc.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot read '" + path + "'");
  return Json::parse(in);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot write '" + path + "'", "output");
  out << "# " << table.metadata.dump() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot read '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw Error(ErrorKind::invalid_argument, "'" + path + "' has no metadata line");
  }
  t.metadata = Json::parse(line.substr(2));
  if (!std::getline(in, line)) throw Error(ErrorKind::invalid_argument, "'" + path + "' has no header");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw Error(ErrorKind::invalid_argument, "ragged row in '" + path + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_text_csv(const std::string& path, const Json& meta, const std::vector<std::string>& columns,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot write '" + path + "'", "output");
  out << "# " << meta.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

Json to_json(const BornTestResult& r) {
  Json z = Json::object(), observed = Json::object();
  for (const auto& [k, v] : r.z_scores) z[k] = number(v);
  for (const auto& [k, v] : r.observed) observed[k] = number(v);
  return {{"n", r.n},         {"observed", observed},   {"z_scores", z},
          {"chi_square", number(r.chi_square)}, {"dof", r.dof}, {"p_value", number(r.p_value)},
          {"pass", r.pass},   {"diagnostic", r.diagnostic}};
}

BornTestResult born_result_from_json(const Json& j) {
  BornTestResult r;
  r.n = j.at("n").get<std::size_t>();
  for (const auto& [k, v] : j.at("observed").items()) r.observed[k] = number_from(v);
  for (const auto& [k, v] : j.at("z_scores").items()) r.z_scores[k] = number_from(v);
  r.chi_square = number_from(j.at("chi_square"));
  r.dof = j.at("dof").get<int>();
  r.p_value = number_from(j.at("p_value"));
  r.pass = j.at("pass").get<bool>();
  r.diagnostic = j.at("diagnostic").get<std::string>();
  return r;
}

Json to_json(const SeriesStats& s) {
  Json mean = Json::array(), se = Json::array();
  for (double x : s.mean) mean.push_back(number(x));
  for (double x : s.std_error) se.push_back(number(x));
  return {{"mean", mean}, {"std_error", se}};
}

Json to_json(const EnsembleStats& s) {
  Json series = Json::object();
  for (const auto& [name, st] : s.mean_series) series[name] = to_json(st);
  Json times = Json::array();
  for (double t : s.times) times.push_back(number(t));
  return {{"n_traj", s.n_traj},
          {"unresolved", s.unresolved},
          {"failed", s.failed},
          {"outcome_counts", s.outcome_counts},
          {"times", times},
          {"mean_series", series},
          {"failure_messages", s.failure_messages}};
}

SeriesStats series_from_json(const Json& j) {
  SeriesStats s;
  for (const auto& v : j.at("mean")) s.mean.push_back(number_from(v));
  for (const auto& v : j.at("std_error")) s.std_error.push_back(number_from(v));
  return s;
}

EnsembleStats ensemble_stats_from_json(const Json& j) {
  EnsembleStats s;
  s.n_traj = j.at("n_traj").get<std::size_t>();
  s.unresolved = j.at("unresolved").get<std::size_t>();
  s.failed = j.at("failed").get<std::size_t>();
  s.outcome_counts = j.at("outcome_counts").get<std::map<std::string, std::size_t>>();
  for (const auto& t : j.at("times")) s.times.push_back(number_from(t));
  for (const auto& [name, st] : j.at("mean_series").items()) s.mean_series[name] = series_from_json(st);
  s.failure_messages = j.at("failure_messages").get<std::vector<std::string>>();
  return s;
}

}  // namespace collapse::cli
