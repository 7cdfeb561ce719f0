#include "prl/records.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "prl/error.hpp"

namespace prl {
namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool bounded_unit(const std::string& name) {
  for (const char* key : {"error", "accuracy", "auroc", "aupr", "rms", "mad", "auc"}) {
    if (name.find(key) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_csv_safe(const std::string& field, const char* what) {
  if (field.find_first_of(",\n\r") != std::string::npos) {
    throw DataError(std::string("run record ") + what + " may not contain commas or newlines");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

double RunRecord::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw DataError("run " + run_id + " has no metric '" + name + "'");
}

void RunRecord::validate() const {
  for (const auto& [k, v] : metrics) {
    if (std::isnan(v)) continue;
    if (bounded_unit(k) && !(v >= 0.0 && v <= 1.0)) {
      throw DataError("metric " + k + " = " + fmt_double(v) + " outside [0, 1]");
    }
  }
}

std::string records_to_csv_rows(const RunRecord& r) {
  check_csv_safe(r.run_id, "run_id");
  check_csv_safe(r.config_hash, "config_hash");
  check_csv_safe(r.method, "method");
  check_csv_safe(r.timestamp_utc, "timestamp");
  std::string out;
  for (const auto& [name, value] : r.metrics) {
    check_csv_safe(name, "metric name");
    out += r.run_id + ',' + r.config_hash + ',' + std::to_string(r.seed) + ',' + r.method + ',' +
           (r.pretrained ? "1" : "0") + ',' + name + ',' + fmt_double(value) + ',' +
           std::to_string(r.wall_ms) + ',' + r.timestamp_utc + '\n';
  }
  return out;
}

std::vector<RunRecord> parse_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRunsCsvHeader) {
    throw DataError("runs.csv: missing or unexpected header");
  }
  std::vector<RunRecord> out;
  std::map<std::string, std::size_t> index;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) {
      throw DataError("runs.csv line " + std::to_string(lineno) + ": expected 9 fields");
    }
    try {
      auto [it, fresh] = index.try_emplace(cells[0], out.size());
      if (fresh) {
        RunRecord r;
        r.run_id = cells[0];
        r.config_hash = cells[1];
        r.seed = std::stoull(cells[2]);
        r.method = cells[3];
        r.pretrained = cells[4] == "1";
        r.wall_ms = std::stoll(cells[7]);
        r.timestamp_utc = cells[8];
        out.push_back(std::move(r));
      }
      out[it->second].metrics.emplace_back(cells[5], std::stod(cells[6]));
    } catch (const std::logic_error&) {
      throw DataError("runs.csv line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path) {
  try {
    return parse_runs_csv(read_text(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string record_to_json(const RunRecord& r) {
  json j;
  j["run_id"] = r.run_id;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["method"] = r.method;
  j["pretrained"] = r.pretrained;
  // Doubles are stored as %.17g strings so they survive any JSON reader.
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = fmt_double(v);
  j["metrics"] = metrics;
  j["metric_order"] = json::array();
  for (const auto& [k, v] : r.metrics) j["metric_order"].push_back(k);
  j["wall_ms"] = r.wall_ms;
  j["timestamp_utc"] = r.timestamp_utc;
  j["experiment"] = r.experiment;
  j["point"] = fmt_double(r.point);
  j["config"] = r.config_text;
  j["provenance"] = r.provenance;
  json series = json::array();
  for (double v : r.series) series.push_back(fmt_double(v));
  j["series"] = series;
  return j.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.method = j.at("method").get<std::string>();
    r.pretrained = j.at("pretrained").get<bool>();
    for (const auto& name : j.at("metric_order")) {
      const auto key = name.get<std::string>();
      r.metrics.emplace_back(key, std::stod(j.at("metrics").at(key).get<std::string>()));
    }
    r.wall_ms = j.at("wall_ms").get<std::int64_t>();
    r.timestamp_utc = j.at("timestamp_utc").get<std::string>();
    r.experiment = j.at("experiment").get<std::string>();
    r.point = std::stod(j.at("point").get<std::string>());
    r.config_text = j.at("config").get<std::string>();
    r.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    for (const auto& v : j.at("series")) r.series.push_back(std::stod(v.get<std::string>()));
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("run record JSON: ") + e.what());
  } catch (const std::logic_error&) {
    throw DataError("run record JSON: malformed number");
  }
}

RunRecord read_record_json(const std::filesystem::path& path) {
  try {
    return record_from_json(read_text(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "runs", ec);
  if (ec) throw DataError("cannot create " + (dir / "runs").string() + ": " + ec.message());

  const auto csv_path = dir / "runs.csv";
  const bool fresh = !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
  std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
  if (!csv) throw DataError("cannot open " + csv_path.string() + " for appending");
  if (fresh) csv << kRunsCsvHeader << '\n';
  for (const auto& r : records) {
    r.validate();
    csv << records_to_csv_rows(r);
    const auto json_path = dir / "runs" / (r.run_id + ".json");
    std::ofstream js(json_path, std::ios::binary | std::ios::trunc);
    if (!js) throw DataError("cannot write " + json_path.string());
    js << record_to_json(r);
    if (!js) throw DataError("write failed: " + json_path.string());
  }
  if (!csv) throw DataError("write failed: " + csv_path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace prl
