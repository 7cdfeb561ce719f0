#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace prl {

/// One experiment run. In runs.csv it becomes one row per metric; the JSON
/// mirror additionally carries the resolved config and provenance.
struct RunRecord {
  std::string run_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string method;
  bool pretrained = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::int64_t wall_ms = 0;
  std::string timestamp_utc;

  // JSON-only fields.
  std::string experiment;
  double point = 0.0;
  std::string config_text;
  std::map<std::string, std::string> provenance;
  std::vector<double> series;

  /// Value of a named metric; throws DataError when absent.
  double metric(const std::string& name) const;
  /// Throws DataError when a metric with a known range falls outside it.
  void validate() const;
};

inline constexpr const char* kRunsCsvHeader =
    "run_id,config_hash,seed,method,pretrained,metric_name,metric_value,wall_ms,timestamp_utc";

/// Appends the records to dir/runs.csv (writing the header for a new file)
/// and writes dir/runs/<run_id>.json for each.
void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& dir);

std::string records_to_csv_rows(const RunRecord& record);
/// Groups rows by run_id in order of first appearance.
std::vector<RunRecord> parse_runs_csv(const std::string& text);
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& text);
RunRecord read_record_json(const std::filesystem::path& path);

/// Current UTC time as 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace prl
