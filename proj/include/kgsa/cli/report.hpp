#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kgsa::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum class RecordVerdict { pass, fail, info };
const char* to_string(RecordVerdict v);

struct Record {
  std::string name;
  std::string anchor;  // the formula or statement being checked
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json residuals = nlohmann::ordered_json::object();
  std::optional<double> tolerance;
  RecordVerdict verdict = RecordVerdict::info;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_number(double v);

class Report {
 public:
  Report(std::string command, nlohmann::ordered_json config, unsigned long long seed);

  Record& add(Record r);
  void fail(const std::string& name, const std::string& anchor, const std::string& message,
            nlohmann::ordered_json outputs = nlohmann::ordered_json::object());
  void time(const std::string& key, double seconds) { timing_[key] = seconds; }
  CsvTable& table(const std::string& file) { return tables_[file]; }
  /// Extra output file written verbatim next to the report.
  void attach(const std::string& file, std::string text) { attachments_[file] = std::move(text); }

  bool passed() const;
  const std::vector<Record>& records() const { return records_; }
  const std::map<std::string, CsvTable>& tables() const { return tables_; }

  /// Everything except the "timing" key is deterministic for a fixed config
  /// and seed.
  nlohmann::ordered_json to_json(bool include_timing = true) const;
  /// Writes <dir>/<command>_report.json and each CSV table; returns the
  /// written paths.
  std::vector<std::string> write(const std::string& dir) const;

 private:
  std::string command_;
  nlohmann::ordered_json config_;
  unsigned long long seed_;
  std::vector<Record> records_;
  std::map<std::string, double> timing_;
  std::map<std::string, CsvTable> tables_;
  std::map<std::string, std::string> attachments_;
};

}  // namespace kgsa::cli
