#include "kgsa/cli/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace kgsa::cli {

const char* to_string(RecordVerdict v) {
  switch (v) {
    case RecordVerdict::pass: return "pass";
    case RecordVerdict::fail: return "fail";
    case RecordVerdict::info: return "info";
  }
  return "?";
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Report::Report(std::string command, nlohmann::ordered_json config, unsigned long long seed)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed) {}

Record& Report::add(Record r) {
  records_.push_back(std::move(r));
  return records_.back();
}

void Report::fail(const std::string& name, const std::string& anchor, const std::string& message,
                  nlohmann::ordered_json outputs) {
  Record r;
  r.name = name;
  r.anchor = anchor;
  r.outputs = std::move(outputs);
  r.outputs["error"] = message;
  r.verdict = RecordVerdict::fail;
  add(std::move(r));
}

bool Report::passed() const {
  for (const Record& r : records_)
    if (r.verdict == RecordVerdict::fail) return false;
  return true;
}

nlohmann::ordered_json Report::to_json(bool include_timing) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "kgsa";
  j["tool_version"] = kToolVersion;
  j["command"] = command_;
  j["seed"] = seed_;
  j["config"] = config_;
  j["verdict"] = passed() ? "pass" : "fail";
  auto& recs = j["records"] = nlohmann::ordered_json::array();
  for (const Record& r : records_) {
    nlohmann::ordered_json rj;
    rj["name"] = r.name;
    rj["anchor"] = r.anchor;
    rj["inputs"] = r.inputs;
    rj["outputs"] = r.outputs;
    rj["residuals"] = r.residuals;
    rj["tolerance"] = r.tolerance ? nlohmann::ordered_json(*r.tolerance) : nlohmann::ordered_json();
    rj["verdict"] = to_string(r.verdict);
    recs.push_back(rj);
  }
  if (include_timing) {
    auto& t = j["timing"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : timing_) t[k] = v;
  }
  return j;
}

std::vector<std::string> Report::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const std::string json_path = (std::filesystem::path(dir) / (command_ + "_report.json")).string();
  {
    std::ofstream out(json_path);
    out << to_json().dump(2) << '\n';
  }
  paths.push_back(json_path);
  for (const auto& [file, table] : tables_) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    std::ofstream out(path);
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    paths.push_back(path);
  }
  for (const auto& [file, text] : attachments_) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    std::ofstream(path) << text;
    paths.push_back(path);
  }
  return paths;
}

}  // namespace kgsa::cli
