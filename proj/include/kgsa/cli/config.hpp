#pragma once

// Run configuration: an INI file with sections and quoted expression
// strings, or the same schema encoded as JSON. Validation happens before
// anything is computed; unknown sections or keys are rejected.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsa/kerr.hpp"

namespace kgsa::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SpacetimeSpec {
  std::string family;  // minkowski, schwarzschild, kerr, static, stationary
  double M = 1.0;
  double a = 0.0;
  std::array<std::string, 3> variables{"x", "y", "z"};
  std::map<std::string, double> parameters;
  std::string lapse = "1";
  std::array<std::string, 3> shift{"0", "0", "0"};
  std::array<std::string, 6> spatial{"1", "0", "0", "1", "0", "1"};  // g11 g12 g13 g22 g23 g33
};

struct RunConfig {
  SpacetimeSpec spacetime;
  Box chart;
  std::string m2 = "0";
  int k = 0;
  std::array<int, 3> grid{16, 16, 16};
  std::array<int, 3> samples{9, 9, 9};
  std::vector<int> ladder{8, 16};
  std::uint64_t seed = 1;
  int points = 100;
  int eigen_count = 3;
  std::string route = "metric";  // certify: metric or mode
  double span = 100.0;
  bool export_matrix = false;
  bool gamma_given = false;
  std::string gamma;             // proper function for the gamma completion
  nlohmann::ordered_json echo;   // validated configuration as read
};

/// Reads INI (default) or JSON (".json" extension or content starting with
/// '{'); throws ConfigError on any schema violation.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, bool json);
RunConfig config_from_json(const nlohmann::ordered_json& doc);

/// Parses "NxNxN".
std::array<int, 3> parse_grid(const std::string& text);

/// Metric, potential and optional proper function built from the config.
struct Problem {
  StationaryMetric metric;
  ScalarField m2;
  std::optional<KerrParams> kerr;
};

Problem build_problem(const RunConfig& config);
ScalarField build_scalar(const RunConfig& config, const std::string& source);

/// Text for --help describing the configuration keys and CSV columns.
std::string config_help();

}  // namespace kgsa::cli
