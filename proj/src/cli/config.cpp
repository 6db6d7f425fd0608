#include "kgsa/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

namespace kgsa::cli {

namespace {

using json = nlohmann::ordered_json;

enum class Kind { number, integer, text, expression, list3, int_list3, int_list, flag, names3 };

const std::map<std::string, std::map<std::string, Kind>>& schema() {
  static const std::map<std::string, std::map<std::string, Kind>> s{
      {"spacetime",
       {{"family", Kind::text}, {"M", Kind::number}, {"a", Kind::number},
        {"variables", Kind::names3}, {"lapse", Kind::expression}, {"shift1", Kind::expression},
        {"shift2", Kind::expression}, {"shift3", Kind::expression}, {"g11", Kind::expression},
        {"g12", Kind::expression}, {"g13", Kind::expression}, {"g22", Kind::expression},
        {"g23", Kind::expression}, {"g33", Kind::expression}}},
      {"chart", {{"lo", Kind::list3}, {"hi", Kind::list3}}},
      {"potential", {{"m2", Kind::expression}}},
      {"mode", {{"k", Kind::integer}}},
      {"grid", {{"counts", Kind::int_list3}, {"samples", Kind::int_list3}, {"ladder", Kind::int_list}}},
      {"run",
       {{"seed", Kind::integer}, {"points", Kind::integer}, {"eigen_count", Kind::integer},
        {"route", Kind::text}, {"span", Kind::number}, {"export_matrix", Kind::flag}}},
      {"completion", {{"gamma", Kind::expression}}},
  };
  return s;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return s;
}

double to_number(const std::string& where, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) bad(where, "expected a number");
  const std::string s = trim(v.get<std::string>());
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(s, &used);
  } catch (const std::exception&) {
    bad(where, "expected a number, got '" + s + "'");
  }
  if (used != s.size()) bad(where, "expected a number, got '" + s + "'");
  return d;
}

long long to_integer(const std::string& where, const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_unsigned()) return static_cast<long long>(v.get<unsigned long long>());
  if (!v.is_string()) bad(where, "expected an integer");
  const std::string s = trim(v.get<std::string>());
  std::size_t used = 0;
  long long d = 0;
  try {
    d = std::stoll(s, &used);
  } catch (const std::exception&) {
    bad(where, "expected an integer, got '" + s + "'");
  }
  if (used != s.size()) bad(where, "expected an integer, got '" + s + "'");
  return d;
}

std::vector<json> to_items(const std::string& where, const json& v) {
  if (v.is_array()) return std::vector<json>(v.begin(), v.end());
  if (!v.is_string()) bad(where, "expected a list");
  std::vector<json> items;
  std::stringstream ss(trim(v.get<std::string>()));
  std::string item;
  while (std::getline(ss, item, ',')) items.emplace_back(trim(item));
  return items;
}

json coerce(const std::string& where, Kind kind, const json& v) {
  switch (kind) {
    case Kind::number: return to_number(where, v);
    case Kind::integer: return to_integer(where, v);
    case Kind::text:
      if (!v.is_string()) bad(where, "expected a string");
      return trim(v.get<std::string>());
    case Kind::expression:
      if (v.is_number()) return v.dump();
      if (!v.is_string()) bad(where, "expected an expression string");
      return trim(v.get<std::string>());
    case Kind::flag: {
      if (v.is_boolean()) return v;
      const std::string s = v.is_string() ? trim(v.get<std::string>()) : "";
      if (s == "true") return true;
      if (s == "false") return false;
      bad(where, "expected true or false");
    }
    case Kind::list3:
    case Kind::int_list3:
    case Kind::int_list:
    case Kind::names3: {
      const std::vector<json> items = to_items(where, v);
      if (kind != Kind::int_list && items.size() != 3) bad(where, "expected 3 entries");
      if (items.empty()) bad(where, "expected a non-empty list");
      json out = json::array();
      for (const json& item : items) {
        if (kind == Kind::list3)
          out.push_back(to_number(where, item));
        else if (kind == Kind::names3) {
          if (!item.is_string() || trim(item.get<std::string>()).empty()) bad(where, "expected names");
          out.push_back(trim(item.get<std::string>()));
        } else
          out.push_back(to_integer(where, item));
      }
      return out;
    }
  }
  bad(where, "unsupported value");
}

json validate(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be an object of sections");
  json out = json::object();
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) bad(section, "section must contain key = value pairs");
    json sec = json::object();
    if (section == "parameters") {
      for (const auto& [key, value] : body.items()) sec[key] = to_number("parameters." + key, value);
      out[section] = sec;
      continue;
    }
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body.items()) {
      const auto kt = it->second.find(key);
      if (kt == it->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      sec[key] = coerce(section + "." + key, kt->second, value);
    }
    out[section] = sec;
  }
  return out;
}

template <class T>
std::optional<T> opt(const json& doc, const char* section, const char* key) {
  if (!doc.contains(section) || !doc[section].contains(key)) return std::nullopt;
  return doc[section][key].get<T>();
}

}  // namespace

RunConfig config_from_json(const json& raw) {
  const json doc = validate(raw);
  RunConfig c;
  c.echo = doc;

  const auto family = opt<std::string>(doc, "spacetime", "family");
  if (!family) throw ConfigError("spacetime.family is required");
  SpacetimeSpec& st = c.spacetime;
  st.family = *family;
  const std::map<std::string, std::vector<std::string>> allowed{
      {"minkowski", {"family", "variables"}},
      {"schwarzschild", {"family", "variables", "M"}},
      {"kerr", {"family", "variables", "M", "a"}},
      {"static", {"family", "variables", "lapse", "g11", "g12", "g13", "g22", "g23", "g33"}},
      {"stationary",
       {"family", "variables", "lapse", "shift1", "shift2", "shift3", "g11", "g12", "g13", "g22",
        "g23", "g33"}},
  };
  const auto fam = allowed.find(st.family);
  if (fam == allowed.end())
    throw ConfigError("spacetime.family must be one of minkowski, schwarzschild, kerr, static, stationary");
  for (const auto& [key, value] : doc["spacetime"].items())
    if (std::find(fam->second.begin(), fam->second.end(), key) == fam->second.end())
      throw ConfigError("key '" + key + "' does not apply to family " + st.family);
  if (st.family == "kerr" || st.family == "schwarzschild") st.variables = {"r", "theta", "phi"};
  if (auto v = opt<std::vector<std::string>>(doc, "spacetime", "variables"))
    std::copy(v->begin(), v->end(), st.variables.begin());
  if (auto v = opt<double>(doc, "spacetime", "M")) st.M = *v;
  if (auto v = opt<double>(doc, "spacetime", "a")) st.a = *v;
  if (auto v = opt<std::string>(doc, "spacetime", "lapse")) st.lapse = *v;
  const char* shift_keys[3] = {"shift1", "shift2", "shift3"};
  for (int i = 0; i < 3; ++i)
    if (auto v = opt<std::string>(doc, "spacetime", shift_keys[i])) st.shift[i] = *v;
  const char* g_keys[6] = {"g11", "g12", "g13", "g22", "g23", "g33"};
  for (int i = 0; i < 6; ++i)
    if (auto v = opt<std::string>(doc, "spacetime", g_keys[i])) st.spatial[i] = *v;
  if (doc.contains("parameters"))
    for (const auto& [key, value] : doc["parameters"].items()) st.parameters[key] = value.get<double>();

  const auto lo = opt<std::vector<double>>(doc, "chart", "lo");
  const auto hi = opt<std::vector<double>>(doc, "chart", "hi");
  if (!lo || !hi) throw ConfigError("chart.lo and chart.hi are required");
  for (int a = 0; a < 3; ++a) {
    c.chart.lo[a] = (*lo)[a];
    c.chart.hi[a] = (*hi)[a];
    if (!(c.chart.hi[a] > c.chart.lo[a])) throw ConfigError("chart.hi must exceed chart.lo on every axis");
  }

  if (auto v = opt<std::string>(doc, "potential", "m2")) c.m2 = *v;
  if (auto v = opt<long long>(doc, "mode", "k")) c.k = static_cast<int>(*v);
  auto int3 = [](const std::vector<long long>& v, const char* what, int min) {
    std::array<int, 3> r{};
    for (int a = 0; a < 3; ++a) {
      if (v[a] < min || v[a] > 4096) throw ConfigError(std::string(what) + " entries out of range");
      r[a] = static_cast<int>(v[a]);
    }
    return r;
  };
  if (auto v = opt<std::vector<long long>>(doc, "grid", "counts")) c.grid = int3(*v, "grid.counts", 2);
  if (auto v = opt<std::vector<long long>>(doc, "grid", "samples")) c.samples = int3(*v, "grid.samples", 1);
  if (auto v = opt<std::vector<long long>>(doc, "grid", "ladder")) {
    c.ladder.clear();
    for (long long n : *v) {
      if (n < 2 || n > 4096) throw ConfigError("grid.ladder entries out of range");
      c.ladder.push_back(static_cast<int>(n));
    }
  }
  if (auto v = opt<long long>(doc, "run", "seed")) {
    if (*v < 0) throw ConfigError("run.seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = opt<long long>(doc, "run", "points")) {
    if (*v < 1 || *v > 1000000) throw ConfigError("run.points out of range");
    c.points = static_cast<int>(*v);
  }
  if (auto v = opt<long long>(doc, "run", "eigen_count")) {
    if (*v < 1 || *v > 20) throw ConfigError("run.eigen_count must be in [1, 20]");
    c.eigen_count = static_cast<int>(*v);
  }
  if (auto v = opt<std::string>(doc, "run", "route")) {
    if (*v != "metric" && *v != "mode") throw ConfigError("run.route must be metric or mode");
    c.route = *v;
  }
  if (auto v = opt<double>(doc, "run", "span")) {
    if (!(*v > 0.0)) throw ConfigError("run.span must be positive");
    c.span = *v;
  }
  if (auto v = opt<bool>(doc, "run", "export_matrix")) c.export_matrix = *v;
  if (auto v = opt<std::string>(doc, "completion", "gamma")) {
    c.gamma = *v;
    c.gamma_given = true;
  }

  // Parse every expression now so syntax errors surface as config errors.
  std::vector<std::string> sources{c.m2, st.lapse};
  if (st.family == "static" || st.family == "stationary") {
    sources.insert(sources.end(), st.shift.begin(), st.shift.end());
    sources.insert(sources.end(), st.spatial.begin(), st.spatial.end());
  }
  if (c.gamma_given) sources.push_back(c.gamma);
  for (const std::string& s : sources) (void)build_scalar(c, s);
  if (st.family == "kerr" || st.family == "schwarzschild") {
    try {
      KerrParams{st.M, st.family == "kerr" ? st.a : 0.0}.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return c;
}

RunConfig parse_config_text(const std::string& text, bool is_json) {
  if (is_json) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("JSON syntax: ") + e.what());
    }
    return config_from_json(doc);
  }
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("INI syntax, line " + std::to_string(e.line()) + ": " + e.message());
  }
  json doc = json::object();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' must appear inside a section");
    json sec = json::object();
    for (const auto& [key, value] : body) sec[key] = value.data();
    doc[section] = sec;
  }
  return config_from_json(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = (path.size() > 5 && path.substr(path.size() - 5) == ".json") ||
                       (first != std::string::npos && text[first] == '{');
  return parse_config_text(text, is_json);
}

std::array<int, 3> parse_grid(const std::string& text) {
  std::array<int, 3> g{};
  std::stringstream ss(text);
  std::string part;
  int n = 0;
  while (std::getline(ss, part, 'x')) {
    if (n == 3) throw ConfigError("--grid expects NxNxN");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      throw ConfigError("--grid expects NxNxN");
    }
    if (used != part.size() || v < 2 || v > 4096) throw ConfigError("--grid expects NxNxN with N in [2, 4096]");
    g[n++] = v;
  }
  if (n != 3) throw ConfigError("--grid expects NxNxN");
  return g;
}

ScalarField build_scalar(const RunConfig& config, const std::string& source) {
  std::vector<std::string> names;
  for (const auto& [name, value] : config.spacetime.parameters) names.push_back(name);
  try {
    const Expression e = Expression::parse(source, config.spacetime.variables, names);
    return ScalarField::from_expression(e, config.spacetime.parameters);
  } catch (const ParseError& e) {
    throw ConfigError("expression '" + source + "', line " + std::to_string(e.line()) + " column " +
                      std::to_string(e.column()) + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError("expression '" + source + "': " + e.what());
  }
}

Problem build_problem(const RunConfig& config) {
  const SpacetimeSpec& st = config.spacetime;
  const ScalarField m2 = build_scalar(config, config.m2);
  if (st.family == "minkowski") return {StationaryMetric::minkowski(config.chart), m2, std::nullopt};
  if (st.family == "kerr" || st.family == "schwarzschild") {
    const KerrParams kp{st.M, st.family == "kerr" ? st.a : 0.0};
    try {
      return {kerr_metric(kp, config.chart), m2, kp};
    } catch (const DegenerateError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  VectorField shift;
  for (int i = 0; i < 3; ++i) shift.components[i] = build_scalar(config, st.shift[i]);
  std::array<ScalarField, 6> g;
  for (int i = 0; i < 6; ++i) g[i] = build_scalar(config, st.spatial[i]);
  return {StationaryMetric(build_scalar(config, st.lapse), shift, SymMetricField::from_components(g),
                           config.chart),
          m2, std::nullopt};
}

std::string config_help() {
  return R"(Configuration (INI sections; JSON objects with the same names also accepted):
  [spacetime]  family = minkowski | schwarzschild | kerr | static | stationary
               M, a                    Kerr/Schwarzschild parameters
               variables = "x, y, z"   chart variable names (r, theta, phi for Kerr)
               lapse, shift1..3, g11 g12 g13 g22 g23 g33   expressions (static: no shift)
  [parameters] name = value            constants usable in expressions
  [chart]      lo = "x0, y0, z0"   hi = "x1, y1, z1"
  [potential]  m2 = "expression"       mass term; V = N^2 m2
  [mode]       k = integer             azimuthal number for kerr-mode and mode spectra
  [grid]       counts = "16, 16, 16"   intervals per axis for spectra
               samples = "9, 9, 9"     nodes per axis for sampled checks
               ladder = "8, 16"        refinement ladder for certify
  [run]        seed, points, eigen_count, route = metric | mode, span, export_matrix
  [completion] gamma = "expression"    proper function for the gamma completion
Expressions: + - * / ^ (right-associative), unary minus, sin cos exp log sqrt abs, pi.

CSV outputs:
  eigenvalues.csv   index,eigenvalue,residual
  divergence.csv    probe,epsilon,length
  geodesics.csv     run,affine,x1,x2,x3
  ritz.csv          n1,n2,n3,smallest,residual
  mode_compare.csv  r,theta,phi,conjugation,closed_form,difference,predicted
)";
}

}  // namespace kgsa::cli
