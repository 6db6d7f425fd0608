#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kgsa/cli/commands.hpp"
#include "kgsa/cli/config.hpp"

using namespace kgsa;
using namespace kgsa::cli;
namespace fs = std::filesystem;

namespace {

const char* kFlat = R"(
[spacetime]
family = minkowski

[chart]
lo = "0, 0, 0"
hi = "1, 1, 1"

[grid]
counts = "12, 12, 12"

[run]
seed = 3
)";

const char* kErgo = R"(
[spacetime]
family = kerr
M = 1
a = 0.9

[chart]
lo = "1.5, 0.3, 0"
hi = "6, 2.84, 6.28"
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kgsa_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& dir, const std::string& file, const std::string& text) {
  std::ofstream(dir / file) << text;
  return dir / file;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "kgsa");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const Record* find(const Report& r, const std::string& name) {
  for (const Record& rec : r.records())
    if (rec.name == name) return &rec;
  return nullptr;
}

}  // namespace

TEST_CASE("INI and JSON encodings give the same configuration") {
  const RunConfig ini = parse_config_text(kFlat, false);
  const RunConfig js = parse_config_text(ini.echo.dump(), true);
  CHECK(js.echo == ini.echo);
  CHECK(js.grid == std::array<int, 3>{12, 12, 12});
  CHECK(js.seed == 3);
}

TEST_CASE("schema violations are config errors") {
  CHECK_THROWS_AS(parse_config_text("[spacetime]\nfamily = minkowski\ncolour = 1\n", false), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonsense]\nx = 1\n", false), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[spacetime]\nfamily = kerr\nlapse = \"1\"\n", false), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[spacetime]\nfamily = static\nlapse = \"1 + q\"\n[chart]\nlo=\"0,0,0\"\nhi=\"1,1,1\"\n", false),
                  ConfigError);
  CHECK_THROWS_AS(parse_grid("16x16"), ConfigError);
  CHECK(parse_grid("8x16x32") == std::array<int, 3>{8, 16, 32});
}

TEST_CASE("unknown key: exit 2 and nothing written") {
  const fs::path dir = scratch("unknown");
  const fs::path cfg = write(dir, "bad.ini", std::string(kFlat) + "bogus = 1\n");
  CHECK(run({"spectrum", "--config", cfg.string(), "--out", (dir / "out").string()}) == kExitConfig);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("command line errors exit 2") {
  CHECK(run({"fly", "--config", "x.ini"}) == kExitConfig);
  CHECK(run({"check"}) == kExitConfig);
  CHECK(run({"check", "--config", "/nonexistent/file.ini"}) == kExitConfig);
}

TEST_CASE("flat spectrum: exit 0 and first eigenvalue near 3 pi^2") {
  const fs::path dir = scratch("flat");
  const fs::path cfg = write(dir, "flat.ini", kFlat);
  CHECK(run({"spectrum", "--config", cfg.string(), "--out", (dir / "out").string(), "--grid", "32x32x32"}) ==
        kExitPass);
  std::ifstream csv(dir / "out" / "eigenvalues.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "index,eigenvalue,residual");
  const double lambda = std::stod(row.substr(row.find(',') + 1));
  CHECK(std::abs(lambda - 3 * M_PI * M_PI) <= 0.02 * 3 * M_PI * M_PI);
  CHECK(fs::exists(dir / "out" / "spectrum_report.json"));
}

TEST_CASE("check on an ergoregion-crossing Kerr chart: exit 1 naming the violation") {
  const fs::path dir = scratch("ergo");
  const fs::path cfg = write(dir, "ergo.ini", kErgo);
  CHECK(run({"check", "--config", cfg.string(), "--out", (dir / "out").string()}) == kExitHypothesis);
  std::ifstream in(dir / "out" / "check_report.json");
  const auto j = nlohmann::ordered_json::parse(in);
  CHECK(j["verdict"] == "fail");
  bool named = false;
  for (const auto& r : j["records"])
    if (r["name"] == "timelike_killing" && r["verdict"] == "fail" && r["outputs"].contains("first_violation"))
      named = true;
  CHECK(named);
}

TEST_CASE("every record with a verdict carries its tolerance and anchor") {
  const RunConfig c = parse_config_text(kErgo, false);
  for (const std::string cmd : {"check", "certify"}) {
    const Report r = run_command(cmd, c);
    for (const Record& rec : r.records()) {
      CHECK_FALSE(rec.anchor.empty());
      if (rec.verdict != RecordVerdict::info) CHECK(rec.tolerance.has_value());
    }
  }
}

TEST_CASE("reports are deterministic apart from timing") {
  const RunConfig c = parse_config_text(kFlat, false);
  const Report a = run_command("certify", c);
  const Report b = run_command("certify", c);
  CHECK(a.to_json(false).dump() == b.to_json(false).dump());
  CHECK(a.to_json(false)["config"] == c.echo);
  CHECK(a.to_json(false)["schema_version"] == kSchemaVersion);
}

TEST_CASE("certify on a Kerr ergoregion chart locates a witness") {
  const Report r = run_command("certify", parse_config_text(kErgo, false));
  CHECK_FALSE(r.passed());
  const Record* cert = find(r, "sa_certificate");
  REQUIRE(cert);
  CHECK(cert->outputs["failed_hypothesis"] == "timelike_killing");
  CHECK(cert->outputs.contains("witness"));
}

TEST_CASE("exterior Kerr mode route passes kerr-mode and certify") {
  RunConfig c = parse_config_text(R"(
[spacetime]
family = kerr
M = 1
a = 0.5
[chart]
lo = "2.1, 0.3, 0"
hi = "8, 2.84, 6.283185307179586"
[mode]
k = 2
[grid]
ladder = "12, 24"
[run]
route = mode
points = 30
)",
                                  false);
  CHECK(run_command("kerr-mode", c).passed());
  CHECK(run_command("certify", c).passed());
  CHECK(run_command("complete", c).passed());
}

TEST_CASE("seed override changes the sampled points only") {
  RunConfig c = parse_config_text(kErgo, false);
  c.points = 20;
  const Report a = run_command("check", c);
  c.seed = 99;
  const Report b = run_command("check", c);
  CHECK(a.passed() == b.passed());
  CHECK(a.records().size() == b.records().size());
}
