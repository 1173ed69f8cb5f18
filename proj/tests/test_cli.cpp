#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbcov/commands.hpp"
#include "fbcov/config.hpp"
#include "fbcov/io.hpp"

using namespace fbcov;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fbcov_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

// Parses a CSV body (header skipped) into rows of fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("grid specifications") {
  CHECK(parse_grid("25:300:25").size() == 12);
  CHECK(parse_grid("25:300:25").back() == 300.0);
  CHECK(parse_grid("0.1:0.3:0.1").size() == 3);
  CHECK(parse_grid("1,2.5,7") == std::vector<double>{1, 2.5, 7});
  CHECK(parse_grid("200") == std::vector<double>{200});
  CHECK_THROWS_WITH(parse_grid("300:25:-25"), doctest::Contains("ascend"));
  CHECK_THROWS_WITH(parse_grid("300:25:25"), doctest::Contains("ascend"));
  CHECK_THROWS_AS(parse_grid("3,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("a,b"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
}

TEST_CASE("coverage writes one curve per method with a manifest") {
  const fs::path dir = scratch("coverage");
  const auto r = run({"coverage", "--method", "all", "--grid", "25:300:25", "--output", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* m : {"forward-closed", "feedback-exact", "feedback-gl", "feedback-closed"}) {
    CHECK(fs::exists(dir / (std::string("coverage_") + m + ".csv")));
  }
  const auto fwd = csv_rows(read_text_file(dir / "coverage_forward-closed.csv"));
  const auto fb = csv_rows(read_text_file(dir / "coverage_feedback-exact.csv"));
  REQUIRE(fwd.size() == 12);
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(std::stod(fwd[i][1]) <= std::stod(fb[i][1]));

  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(manifest["command"] == "coverage");
  CHECK(manifest["config_hash"] == config_hash(default_config()));
  CHECK(manifest.contains("timestamp"));
  for (const auto& p : manifest["outputs"]) CHECK(fs::exists(p.get<std::string>()));

  const auto j = nlohmann::json::parse(read_text_file(dir / "coverage_feedback-gl.json"));
  CHECK(j["manifest"]["command"] == "coverage");
  CHECK(j["points"].size() == 12);
}

TEST_CASE("coverage output is byte-identical across runs") {
  const fs::path a = scratch("repeat_a");
  const fs::path b = scratch("repeat_b");
  REQUIRE(run({"coverage", "--output", a.string()}).code == 0);
  REQUIRE(run({"coverage", "--output", b.string()}).code == 0);
  for (const char* f : {"coverage_feedback-exact.csv", "coverage_feedback-closed.json"}) {
    CHECK(read_text_file(a / f) == read_text_file(b / f));
  }
}

TEST_CASE("far-field guard is reported with exit code 1") {
  const auto r = run({"coverage", "--grid", "0.05", "--output", scratch("guard").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("far-field guard") != std::string::npos);
}

TEST_CASE("aps table") {
  const fs::path dir = scratch("aps");
  REQUIRE(run({"aps", "--mode", "both", "--output", dir.string()}).code == 0);
  const auto rows = csv_rows(read_text_file(dir / "aps.csv"));
  REQUIRE(rows.size() == 12);
  for (const auto& row : rows) CHECK(std::stod(row[3]) >= 1.0);

  // Doubling the density doubles every count.
  nlohmann::json doc = to_json(default_config());
  doc["ap_density_per_m2"] = 2.0 * default_config().ap_density;
  const fs::path cfg_path = scratch("aps_cfg") / "dense.json";
  write_text_file(cfg_path, doc.dump());
  const fs::path dense = scratch("aps_dense");
  REQUIRE(run({"aps", "--config", cfg_path.string(), "--output", dense.string()}).code == 0);
  const auto doubled = csv_rows(read_text_file(dense / "aps.csv"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::stod(doubled[i][1]) == doctest::Approx(2.0 * std::stod(rows[i][1])).epsilon(1e-14));
    CHECK(std::stod(doubled[i][2]) == doctest::Approx(2.0 * std::stod(rows[i][2])).epsilon(1e-14));
  }

  const auto desc = run({"aps", "--grid", "300:25:-25", "--output", scratch("desc").string()});
  CHECK(desc.code == 1);
  CHECK(desc.err.find("ascend") != std::string::npos);
}

TEST_CASE("validate passes in forward mode and is deterministic") {
  const fs::path a = scratch("validate_a");
  const fs::path b = scratch("validate_b");
  const auto r = run({"validate", "--trials", "100000", "--seed", "5", "--workers", "1",
                      "--output", a.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  REQUIRE(run({"validate", "--trials", "100000", "--seed", "5", "--workers", "3", "--output",
               b.string()})
              .code == 0);
  CHECK(read_text_file(a / "validate.csv") == read_text_file(b / "validate.csv"));
  CHECK(read_text_file(a / "validate.json") == read_text_file(b / "validate.json"));
  const auto j = nlohmann::json::parse(read_text_file(a / "validate.json"));
  CHECK(j["manifest"]["seed"] == 5);
  CHECK(j["summary"]["pass"] == true);
}

TEST_CASE("validate warns on an unresolvable budget and fails under --strict") {
  // Forward coverage at 210 m is about 4e-4.
  const auto loose = run({"validate", "--trials", "100", "--grid", "210", "--output",
                          scratch("budget").string()});
  CHECK(loose.code == 0);
  CHECK(loose.err.find("warning") != std::string::npos);
  const auto strict = run({"validate", "--trials", "100", "--grid", "210", "--strict",
                           "--output", scratch("budget_strict").string()});
  CHECK(strict.code == 2);
  CHECK(run({"validate", "--trials", "99", "--output", scratch("few").string()}).code == 1);
}

TEST_CASE("sensitivity verdicts") {
  const fs::path dir = scratch("sensitivity");
  const auto r = run({"sensitivity", "--output", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("step1_decreasing_in_a: pass") != std::string::npos);
  CHECK(r.out.find("step1_increasing_in_R: pass") != std::string::npos);
  for (const char* f : {"step1_error.csv", "step2_error.csv", "step3_error.csv", "mf_error.csv",
                        "verdicts.csv", "sensitivity.json", "manifest.json"}) {
    CHECK(fs::exists(dir / f));
  }

  const auto single = run({"sensitivity", "--a-grid", "4", "--grid", "150", "--pu-grid", "1",
                           "--output", scratch("single").string()});
  REQUIRE(single.code == 0);
  CHECK(single.out.find("insufficient axis length") != std::string::npos);

  nlohmann::json doc = to_json(default_config());
  doc["code"]["u"][0] = -0.025;
  const fs::path cfg_path = scratch("sens_cfg") / "weak.json";
  write_text_file(cfg_path, doc.dump());
  const auto weak = run({"sensitivity", "--config", cfg_path.string(), "--a-grid", "1:4:1",
                         "--grid", "100:200:50", "--pu-grid", "1", "--output",
                         scratch("weak").string()});
  REQUIRE(weak.code == 0);
  CHECK(weak.out.find("precondition b2_positive: violated") != std::string::npos);
  CHECK(weak.out.find("step1_decreasing_in_a: precondition unmet") != std::string::npos);
}

TEST_CASE("usage and config failures") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"coverage", "--bogus"}).code == 1);
  CHECK(run({"coverage", "--method", "nope", "--output", scratch("nope").string()}).code == 1);
  const auto missing = run({"aps", "--config", "/nonexistent.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("config error") != std::string::npos);

  nlohmann::json doc = to_json(default_config());
  doc["code"]["target_per"] = 0.0;
  const fs::path bad = scratch("bad_cfg") / "bad.json";
  write_text_file(bad, doc.dump());
  const auto r = run({"coverage", "--config", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("code.target_per") != std::string::npos);

  const auto show = run({"show-config"});
  CHECK(show.code == 0);
  CHECK(show.out.find(config_hash(default_config())) != std::string::npos);
}
