#include "trustfed/output.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "trustfed/config.hpp"
#include "trustfed/engine.hpp"

using namespace trustfed;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("trustfed-output-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SimConfig desk_config() {
  SimConfig config;
  config.topology.num_clients = 3;
  config.topology.num_byzantine = 1;
  config.task.dimension = 2;
  config.horizon = 5;
  config.realizations = 2;
  config.workers = 1;
  config.comparator.tolerance = 1e-4;
  return config;
}

// One small experiment shared by every test case below.
const ExperimentResult& desk_result() {
  static const ExperimentResult result = run_experiment(desk_config());
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> dir_entries(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_CASE("format lists parse strictly") {
  const OutputSelection all = parse_output_selection("csv,json,plot");
  CHECK(all.csv);
  CHECK(all.json);
  CHECK(all.plot);

  const OutputSelection one = parse_output_selection("json");
  CHECK_FALSE(one.csv);
  CHECK(one.json);
  CHECK_FALSE(one.plot);

  const OutputSelection two = parse_output_selection("plot,csv");
  CHECK(two.csv);
  CHECK_FALSE(two.json);
  CHECK(two.plot);

  CHECK_THROWS_AS(parse_output_selection("csv,svg"), std::invalid_argument);
  CHECK_THROWS_AS(parse_output_selection("csv,csv"), std::invalid_argument);
  CHECK_THROWS_AS(parse_output_selection(""), std::invalid_argument);
}

TEST_CASE("a csv-only emission writes exactly the manifest and the series") {
  TempDir dir("csv-only");
  OutputSelection selection;
  selection.json = false;
  selection.plot = false;

  const auto files =
      emit_outputs(desk_config(), desk_result(), dir.path, selection);
  CHECK(files == std::vector<std::string>{"manifest.json", "series.csv"});
  CHECK(dir_entries(dir.path) ==
        std::vector<std::string>{"manifest.json", "series.csv"});
}

TEST_CASE("the series csv has the pinned header and one row per round") {
  TempDir dir("csv-shape");
  emit_outputs(desk_config(), desk_result(), dir.path);

  std::ifstream in(dir.path / "series.csv");
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "round,timeavg_regret,timeavg_violation_mean,timeavg_violation_max,"
        "misclass_honest,misclass_byz");

  int rows = 0;
  while (std::getline(in, line)) {
    REQUIRE_FALSE(line.empty());
    CHECK(line.substr(0, line.find(',')) == std::to_string(rows + 1));
    ++rows;
  }
  CHECK(rows == desk_config().horizon);
}

TEST_CASE("emission is byte-for-byte reproducible") {
  TempDir first("emit-a");
  TempDir second("emit-b");
  const auto files_a = emit_outputs(desk_config(), desk_result(), first.path);
  const auto files_b = emit_outputs(desk_config(), desk_result(), second.path);
  REQUIRE(files_a == files_b);
  for (const std::string& name : files_a)
    CHECK(slurp(first.path / name) == slurp(second.path / name));
}

TEST_CASE("the manifest echoes a config that parses back unchanged") {
  TempDir dir("manifest");
  const SimConfig config = desk_config();
  emit_outputs(config, desk_result(), dir.path);

  const json manifest = json::parse(slurp(dir.path / "manifest.json"));
  CHECK(manifest.at("dialect") == "trustfed-config-v1");
  CHECK(config_from_json(manifest.at("config")) == config);
  CHECK(manifest.at("resolved").at("eta") == config.resolved_eta());
  CHECK(manifest.at("resolved").at("delta") == config.resolved_delta());
  CHECK(manifest.at("files") ==
        json({"manifest.json", "series.csv", "summary.json", "regret.svg",
              "violation.svg"}));
}

TEST_CASE("the summary carries finals, settling, bounds, and realizations") {
  TempDir dir("summary");
  emit_outputs(desk_config(), desk_result(), dir.path);

  const json summary = json::parse(slurp(dir.path / "summary.json"));
  const ExperimentResult& result = desk_result();
  CHECK(summary.at("final").at("timeavg_regret") ==
        result.mean.timeavg_regret.back());
  CHECK(summary.at("final").at("cumulative_violation_max") ==
        result.mean.cumulative_violation_max.back());
  CHECK(summary.at("settling").at("realizations") == 2);
  CHECK(summary.at("bounds").at("constants").at("clients") == 3);
  REQUIRE(summary.at("realizations").size() == 2);
  CHECK(summary.at("realizations")[0].at("realization") == 0);
  CHECK(summary.at("realizations")[1].at("comparator").at("objective") ==
        result.summaries[1].comparator_objective);
}

TEST_CASE("plots are svg documents") {
  TempDir dir("plots");
  emit_outputs(desk_config(), desk_result(), dir.path);
  for (const char* name : {"regret.svg", "violation.svg"}) {
    const std::string svg = slurp(dir.path / name);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}

TEST_CASE("an unwritable destination fails before anything is emitted") {
  TempDir dir("unwritable");
  std::ofstream(dir.path / "blocker") << "x";
  const fs::path target = dir.path / "blocker" / "out";
  CHECK_THROWS_AS(
      emit_outputs(desk_config(), desk_result(), target),
      std::runtime_error);
  CHECK_FALSE(fs::exists(target));
}

TEST_CASE("a comparison nests both runs and overlays the plots") {
  TempDir dir("compare");
  const auto files = emit_comparison(desk_config(), desk_result(),
                                     desk_config(), desk_result(), dir.path);

  REQUIRE(files.size() == 12);
  CHECK(files.front() == "proposed/manifest.json");
  CHECK(files[5] == "baseline/manifest.json");
  CHECK(files[10] == "compare_regret.svg");
  CHECK(files[11] == "compare_violation.svg");
  for (const std::string& name : files) CHECK(fs::exists(dir.path / name));

  const std::string overlay = slurp(dir.path / "compare_regret.svg");
  CHECK(overlay.find("proposed") != std::string::npos);
  CHECK(overlay.find("baseline") != std::string::npos);
}

TEST_CASE("a csv-only comparison skips the overlay charts") {
  TempDir dir("compare-csv");
  OutputSelection selection;
  selection.json = false;
  selection.plot = false;
  const auto files =
      emit_comparison(desk_config(), desk_result(), desk_config(),
                      desk_result(), dir.path, selection);
  CHECK(files == std::vector<std::string>{
                     "proposed/manifest.json", "proposed/series.csv",
                     "baseline/manifest.json", "baseline/series.csv"});
  CHECK_FALSE(fs::exists(dir.path / "compare_regret.svg"));
}
