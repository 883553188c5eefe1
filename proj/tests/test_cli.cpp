#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SLICELB_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "slicelb_cli_test.log";
  const std::string cmd = std::string(SLICELB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

// A shortened copy of the desk scenario written next to the test outputs.
fs::path short_config(const fs::path& dir, const std::string& name, double mismatch_share = 0.0) {
  auto j = nlohmann::json::parse(slurp(kConfigs / "desk_scenario1.json"));
  j["duration_ms"] = 2000;
  if (mismatch_share > 0.0) j["slices"][0]["quota_share"] = mismatch_share;
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST_CASE("run writes results and rejects bad configs") {
  const fs::path dir = fs::temp_directory_path() / "slicelb_cli_run";
  fs::remove_all(dir);
  const auto ok = run("run --config " + short_config(dir, "ok.json").string() + " --out " + (dir / "out").string());
  CHECK(ok.code == 0);
  for (const char* f : {"load_ratios.csv", "slice_metrics.csv", "handovers.csv", "fct.csv", "manifest.json"})
    CHECK(fs::exists(dir / "out" / f));
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.at("seed") == 1);

  const auto bad = run("run --config " + short_config(dir, "bad.json", 0.5).string() + " --out " + (dir / "x").string());
  CHECK(bad.code == 2);
  CHECK(bad.out.find("QuotaCapacityMismatch") != std::string::npos);

  auto j = nlohmann::json::parse(slurp(kConfigs / "desk_trace_driven.json"));
  j["channel"]["trace_manifest"] = (dir / "missing.csv").string();
  std::ofstream(dir / "trace.json") << j.dump();
  CHECK(run("run --config " + (dir / "trace.json").string() + " --out " + (dir / "y").string()).code == 2);
  CHECK(run("run --config " + (dir / "nope.json").string() + " --out " + (dir / "z").string()).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep produces one directory per run and a stable summary") {
  const fs::path dir = fs::temp_directory_path() / "slicelb_cli_sweep";
  fs::remove_all(dir);
  const std::string cfg = short_config(dir, "c.json").string();
  CHECK(run("sweep --config " + cfg + " --seeds 2 --schemes nolb,radioweaver --out " + (dir / "a").string()).code == 0);
  CHECK(run("sweep --config " + cfg + " --seeds 2 --schemes nolb,radioweaver --out " + (dir / "b").string()).code == 0);
  int runs = 0;
  for (const auto& seed : fs::directory_iterator(dir / "a"))
    if (seed.is_directory())
      for (const auto& scheme : fs::directory_iterator(seed.path())) runs += scheme.is_directory() ? 1 : 0;
  CHECK(runs == 4);
  const auto summary = slurp(dir / "a" / "summary.csv");
  CHECK(summary == slurp(dir / "b" / "summary.csv"));

  // nolb rows carry zero improvement.
  std::istringstream lines(summary);
  std::string header, line;
  std::getline(lines, header);
  int nolb_rows = 0;
  while (std::getline(lines, line)) {
    if (line.find(",nolb,") == std::string::npos) continue;
    ++nolb_rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() >= 12);
    CHECK(std::stod(cells[9]) == 0.0);
    CHECK(std::stod(cells[10]) == 0.0);
    CHECK(std::stod(cells[11]) == 0.0);
  }
  CHECK(nolb_rows == 2 * 8);

  CHECK(run("sweep --config " + cfg + " --seeds 1 --schemes bogus --out " + (dir / "c").string()).code == 2);
  CHECK(run("sweep --config " + cfg + " --seeds 0 --schemes nolb --out " + (dir / "c").string()).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("golden example and lemma verification") {
  const auto golden = run("golden-example");
  CHECK(golden.code == 0);
  CHECK(golden.out.find("radioweaver") != std::string::npos);

  CHECK(run("verify-lemmas --trials 20 --seed 3").code == 0);
  const auto buggy = run("verify-lemmas --trials 20 --inject-buggy-allocator");
  CHECK(buggy.code == 1);
  CHECK(buggy.out.find("counterexample") != std::string::npos);
  CHECK(run("verify-lemmas --trials 0").code == 2);
  CHECK(run("no-such-command").code == 2);
}
