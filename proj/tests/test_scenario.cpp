#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "slicelb/scenario.hpp"
#include "slicelb/sweep.hpp"
#include "slicelb/verify.hpp"

using namespace slicelb;

namespace {

nlohmann::json tiny() {
  return nlohmann::json::parse(R"({
    "seed": 2, "duration_ms": 2000, "control_interval_ms": 500,
    "topology": {"small_count": 2, "min_separation_m": 800, "macro_region_radius_m": 850},
    "channel": {"macro_noise_rise_db": 14.0},
    "mobility": {"mobile_fraction": 0.5},
    "slices": [
      {"name": "a", "quota_share": 0.6, "epsilon": 1.0,
       "users": [{"region": "small:0", "users": [2, 3], "priority_fraction": 0.5}, {"region": "macro", "users": [1, 2]}]},
      {"name": "b", "quota_share": 0.4, "epsilon": 0.0,
       "users": [{"region": "small:1", "users": [2, 3]}, {"region": "macro", "users": [1, 2]}]}
    ]
  })");
}

bool mentions(const std::vector<std::string>& problems, const std::string& code) {
  for (const auto& p : problems)
    if (p.rfind(code, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  const auto c = parse_scenario(tiny());
  CHECK(validate_scenario(c).empty());
  const auto again = parse_scenario(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  auto other = c;
  other.seed = 3;
  CHECK(config_hash(other) != config_hash(c));
  CHECK(c.slices[0].regions[0].priority_fraction == 0.5);
  CHECK_FALSE(c.slices[0].regions[1].priority_fraction.has_value());
}

TEST_CASE("config validation") {
  auto j = tiny();
  j["slices"][0]["quota_share"] = 0.9;
  CHECK(mentions(validate_scenario(parse_scenario(j)), "QuotaCapacityMismatch"));

  j = tiny();
  j["slices"][1]["epsilon"] = 2.0;
  CHECK(mentions(validate_scenario(parse_scenario(j)), "EpsilonOutOfRange"));

  j = tiny();
  j["slices"][0]["users"][0]["priority_fraction"] = 1.5;
  CHECK(mentions(validate_scenario(parse_scenario(j)), "ConfigError"));

  j = tiny();
  j["channel"]["mode"] = "trace";
  j["channel"]["trace_manifest"] = "/nonexistent/manifest.csv";
  CHECK(mentions(validate_scenario(parse_scenario(j)), "MissingTraceManifest"));

  j = tiny();
  j["slices"][0]["users"][0]["region"] = "small:7";
  CHECK(mentions(validate_scenario(parse_scenario(j)), "ConfigError"));

  CHECK_THROWS_AS(parse_scenario(nlohmann::json::parse(R"({"scheme": "nope", "slices": []})")), Error);
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), Error);
}

TEST_CASE("sweep compares against nolb and is repeatable") {
  const auto config = parse_scenario(tiny());
  const auto dir = std::filesystem::temp_directory_path() / "slicelb_sweep_test";
  std::filesystem::remove_all(dir);
  const auto a = run_sweep(config, 2, {Scheme::NoLB, Scheme::TndBalance}, dir / "a", 2);
  const auto b = run_sweep(config, 2, {Scheme::NoLB, Scheme::TndBalance}, dir / "b", 1);
  CHECK(a.rows.size() == 2 * 2 * 2);
  std::set<std::uint64_t> seeds;
  for (const auto& r : a.rows) {
    seeds.insert(r.seed);
    if (r.scheme == Scheme::NoLB) {
      CHECK(r.pf_improvement_pct == 0.0);
      CHECK(r.p10_improvement_pct == 0.0);
      CHECK(r.fct_improvement_pct == 0.0);
    }
  }
  CHECK(seeds == std::set<std::uint64_t>{2, 3});
  for (int s = 2; s <= 3; ++s)
    for (const char* scheme : {"nolb", "radioweaver"})
      CHECK(std::filesystem::exists(dir / "a" / ("seed_" + std::to_string(s)) / scheme / "manifest.json"));
  std::ifstream fa(dir / "a" / "summary.csv"), fb(dir / "b" / "summary.csv");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK_FALSE(sa.empty());
  CHECK(sa == sb);
  std::filesystem::remove_all(dir);
}

TEST_CASE("verification suites pass and catch a wrong allocator") {
  const auto quota = verify_quota_optimality(20, 5);
  CHECK(quota.passed);
  CHECK(quota.checked > 0);
  const auto comp = verify_complementary_runs(10, 5);
  CHECK(comp.passed);
  CHECK(comp.checked == 10);
  CHECK(verify_quality_optimal(10, 5).passed);
  CHECK(verify_swap_isolation(50, 5).passed);

  const auto bad = verify_swap_isolation(50, 5, buggy_allocator);
  CHECK_FALSE(bad.passed);
  REQUIRE_FALSE(bad.counterexample.empty());
  // The counterexample replays.
  auto dumped = nlohmann::json::parse(bad.counterexample);
  CHECK(dumped.contains("failure"));
  dumped.erase("failure");
  const auto inst = instance_from_json(dumped);
  CHECK(inst.network.ues.size() == inst.distribution.size());
  CHECK(instance_to_json(inst) == dumped);
}
