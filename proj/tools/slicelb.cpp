#include <cstdint>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slicelb/golden.hpp"
#include "slicelb/sim.hpp"
#include "slicelb/sweep.hpp"
#include "slicelb/verify.hpp"

namespace {

using namespace slicelb;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Loads and validates; prints violations and returns false on failure.
bool load_valid(const std::string& path, ScenarioConfig& out) {
  try {
    out = load_scenario(path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return false;
  }
  const auto problems = validate_scenario(out);
  for (const auto& p : problems) std::cerr << p << "\n";
  return problems.empty();
}

std::vector<Scheme> parse_scheme_list(const std::string& list) {
  std::vector<Scheme> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto scheme = parse_scheme(item);
    if (!scheme) throw Error(ErrorCode::ConfigError, "unknown scheme '" + item + "'");
    out.push_back(*scheme);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "empty scheme list");
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ScenarioConfig config;
  if (!load_valid(config_path, config)) return kExitUsage;
  try {
    const auto metrics = run_experiment(config);
    write_results(metrics, config, out_dir);
    std::cout << "scheme " << scheme_name(config.scheme) << ", seed " << config.seed << ", " << metrics.invocations
              << " invocations, results in " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, int seeds, const std::string& schemes, const std::string& out_dir) {
  ScenarioConfig config;
  if (!load_valid(config_path, config)) return kExitUsage;
  std::vector<Scheme> list;
  try {
    list = parse_scheme_list(schemes);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const auto result = run_sweep(config, seeds, list, out_dir);
    std::cout << result.rows.size() << " summary rows written to " << out_dir << "/summary.csv\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_golden() {
  const auto checks = run_golden_checks();
  int failed = 0;
  std::cout << std::left << std::setw(12) << "scheme" << std::setw(44) << "quantity" << std::setw(14) << "expected"
            << std::setw(14) << "actual"
            << "ok\n";
  for (const auto& c : checks) {
    std::cout << std::setw(12) << c.scheme << std::setw(44) << c.quantity << std::setw(14) << c.expected
              << std::setw(14) << c.actual << (c.pass ? "yes" : "NO") << "\n";
    failed += c.pass ? 0 : 1;
  }
  if (failed > 0) {
    std::cerr << failed << " mismatched values:\n";
    for (const auto& c : checks) {
      if (!c.pass) std::cerr << "  " << c.scheme << " " << c.quantity << ": expected " << c.expected << ", got " << c.actual << "\n";
    }
    return kExitRuntime;
  }
  return 0;
}

int cmd_verify(int trials, std::uint64_t seed, bool buggy) {
  if (trials < 1) {
    std::cerr << "--trials must be at least 1\n";
    return kExitUsage;
  }
  VerifyOptions options;
  options.trials = trials;
  options.seed = seed;
  if (buggy) options.allocator = buggy_allocator;
  const auto report = run_verification(options);
  for (const auto& s : report.suites) {
    std::cout << std::left << std::setw(28) << s.name << s.trials << " trials, " << (s.passed ? "pass" : "FAIL") << "\n";
    if (!s.passed) std::cerr << "counterexample (" << s.name << "):\n" << s.counterexample << "\n";
  }
  return report.all_passed() ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice-aware load balancing simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Simulate one scenario and write CSV results");
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  int seeds = 1;
  std::string schemes;
  auto* sweep = app.add_subcommand("sweep", "Run every (seed, scheme) pair and summarize against NoLB");
  sweep->add_option("--config", config_path, "Scenario JSON")->required();
  sweep->add_option("--seeds", seeds, "Number of consecutive seeds from the config seed")->required();
  sweep->add_option("--schemes", schemes, "Comma-separated: radioweaver,nolb,naivelb,isolatedlb,mora,mora_pp")
      ->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  app.add_subcommand("golden-example", "Check the two-cell worked example");

  int trials = 100;
  std::uint64_t seed = 1;
  bool buggy = false;
  auto* verify = app.add_subcommand("verify-lemmas", "Randomized checks of the allocation and balancing properties");
  verify->add_option("--trials", trials, "Instances per suite");
  verify->add_option("--seed", seed, "Base seed");
  verify->add_flag("--inject-buggy-allocator", buggy, "Self-test: swap in a deliberately wrong allocator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (seeds < 1 && app.got_subcommand("sweep")) {
    std::cerr << "--seeds must be at least 1\n";
    return kExitUsage;
  }

  if (app.got_subcommand("run")) return cmd_run(config_path, out_dir);
  if (app.got_subcommand("sweep")) return cmd_sweep(config_path, seeds, schemes, out_dir);
  if (app.got_subcommand("golden-example")) return cmd_golden();
  return cmd_verify(trials, seed, buggy);
}
