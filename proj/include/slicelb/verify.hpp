#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slicelb/quota.hpp"
#include "slicelb/types.hpp"

namespace slicelb {

// A self-contained allocation/balancing problem: network, channel and a distribution.
struct Instance {
  Network network;
  ChannelState channel;
  UserDistribution distribution;
};

// Capacities, quotas, epsilons, and per UE its slice, weight, efficiencies and serving cell.
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

using Allocator = std::function<AllocationScheme(const DemandState&, const Network&)>;

// Deliberately wrong: the static split with one 2x2 quota exchange pushed away from
// demand. Sums still hold, so only the isolation checks can catch it.
AllocationScheme buggy_allocator(const DemandState& demand, const Network& network);

struct SuiteReport {
  std::string name;
  int trials = 0;   // instances generated
  int checked = 0;  // instances the property applied to
  bool passed = true;
  double worst = 0.0;          // largest violation margin seen (<= 0 is fine)
  std::string counterexample;  // JSON of the first failing instance
};

struct VerifyReport {
  std::vector<SuiteReport> suites;
  bool all_passed() const;
};

// Per slice, no quota split on a 1%-of-Q_i grid scores above the split Q_ik = D_ik,
// and for epsilon in {0, 1} that split scores the closed-form maximum.
SuiteReport verify_quota_optimality(int trials, std::uint64_t seed);

// Instances whose capacities match the TND of some reachable distribution. Whenever
// the engine reports convergence, Q_ik = D_ik is feasible, the allocator grants it
// exactly, and each slice scores its closed-form maximum. `trials` converged runs are
// required.
SuiteReport verify_complementary_runs(int trials, std::uint64_t seed, const Allocator& allocator = {});

// Instances with efficiency ties whose best-cell attachment is already balanced: the
// engine makes no moves, and no other quality-optimal distribution (enumerated) gives
// any slice a higher score under the allocator's quotas.
SuiteReport verify_quality_optimal(int trials, std::uint64_t seed, const Allocator& allocator = {});

// Random demand states: both quota sums hold, no Q_ik drifts further from D_ik than
// the static split, and no slice scores below its static-split score.
SuiteReport verify_swap_isolation(int trials, std::uint64_t seed, const Allocator& allocator = {});

struct VerifyOptions {
  int trials = 100;
  std::uint64_t seed = 1;
  Allocator allocator;  // empty: allocate()
  int swap_trials_factor = 5;
};

VerifyReport run_verification(const VerifyOptions& options);

}  // namespace slicelb
