#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slicelb/sim.hpp"

namespace slicelb {

struct SweepRow {
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::NoLB;
  SliceMetrics slice;
  // Gain in the slice's weighted geometric-mean rate, exp(dPF / sum w) - 1, in percent.
  double pf_improvement_pct = 0.0;
  double p10_improvement_pct = 0.0;
  double fct_improvement_pct = 0.0;  // reduction of median FCT; 0 without flows
  double handovers_per_static_ue = 0.0;
  double handovers_per_mobile_ue = 0.0;
  double load_ratio_within_10pct = 0.0;  // run-wide fraction of samples in [0.9, 1.1]
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by seed, scheme order as requested, slice id
};

// Thread count from SLICELB_THREADS, else hardware concurrency (at least 1).
unsigned sweep_threads();

// Runs every (seed, scheme) pair for seeds config.seed .. config.seed + seeds - 1.
// With out_dir set, each run is written to out_dir/seed_<s>/<scheme>/ and the rows to
// out_dir/summary.csv. NoLB is always simulated as the reference, but only written when
// requested.
SweepResult run_sweep(const ScenarioConfig& config, int seeds, const std::vector<Scheme>& schemes,
                      const std::filesystem::path& out_dir = {}, unsigned threads = 0);

void write_summary(const SweepResult& result, const std::filesystem::path& path);

}  // namespace slicelb
