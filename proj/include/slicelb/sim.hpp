#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slicelb/baselines.hpp"
#include "slicelb/scenario.hpp"
#include "slicelb/traffic.hpp"

namespace slicelb {

// True iff some UE's serving-cell quality moved by more than trigger_db, or the UE
// set changed. Non-finite readings (lost coverage) always count as a change.
bool should_invoke(std::span<const double> quality_now_db, std::span<const double> quality_at_last_db,
                   double trigger_db = kDefaultTriggerDb);

struct LoadSample {
  int invocation = 0;
  std::int64_t time_ms = 0;
  CellId cell;
  double load_ratio = 0.0;  // TND / capacity of the scheme's distribution
};

struct UeMetrics {
  UeId ue;
  SliceId slice;
  double weight = 1.0;
  bool is_mobile = false;
  int handovers = 0;
  double bits = 0.0;
  double mean_mbps = 0.0;
};

struct SliceMetrics {
  SliceId slice;
  std::string name;
  double epsilon = 1.0;
  double weighted_pf_metric = 0.0;  // sum of w ln(mean Mbps)
  double p10_throughput_mbps = 0.0;
  double mean_throughput_mbps = 0.0;
  double median_fct_ms = -1.0;  // -1 when no flow completed
};

struct MetricsBundle {
  std::vector<LoadSample> load_ratios;
  std::vector<SliceMetrics> slices;
  std::vector<UeMetrics> ues;
  std::vector<Flow> flows;
  int invocations = 0;
};

// Mean rates below this floor are clamped before taking logs.
inline constexpr double kMinRateMbps = 1e-6;

// Linear interpolation between order statistics.
double percentile(std::vector<double> values, double fraction);

struct SimOptions {
  std::int64_t duration_ms = 20000;
  std::int64_t control_interval_ms = 500;
  std::int64_t accounting_step_ms = 10;
  double trigger_db = kDefaultTriggerDb;
  Scheme scheme = Scheme::TndBalance;
  SchemeConfig scheme_config;
};

struct SimInputs {
  Network network;
  // Channel at time t for the current UE positions.
  std::function<ChannelState(std::int64_t t_ms, const Network& network)> channel;
  // Advances UE positions by dt seconds; may be empty for static worlds.
  std::function<void(Network& network, double dt_s)> move;
  // Per UE; UEs of backlogged slices have none.
  std::vector<std::vector<Flow>> flows;
  std::vector<bool> backlogged_slice;
};

// Time loop at control_interval_ms: mobility, channel, trigger check, scheme,
// physical-handover diff, throughput accounting. UEs first attach to their best cell;
// the first interval always invokes the scheme.
MetricsBundle simulate(SimInputs inputs, const SimOptions& options);

SimOptions sim_options(const ScenarioConfig& config);

// Builds the world for config.seed and simulates config.scheme.
MetricsBundle run_experiment(const ScenarioConfig& config);

// load_ratios.csv, slice_metrics.csv, handovers.csv, fct.csv and manifest.json.
void write_results(const MetricsBundle& metrics, const ScenarioConfig& config, const std::filesystem::path& out_dir);

// Fraction of load-ratio samples inside [low, high].
double load_ratio_fraction_within(const MetricsBundle& metrics, double low, double high);

}  // namespace slicelb
