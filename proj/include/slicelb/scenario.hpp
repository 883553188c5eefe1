#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "slicelb/baselines.hpp"
#include "slicelb/channel.hpp"

namespace slicelb {

// Where a group of UEs is dropped: inside small cell `small_index`'s coverage disc, or
// in the macro area outside every small-cell disc.
struct RegionSpec {
  enum class Kind { Macro, Small } kind = Kind::Macro;
  int small_index = 0;
  int min_users = 0;
  int max_users = 0;
  // Overrides the slice's priority_fraction for the UEs dropped here.
  std::optional<double> priority_fraction;
};

struct WorkloadSpec {
  enum class Kind { Backlogged, Web } kind = Kind::Backlogged;
  double mean_rate_bps = 3e6;
  double pareto_shape = 1.2;
  double min_flow_bytes = 50e3;
  double max_flow_bytes = 50e6;
};

struct SliceSpec {
  std::string name;
  std::optional<double> quota_share;  // fraction of total capacity
  std::optional<double> quota_rbs;    // absolute, per slot
  double epsilon = 1.0;
  std::vector<RegionSpec> regions;
  double priority_fraction = 0.0;  // share of the slice's UEs given priority_weight
  double priority_weight = 5.0;
  WorkloadSpec workload;
};

struct CellSpec {
  double tx_power_dbm = 0.0;
  double bandwidth_mhz = 0.0;
  int band_id = 0;
};

struct TopologySpec {
  TopologyMode mode = TopologyMode::MacroRelay;
  CellSpec macro{49.0, 100.0, 0};
  CellSpec small{35.0, 20.0, 1};
  int small_count = 4;
  double min_radius_m = 500.0;
  double max_radius_m = 700.0;
  double min_separation_m = 1000.0;
  double overlap_spacing_m = 500.0;
  double macro_region_radius_m = 1200.0;
  int max_placement_attempts = 10000;
};

struct ChannelSpec {
  ChannelMode mode = ChannelMode::Synthetic;
  PathLossModel path_loss;
  std::optional<std::filesystem::path> trace_manifest;  // resolved against the config file
  int synthetic_trace_count = 0;                        // used in trace mode without a manifest
  std::int64_t synthetic_trace_step_ms = 100;
};

struct MobilitySpec {
  double mobile_fraction = 0.0;
  double speed_mps = 8.0467;  // 18 mph
  double boundary_m = 5000.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::int64_t duration_ms = 20000;
  std::int64_t control_interval_ms = 500;
  std::int64_t accounting_step_ms = 10;  // sub-step for web-flow accounting
  double trigger_db = kDefaultTriggerDb;
  Scheme scheme = Scheme::TndBalance;
  double rbs_per_mhz = 5.0;  // RBs per 1 ms slot per MHz: 20 MHz -> 100, 100 MHz -> 500
  TopologySpec topology;
  ChannelSpec channel;
  MobilitySpec mobility;
  SchemeConfig algorithm;
  std::vector<SliceSpec> slices;
};

ScenarioConfig parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
// Throws Error(ConfigError) for unreadable or malformed files.
ScenarioConfig load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);

// Static checks that need no randomness. Each entry starts with a violation code name.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

// FNV-1a 64 over the canonical JSON form.
std::uint64_t config_hash(const ScenarioConfig& config);

}  // namespace slicelb
