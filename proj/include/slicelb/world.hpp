#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "slicelb/channel.hpp"
#include "slicelb/scenario.hpp"

namespace slicelb {

// Independent random streams so that every scheme sees the same world for a seed.
enum class Stream : std::uint32_t { Topology = 1, Placement, Shadowing, Mobility, Workload, Traces };

std::uint64_t stream_seed(std::uint64_t seed, Stream stream);
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream);

// Macro cell (if any) at the origin with id 0, then small cells. Macro-relay mode
// samples small cells within [min_radius_m, max_radius_m] of the macro and at least
// min_separation_m apart, redrawing whole layouts (PlacementInfeasible after
// max_placement_attempts); overlapping mode puts them on a line at overlap_spacing_m.
std::vector<Cell> generate_topology(const ScenarioConfig& config, std::mt19937_64& rng);

struct UserPlan {
  SliceId slice;
  RegionSpec region;
  double weight = 1.0;
};

// UE count per (slice, region) drawn uniformly from its range; a priority_fraction
// share of each slice (rounded) gets priority_weight. UEs are numbered slice by slice.
std::vector<UserPlan> plan_users(const ScenarioConfig& config, std::mt19937_64& rng);

// Uniform positions in the region: a small cell's coverage disc, or the macro area
// (radius macro_region_radius_m) outside every small-cell disc. Positions are redrawn
// until the UE is covered by some cell (shadowing included).
Network place_users(const ScenarioConfig& config, const std::vector<Cell>& cells, const std::vector<UserPlan>& plan,
                    const ChannelModel& channel, std::mt19937_64& rng);

// Picks round(mobile_fraction * N) mobile UEs and gives each a uniform heading.
void assign_mobility(Network& network, const MobilitySpec& spec, std::mt19937_64& rng);

// Advances mobile UEs by velocity * dt. A step that would leave coverage is undone and
// the heading redrawn; the square boundary [-b, b]^2 reflects.
class MobilityModel {
 public:
  MobilityModel(MobilitySpec spec, std::uint64_t seed) : spec_(spec), rng_(make_rng(seed, Stream::Mobility)) {}
  MobilityModel(MobilitySpec spec, std::mt19937_64 rng) : spec_(spec), rng_(std::move(rng)) {}

  void step(Network& network, double dt_s, const ChannelModel& coverage);

 private:
  MobilitySpec spec_;
  std::mt19937_64 rng_;
};

struct World {
  Network network;
  ChannelModel channel;
  MobilityModel mobility;
};

// Topology, users, shadowing, traces and mobility for config.seed.
World build_world(const ScenarioConfig& config);

}  // namespace slicelb
