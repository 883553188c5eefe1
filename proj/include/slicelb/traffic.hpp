#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "slicelb/scenario.hpp"
#include "slicelb/types.hpp"

namespace slicelb {

struct Flow {
  UeId ue;
  std::size_t id = 0;  // per UE, in arrival order
  double size_bytes = 0.0;
  double start_ms = 0.0;
  double completion_ms = -1.0;  // -1 while open
  double remaining_bits = 0.0;
};

// Mean of a Pareto(shape, min) truncated to [min, max].
double bounded_pareto_mean(double shape, double min_value, double max_value);
double sample_bounded_pareto(double shape, double min_value, double max_value, std::mt19937_64& rng);

// Poisson flow arrivals over [0, duration_ms) for every UE whose slice runs web
// traffic; arrival rate = mean_rate_bps / (8 * mean flow size). Indexed by UE.
std::vector<std::vector<Flow>> generate_flows(const Network& network, const ScenarioConfig& config,
                                              std::mt19937_64& rng);

inline constexpr double kBacklogged = std::numeric_limits<double>::infinity();

struct ThroughputReport {
  std::vector<double> rbs;         // n_ij per slot
  std::vector<double> efficiency;  // e_ij at the serving cell
  std::vector<double> bits;        // delivered over the accounted slots
};

// Per cell, each slice's quota is split among its UEs there in proportion to effective
// weight (split_epsilon per slice), water-filling around UEs that owe fewer bits than
// their share. RBs a slice leaves unused go to the other slices at the cell: in
// proportion to quota among slices with backlogged UEs, otherwise in proportion to
// their unmet RB need. owed_bits uses kBacklogged for saturated UEs.
ThroughputReport account_throughput(const Network& network, const AllocationScheme& allocation,
                                    std::span<const double> split_epsilon, const UserDistribution& distribution,
                                    const ChannelState& channel, std::span<const double> owed_bits, double slots);

}  // namespace slicelb
