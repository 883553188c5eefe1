#pragma once

#include <optional>
#include <vector>

#include "slicelb/demand.hpp"
#include "slicelb/types.hpp"

namespace slicelb {

enum class TopologyMode { MacroRelay, Overlapping };

struct LbConfig {
  double alpha = 0.8;  // amenability threshold on e_target / e_source
  int max_rounds = 10;
  double load_eq_tolerance = 1e-6;  // on load ratios
  TopologyMode topology_mode = TopologyMode::MacroRelay;
  bool slice_specific_phase = true;
};

enum class Phase { Amenable = 1, SliceSpecific = 2 };

struct LogicalMove {
  UeId ue;
  CellId from;
  CellId to;
  Phase phase;
  int round;
  int step;  // 1 = towards the macrocell, 2 = away from it; 0 in overlapping mode

  friend bool operator==(const LogicalMove&, const LogicalMove&) = default;
};

struct LbResult {
  UserDistribution distribution;
  DemandState demand;
  std::vector<LogicalMove> logical_moves;
  bool converged = false;
  int rounds = 0;
};

// Serving cells and channel as seen by the previous invocation.
struct PreviousInvocation {
  UserDistribution distribution;
  ChannelState channel;
};

inline constexpr double kDefaultTriggerDb = 3.0;

// UEs whose previous serving cell still covers them and whose quality from it moved by
// at most trigger_db keep that cell; everyone else starts at the best cell.
UserDistribution initialize_distribution(const std::optional<PreviousInvocation>& previous,
                                         const ChannelState& channel, double trigger_db = kDefaultTriggerDb);

bool amenable(UeId ue, CellId from, CellId to, const ChannelState& channel, double alpha);

// The notion of load the handover machinery equalizes. Implementations keep their
// state in sync with the distribution they are given through reset / on_move.
class LoadModel {
 public:
  virtual ~LoadModel() = default;

  virtual void reset(const UserDistribution& distribution) = 0;
  virtual double ratio(CellId cell) const = 0;
  // distribution already reflects the move.
  virtual void on_move(UeId ue, CellId from, CellId to, const UserDistribution& distribution) = 0;
  virtual bool movable(UeId) const { return true; }
  // Whether moving ue from -> to strictly improves its slice's objective. The
  // distribution is handed over for tentative edits and must be restored.
  virtual bool improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) = 0;
};

// Load as total normalized demand over capacity. The slice-specific check scores
// the slice under quotas D_ik * min(1, R_k / L_k).
class TndLoadModel final : public LoadModel {
 public:
  TndLoadModel(const Network& network, const ChannelState& channel);

  void reset(const UserDistribution& distribution) override;
  double ratio(CellId cell) const override { return demand_.load_ratio(cell); }
  void on_move(UeId ue, CellId from, CellId to, const UserDistribution& distribution) override;
  bool improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) override;

  const DemandState& demand() const { return demand_; }

 private:
  void rebuild();
  double capacity_scaled_score(SliceId slice, const UserDistribution& distribution) const;

  const Network& network_;
  const ChannelState& channel_;
  std::vector<double> ue_weight_;  // effective weight at the current serving cell
  std::vector<CellId> serving_;
  std::vector<double> mass_;
  DemandState demand_;
};

enum class StopReason { AlreadyBalanced, LoadDriven, ChannelDriven };

enum class PhaseSet { Both, AmenableOnly, SliceSpecificOnly };

// Shared multi-round machinery; the LoadModel decides what "load" means.
class HandoverEngine {
 public:
  HandoverEngine(const Network& network, const ChannelState& channel, const LbConfig& config, LoadModel& load);

  // Moves UEs from `overloaded` to `underloaded`, best target/source efficiency ratio
  // first (ties by UE id). Amenable UEs move unconditionally; the rest only when their
  // slice gains. A move that would leave the pair at least as far apart as before
  // is undone and ends the transfer if it flipped the order, otherwise it is skipped.
  StopReason transfer_between(CellId overloaded, CellId underloaded, UserDistribution& distribution, int round,
                              int step, std::vector<LogicalMove>& moves, PhaseSet phases = PhaseSet::Both);

  LbResult run(UserDistribution initial);

  bool balanced() const;

 private:
  int macro_relay_round(UserDistribution& distribution, int round, std::vector<LogicalMove>& moves, CellId macro);
  int overlapping_round(UserDistribution& distribution, int round, std::vector<LogicalMove>& moves);
  bool try_move(UeId ue, CellId from, CellId to, UserDistribution& distribution, bool& stop);

  const Network& network_;
  const ChannelState& channel_;
  LbConfig config_;
  LoadModel& load_;
};

LbResult run_load_balancer(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                           const LbConfig& config = {});

struct PhysicalHandover {
  UeId ue;
  CellId from;
  CellId to;

  friend bool operator==(const PhysicalHandover&, const PhysicalHandover&) = default;
};

// UEs whose serving cell differs between the two distributions. Throws KeySetMismatch.
std::vector<PhysicalHandover> diff_physical_handovers(const UserDistribution& previous, const UserDistribution& final);

// Replays logical moves on a distribution; used to audit LbResult.
UserDistribution replay_moves(UserDistribution initial, const std::vector<LogicalMove>& moves);

}  // namespace slicelb
