#include "slicelb/lb_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicelb {

UserDistribution initialize_distribution(const std::optional<PreviousInvocation>& previous,
                                         const ChannelState& channel, double trigger_db) {
  std::vector<CellId> serving(channel.num_ues());
  for (std::size_t j = 0; j < channel.num_ues(); ++j) {
    const UeId ue(j);
    if (previous && j < previous->distribution.size() && j < previous->channel.num_ues()) {
      const CellId prev = previous->distribution.cell_of(ue);
      const double before = previous->channel.quality_db(ue, prev);
      const double now = channel.quality_db(ue, prev);
      if (channel.efficiency(ue, prev) > 0.0 && std::isfinite(before) && std::isfinite(now) &&
          std::abs(now - before) <= trigger_db) {
        serving[j] = prev;
        continue;
      }
    }
    serving[j] = channel.best_cell(ue);
  }
  return UserDistribution(std::move(serving));
}

bool amenable(UeId ue, CellId from, CellId to, const ChannelState& channel, double alpha) {
  const double source = channel.efficiency(ue, from);
  const double target = channel.efficiency(ue, to);
  if (!(source > 0.0) || !(target > 0.0)) return false;
  return target / source >= alpha;
}

TndLoadModel::TndLoadModel(const Network& network, const ChannelState& channel)
    : network_(network), channel_(channel) {}

void TndLoadModel::reset(const UserDistribution& distribution) {
  serving_.assign(distribution.serving().begin(), distribution.serving().end());
  ue_weight_.resize(network_.ues.size());
  for (const auto& ue : network_.ues) {
    ue_weight_[ue.id.index()] = effective_weight(ue.weight, channel_.efficiency(ue.id, serving_[ue.id.index()]),
                                                 network_.slices[ue.slice_id.index()].epsilon);
  }
  rebuild();
}

void TndLoadModel::rebuild() {
  const std::size_t nc = network_.cells.size();
  mass_.assign(network_.slices.size() * nc, 0.0);
  for (const auto& ue : network_.ues) {
    mass_[ue.slice_id.index() * nc + serving_[ue.id.index()].index()] += ue_weight_[ue.id.index()];
  }
  demand_ = DemandState::from_masses(network_, mass_);
}

void TndLoadModel::on_move(UeId ue, CellId, CellId to, const UserDistribution&) {
  const auto& u = network_.ues[ue.index()];
  serving_[ue.index()] = to;
  ue_weight_[ue.index()] =
      effective_weight(u.weight, channel_.efficiency(ue, to), network_.slices[u.slice_id.index()].epsilon);
  rebuild();
}

double TndLoadModel::capacity_scaled_score(SliceId slice, const UserDistribution& distribution) const {
  std::vector<double> quota(network_.cells.size());
  for (std::size_t k = 0; k < quota.size(); ++k) {
    const CellId c(k);
    const double scale = std::min(1.0, network_.cells[k].capacity_rbs / demand_.tnd(c));
    quota[k] = demand_.normalized(slice, c) * scale;
  }
  return slice_objective(network_, slice, distribution, channel_, quota).score;
}

namespace {

bool strictly_better(double after, double before) {
  if (std::isinf(before) && before < 0.0) return after > before;
  return after - before > 1e-9 * std::abs(before) && after > before;
}

}  // namespace

bool TndLoadModel::improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) {
  const SliceId slice = network_.ues[ue.index()].slice_id;
  const double before = capacity_scaled_score(slice, distribution);
  distribution.assign(ue, to);
  on_move(ue, from, to, distribution);
  const double after = capacity_scaled_score(slice, distribution);
  distribution.assign(ue, from);
  on_move(ue, to, from, distribution);
  return strictly_better(after, before);
}

HandoverEngine::HandoverEngine(const Network& network, const ChannelState& channel, const LbConfig& config,
                               LoadModel& load)
    : network_(network), channel_(channel), config_(config), load_(load) {}

bool HandoverEngine::balanced() const {
  for (std::size_t k = 0; k < network_.cells.size(); ++k) {
    if (std::abs(load_.ratio(CellId(k)) - 1.0) > config_.load_eq_tolerance) return false;
  }
  return true;
}

bool HandoverEngine::try_move(UeId ue, CellId from, CellId to, UserDistribution& distribution, bool& stop) {
  const double gap = load_.ratio(from) - load_.ratio(to);
  distribution.assign(ue, to);
  load_.on_move(ue, from, to, distribution);
  const double new_gap = load_.ratio(from) - load_.ratio(to);
  if (std::abs(new_gap) >= gap) {
    distribution.assign(ue, from);
    load_.on_move(ue, to, from, distribution);
    stop = new_gap < 0.0;
    return false;
  }
  stop = new_gap <= config_.load_eq_tolerance;
  return true;
}

StopReason HandoverEngine::transfer_between(CellId overloaded, CellId underloaded, UserDistribution& distribution,
                                            int round, int step, std::vector<LogicalMove>& moves, PhaseSet phases) {
  const double tol = config_.load_eq_tolerance;
  if (!(load_.ratio(overloaded) - load_.ratio(underloaded) > tol)) return StopReason::AlreadyBalanced;

  struct Candidate {
    UeId ue;
    double ratio;
  };
  std::vector<Candidate> queue;
  for (std::size_t j = 0; j < distribution.size(); ++j) {
    const UeId ue(j);
    if (distribution.cell_of(ue) != overloaded || !load_.movable(ue)) continue;
    const double target = channel_.efficiency(ue, underloaded);
    if (!(target > 0.0)) continue;
    queue.push_back({ue, target / channel_.efficiency(ue, overloaded)});
  }
  std::sort(queue.begin(), queue.end(), [](const Candidate& a, const Candidate& b) {
    return a.ratio != b.ratio ? a.ratio > b.ratio : a.ue < b.ue;
  });

  auto run_phase = [&](Phase phase) -> bool {
    for (const auto& c : queue) {
      const bool is_amenable = c.ratio >= config_.alpha;
      if (is_amenable != (phase == Phase::Amenable)) continue;
      if (!(load_.ratio(overloaded) - load_.ratio(underloaded) > tol)) return true;
      if (phase == Phase::SliceSpecific && !load_.improves_slice(c.ue, overloaded, underloaded, distribution)) {
        continue;
      }
      bool stop = false;
      if (try_move(c.ue, overloaded, underloaded, distribution, stop)) {
        moves.push_back({c.ue, overloaded, underloaded, phase, round, step});
      }
      if (stop) return true;
    }
    return false;
  };

  if (phases != PhaseSet::SliceSpecificOnly && run_phase(Phase::Amenable)) return StopReason::LoadDriven;
  if (phases != PhaseSet::AmenableOnly && config_.slice_specific_phase && run_phase(Phase::SliceSpecific)) {
    return StopReason::LoadDriven;
  }
  return StopReason::ChannelDriven;
}

namespace {

std::vector<CellId> sorted_cells(std::vector<CellId> cells, const LoadModel& load, bool descending) {
  std::sort(cells.begin(), cells.end(), [&](CellId a, CellId b) {
    const double ra = load.ratio(a), rb = load.ratio(b);
    if (ra != rb) return descending ? ra > rb : ra < rb;
    return a < b;
  });
  return cells;
}

}  // namespace

int HandoverEngine::macro_relay_round(UserDistribution& distribution, int round, std::vector<LogicalMove>& moves,
                                      CellId macro) {
  const double tol = config_.load_eq_tolerance;
  const std::size_t before = moves.size();

  std::vector<CellId> sources;
  for (const auto& c : network_.cells) {
    if (c.id != macro && load_.ratio(c.id) > 1.0 + tol) sources.push_back(c.id);
  }
  for (CellId small : sorted_cells(std::move(sources), load_, true)) {
    transfer_between(small, macro, distribution, round, 1, moves);
  }

  std::vector<CellId> targets;
  for (const auto& c : network_.cells) {
    if (c.id != macro && load_.ratio(c.id) < 1.0 - tol) targets.push_back(c.id);
  }
  for (CellId small : sorted_cells(std::move(targets), load_, false)) {
    transfer_between(macro, small, distribution, round, 2, moves);
  }
  return static_cast<int>(moves.size() - before);
}

int HandoverEngine::overlapping_round(UserDistribution& distribution, int round, std::vector<LogicalMove>& moves) {
  const double tol = config_.load_eq_tolerance;
  const std::size_t before = moves.size();

  std::vector<CellId> sources;
  for (const auto& c : network_.cells) {
    if (load_.ratio(c.id) > 1.0 + tol) sources.push_back(c.id);
  }
  for (CellId src : sorted_cells(std::move(sources), load_, true)) {
    if (!(load_.ratio(src) > 1.0 + tol)) continue;
    std::vector<CellId> neighbors;
    for (const auto& c : network_.cells) {
      if (c.id == src || !(load_.ratio(c.id) < 1.0 - tol)) continue;
      for (std::size_t j = 0; j < distribution.size(); ++j) {
        if (distribution.cell_of(UeId(j)) == src && channel_.efficiency(UeId(j), c.id) > 0.0) {
          neighbors.push_back(c.id);
          break;
        }
      }
    }
    neighbors = sorted_cells(std::move(neighbors), load_, false);
    for (CellId dst : neighbors) transfer_between(src, dst, distribution, round, 0, moves, PhaseSet::AmenableOnly);
    for (CellId dst : neighbors) {
      transfer_between(src, dst, distribution, round, 0, moves, PhaseSet::SliceSpecificOnly);
    }
  }
  return static_cast<int>(moves.size() - before);
}

LbResult HandoverEngine::run(UserDistribution initial) {
  LbResult result;
  result.distribution = std::move(initial);
  load_.reset(result.distribution);

  std::optional<CellId> macro;
  if (config_.topology_mode == TopologyMode::MacroRelay) {
    const Cell* m = network_.macro_cell();
    if (m == nullptr) throw Error(ErrorCode::InvalidArgument, "macro-relay mode needs a macro cell");
    macro = m->id;
  }

  for (int round = 1; round <= config_.max_rounds; ++round) {
    if (balanced()) break;
    result.rounds = round;
    const int moved = macro ? macro_relay_round(result.distribution, round, result.logical_moves, *macro)
                            : overlapping_round(result.distribution, round, result.logical_moves);
    if (moved == 0) break;
  }
  result.converged = balanced();
  result.demand = compute_demand_state(network_, result.distribution, channel_);
  return result;
}

LbResult run_load_balancer(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                           const LbConfig& config) {
  TndLoadModel load(network, channel);
  HandoverEngine engine(network, channel, config, load);
  return engine.run(initial);
}

std::vector<PhysicalHandover> diff_physical_handovers(const UserDistribution& previous, const UserDistribution& final) {
  if (previous.size() != final.size()) {
    throw Error(ErrorCode::KeySetMismatch, "distributions cover different UE sets");
  }
  std::vector<PhysicalHandover> out;
  for (std::size_t j = 0; j < final.size(); ++j) {
    const UeId ue(j);
    if (previous.cell_of(ue) != final.cell_of(ue)) out.push_back({ue, previous.cell_of(ue), final.cell_of(ue)});
  }
  return out;
}

UserDistribution replay_moves(UserDistribution initial, const std::vector<LogicalMove>& moves) {
  for (const auto& m : moves) initial.assign(m.ue, m.to);
  return initial;
}

}  // namespace slicelb
