#include "slicelb/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace slicelb {

namespace {

constexpr std::array<std::pair<Scheme, std::string_view>, 6> kSchemeNames{{
    {Scheme::TndBalance, "radioweaver"},
    {Scheme::NoLB, "nolb"},
    {Scheme::NaiveLB, "naivelb"},
    {Scheme::IsolatedLB, "isolatedlb"},
    {Scheme::Mora, "mora"},
    {Scheme::MoraPP, "mora_pp"},
}};

std::vector<double> slice_epsilons(const Network& network) {
  std::vector<double> eps;
  for (const auto& s : network.slices) eps.push_back(s.epsilon);
  return eps;
}

// Net moves from `initial` to `final`, for schemes without an incremental history.
std::vector<LogicalMove> net_moves(const UserDistribution& initial, const UserDistribution& final) {
  std::vector<LogicalMove> moves;
  for (const auto& h : diff_physical_handovers(initial, final)) {
    moves.push_back({h.ue, h.from, h.to, Phase::Amenable, 1, 0});
  }
  return moves;
}

bool balanced(const DemandState& demand, double tol) { return demand.max_imbalance() <= tol; }

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  for (const auto& [s, name] : kSchemeNames) {
    if (s == scheme) return name;
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (const auto& [s, n] : kSchemeNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

std::vector<Scheme> all_schemes() {
  std::vector<Scheme> out;
  for (const auto& entry : kSchemeNames) out.push_back(entry.first);
  return out;
}

UserCountLoadModel::UserCountLoadModel(const Network& network, const ChannelState& channel)
    : network_(network), total_capacity_(network.total_capacity()), tnd_(network, channel) {}

void UserCountLoadModel::refresh(CellId cell) {
  const double share = static_cast<double>(network_.ues.size()) * network_.cells[cell.index()].capacity_rbs /
                       total_capacity_;
  ratio_[cell.index()] = count_[cell.index()] / share;
}

void UserCountLoadModel::reset(const UserDistribution& distribution) {
  count_.assign(network_.cells.size(), 0.0);
  ratio_.assign(network_.cells.size(), 0.0);
  for (CellId c : distribution.serving()) count_[c.index()] += 1.0;
  for (std::size_t k = 0; k < count_.size(); ++k) refresh(CellId(k));
  tnd_.reset(distribution);
}

void UserCountLoadModel::on_move(UeId ue, CellId from, CellId to, const UserDistribution& distribution) {
  count_[from.index()] -= 1.0;
  count_[to.index()] += 1.0;
  refresh(from);
  refresh(to);
  tnd_.on_move(ue, from, to, distribution);
}

bool UserCountLoadModel::improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) {
  return tnd_.improves_slice(ue, from, to, distribution);
}

SliceLoadModel::SliceLoadModel(const Network& network, const ChannelState& channel, SliceId slice)
    : network_(network), channel_(channel), slice_(slice) {
  const auto scheme = static_allocation(network);
  static_quota_ = scheme.slice_row(slice);
}

void SliceLoadModel::reset(const UserDistribution& distribution) {
  serving_.assign(distribution.serving().begin(), distribution.serving().end());
  const auto& s = network_.slices[slice_.index()];
  ue_weight_.assign(network_.ues.size(), 0.0);
  for (UeId u : s.member_ue_ids) {
    ue_weight_[u.index()] = effective_weight(network_.ues[u.index()].weight, channel_.efficiency(u, serving_[u.index()]),
                                             s.epsilon);
  }
  rebuild();
}

void SliceLoadModel::rebuild() {
  const auto& s = network_.slices[slice_.index()];
  std::vector<double> mass(network_.cells.size(), 0.0);
  double total = 0.0;
  for (UeId u : s.member_ue_ids) {
    mass[serving_[u.index()].index()] += ue_weight_[u.index()];
    total += ue_weight_[u.index()];
  }
  ratio_.assign(network_.cells.size(), 0.0);
  for (std::size_t k = 0; k < mass.size(); ++k) {
    ratio_[k] = mass[k] / total * s.global_quota_rbs / static_quota_[k];
  }
}

void SliceLoadModel::on_move(UeId ue, CellId, CellId to, const UserDistribution&) {
  serving_[ue.index()] = to;
  ue_weight_[ue.index()] = effective_weight(network_.ues[ue.index()].weight, channel_.efficiency(ue, to),
                                            network_.slices[slice_.index()].epsilon);
  rebuild();
}

bool SliceLoadModel::improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) {
  const double before = slice_objective(network_, slice_, distribution, channel_, static_quota_).score;
  distribution.assign(ue, to);
  const double after = slice_objective(network_, slice_, distribution, channel_, static_quota_).score;
  distribution.assign(ue, from);
  if (std::isinf(before) && before < 0.0) return after > before;
  return after > before && after - before > 1e-9 * std::abs(before);
}

SchemeOutcome nolb(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                   const SchemeConfig& config) {
  std::vector<CellId> serving(network.ues.size());
  for (const auto& ue : network.ues) serving[ue.id.index()] = channel.best_cell(ue.id);
  LbResult result;
  result.distribution = UserDistribution(std::move(serving));
  result.demand = compute_demand_state(network, result.distribution, channel);
  result.logical_moves = net_moves(initial, result.distribution);
  result.converged = balanced(result.demand, config.lb.load_eq_tolerance);
  auto allocation = allocate(result.demand, network, config.swap);
  return {std::move(result), std::move(allocation), slice_epsilons(network)};
}

SchemeOutcome tnd_balance(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                          const SchemeConfig& config) {
  LbResult result = run_load_balancer(initial, network, channel, config.lb);
  auto allocation = allocate(result.demand, network, config.swap);
  return {std::move(result), std::move(allocation), slice_epsilons(network)};
}

SchemeOutcome naivelb(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                      const SchemeConfig& config) {
  UserCountLoadModel load(network, channel);
  HandoverEngine engine(network, channel, config.lb, load);
  LbResult result = engine.run(initial);
  auto allocation = allocate(result.demand, network, config.swap);
  return {std::move(result), std::move(allocation), slice_epsilons(network)};
}

SchemeOutcome isolatedlb(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                         const SchemeConfig& config) {
  LbResult combined;
  combined.distribution = initial;
  combined.converged = true;
  for (const auto& s : network.slices) {
    SliceLoadModel load(network, channel, s.id);
    HandoverEngine engine(network, channel, config.lb, load);
    LbResult part = engine.run(combined.distribution);
    combined.distribution = std::move(part.distribution);
    combined.logical_moves.insert(combined.logical_moves.end(), part.logical_moves.begin(), part.logical_moves.end());
    combined.converged = combined.converged && part.converged;
    combined.rounds = std::max(combined.rounds, part.rounds);
  }
  combined.demand = compute_demand_state(network, combined.distribution, channel);
  return {std::move(combined), static_allocation(network), slice_epsilons(network)};
}

namespace {

// Partial distribution under construction by greedy insertion.
class GreedyState {
 public:
  GreedyState(const Network& network, const ChannelState& channel, std::vector<double> epsilon,
              const SwapOptions& swap)
      : network_(network),
        channel_(channel),
        epsilon_(std::move(epsilon)),
        swap_(swap),
        cell_of_(network.ues.size(), kUnassigned),
        ew_(network.ues.size(), 0.0),
        mass_(network.slices.size() * network.cells.size(), 0.0),
        members_(mass_.size(), 0),
        placed_(network.slices.size(), 0) {}

  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::size_t cell_of(std::size_t ue) const { return cell_of_[ue]; }

  void place(std::size_t ue, std::size_t cell) {
    const std::size_t nc = network_.cells.size();
    const std::size_t s = network_.ues[ue].slice_id.index();
    if (cell_of_[ue] != kUnassigned) remove(s * nc + cell_of_[ue], ue, s);
    cell_of_[ue] = cell;
    ew_[ue] = effective_weight(network_.ues[ue].weight, channel_.efficiency(UeId(ue), CellId(cell)), epsilon_[s]);
    mass_[s * nc + cell] += ew_[ue];
    ++members_[s * nc + cell];
    ++placed_[s];
  }

  void unplace(std::size_t ue) {
    const std::size_t nc = network_.cells.size();
    const std::size_t s = network_.ues[ue].slice_id.index();
    remove(s * nc + cell_of_[ue], ue, s);
    cell_of_[ue] = kUnassigned;
  }

  // Quotas the allocator grants the current partial distribution.
  std::vector<double> quotas() const {
    const std::size_t nc = network_.cells.size();
    std::vector<double> mass = mass_;
    for (std::size_t s = 0; s < network_.slices.size(); ++s) {
      if (placed_[s] > 0) continue;
      for (std::size_t k = 0; k < nc; ++k) mass[s * nc + k] = network_.cells[k].capacity_rbs;
    }
    const auto demand = DemandState::from_masses(network_, mass);
    const auto scheme = allocate(demand, network_, swap_);
    return {scheme.values().begin(), scheme.values().end()};
  }

  double throughput(std::size_t ue, const std::vector<double>& quota) const {
    const std::size_t nc = network_.cells.size();
    const std::size_t s = network_.ues[ue].slice_id.index();
    const std::size_t k = cell_of_[ue];
    return quota[s * nc + k] * ew_[ue] / mass_[s * nc + k] * channel_.efficiency(UeId(ue), CellId(k));
  }

  // Throughput the UE would get at `cell`, leaving the state unchanged.
  double throughput_at(std::size_t ue, std::size_t cell) {
    const std::size_t previous = cell_of_[ue];
    place(ue, cell);
    const double t = throughput(ue, quotas());
    if (previous == kUnassigned) {
      unplace(ue);
    } else {
      place(ue, previous);
    }
    return t;
  }

 private:
  void remove(std::size_t slot, std::size_t ue, std::size_t slice) {
    // Reset emptied slots so rounding never leaves a phantom demand behind.
    if (--members_[slot] == 0) {
      mass_[slot] = 0.0;
    } else {
      mass_[slot] -= ew_[ue];
    }
    --placed_[slice];
  }

  const Network& network_;
  const ChannelState& channel_;
  std::vector<double> epsilon_;
  SwapOptions swap_;
  std::vector<std::size_t> cell_of_;
  std::vector<double> ew_;
  std::vector<double> mass_;
  std::vector<int> members_;
  std::vector<int> placed_;
};

}  // namespace

SchemeOutcome greedy_insertion(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                               bool true_epsilon, const SchemeConfig& config) {
  const std::size_t nc = network.cells.size();
  std::vector<double> eps = true_epsilon ? slice_epsilons(network) : std::vector<double>(network.slices.size(), 1.0);
  GreedyState state(network, channel, eps, config.swap);

  // Best covering cell for the UE other than `exclude`; returns nc when none.
  auto best_cell = [&](std::size_t ue, std::size_t exclude, double& best_rate) {
    std::size_t best = nc;
    best_rate = -1.0;
    for (std::size_t k = 0; k < nc; ++k) {
      if (k == exclude || !(channel.efficiency(UeId(ue), CellId(k)) > 0.0)) continue;
      const double t = state.throughput_at(ue, k);
      if (t > best_rate) {
        best_rate = t;
        best = k;
      }
    }
    return best;
  };

  for (const auto& ue : network.ues) {
    const std::size_t j = ue.id.index();
    double rate = 0.0;
    const std::size_t home = best_cell(j, nc, rate);
    if (home == nc) throw Error(ErrorCode::UnreachableUE, "UE " + std::to_string(j));
    state.place(j, home);

    std::size_t cell = home;
    std::size_t last_moved = j;
    for (int cascade = 0; cascade < config.mora_cascade_cap; ++cascade) {
      const auto quota = state.quotas();
      bool moved = false;
      for (std::size_t u = 0; u < network.ues.size() && !moved; ++u) {
        if (u == last_moved || state.cell_of(u) != cell) continue;
        const double current = state.throughput(u, quota);
        double alt_rate = 0.0;
        const std::size_t alt = best_cell(u, cell, alt_rate);
        if (alt == nc || !(alt_rate > current && alt_rate - current > 1e-9 * current)) continue;
        state.place(u, alt);
        cell = alt;
        last_moved = u;
        moved = true;
      }
      if (!moved) break;
    }
  }

  std::vector<CellId> serving(network.ues.size());
  for (std::size_t j = 0; j < serving.size(); ++j) serving[j] = CellId(state.cell_of(j));

  LbResult result;
  result.distribution = UserDistribution(std::move(serving));
  result.demand = compute_demand_state(network, result.distribution, channel);
  result.logical_moves = net_moves(initial, result.distribution);
  result.converged = balanced(result.demand, config.lb.load_eq_tolerance);
  result.rounds = 1;

  std::vector<double> mass(network.slices.size() * nc, 0.0);
  for (const auto& ue : network.ues) {
    const CellId k = result.distribution.cell_of(ue.id);
    mass[ue.slice_id.index() * nc + k.index()] +=
        effective_weight(ue.weight, channel.efficiency(ue.id, k), eps[ue.slice_id.index()]);
  }
  auto allocation = allocate(DemandState::from_masses(network, mass), network, config.swap);
  return {std::move(result), std::move(allocation), std::move(eps)};
}

SchemeOutcome run_scheme(Scheme scheme, const UserDistribution& initial, const Network& network,
                         const ChannelState& channel, const SchemeConfig& config) {
  switch (scheme) {
    case Scheme::TndBalance:
      return tnd_balance(initial, network, channel, config);
    case Scheme::NoLB:
      return nolb(initial, network, channel, config);
    case Scheme::NaiveLB:
      return naivelb(initial, network, channel, config);
    case Scheme::IsolatedLB:
      return isolatedlb(initial, network, channel, config);
    case Scheme::Mora:
      return mora(initial, network, channel, config);
    case Scheme::MoraPP:
      return mora_pp(initial, network, channel, config);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scheme");
}

}  // namespace slicelb
