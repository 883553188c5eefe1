#include "slicelb/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicelb {

double effective_weight(double weight, double efficiency, double epsilon) {
  if (!(efficiency > 0.0)) throw Error(ErrorCode::ZeroEfficiency, "effective weight needs a covering cell");
  if (epsilon == 1.0) return weight;
  if (epsilon == 0.0) return weight / efficiency;
  return weight / std::pow(efficiency, 1.0 - epsilon);
}

namespace {

double serving_effective_weight(const Network& network, const Ue& ue, const UserDistribution& distribution,
                                const ChannelState& channel) {
  const double e = channel.efficiency(ue.id, distribution.cell_of(ue.id));
  return effective_weight(ue.weight, e, network.slices[ue.slice_id.index()].epsilon);
}

}  // namespace

std::vector<double> demand_ratios(const Network& network, SliceId slice, const UserDistribution& distribution,
                                  const ChannelState& channel) {
  const auto& s = network.slices[slice.index()];
  if (s.member_ue_ids.empty()) throw Error(ErrorCode::EmptySlice, "slice " + std::to_string(slice.value));
  std::vector<double> mass(network.cells.size(), 0.0);
  double total = 0.0;
  for (UeId u : s.member_ue_ids) {
    const double ew = serving_effective_weight(network, network.ues[u.index()], distribution, channel);
    mass[distribution.cell_of(u).index()] += ew;
    total += ew;
  }
  for (double& m : mass) m /= total;
  return mass;
}

std::vector<double> demand_masses(const Network& network, const UserDistribution& distribution,
                                  const ChannelState& channel) {
  const std::size_t nc = network.cells.size();
  std::vector<double> mass(network.slices.size() * nc, 0.0);
  for (const auto& ue : network.ues) {
    mass[ue.slice_id.index() * nc + distribution.cell_of(ue.id).index()] +=
        serving_effective_weight(network, ue, distribution, channel);
  }
  return mass;
}

DemandState DemandState::from_masses(const Network& network, std::span<const double> mass) {
  DemandState d;
  d.num_slices_ = network.slices.size();
  d.num_cells_ = network.cells.size();
  d.ratio_.assign(d.num_slices_ * d.num_cells_, 0.0);
  d.normalized_.assign(d.num_slices_ * d.num_cells_, 0.0);
  d.tnd_.assign(d.num_cells_, 0.0);
  d.load_ratio_.assign(d.num_cells_, 0.0);
  for (std::size_t i = 0; i < d.num_slices_; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < d.num_cells_; ++k) total += mass[i * d.num_cells_ + k];
    if (!(total > 0.0)) throw Error(ErrorCode::EmptySlice, "slice " + std::to_string(i) + " has no demand");
    const double quota = network.slices[i].global_quota_rbs;
    for (std::size_t k = 0; k < d.num_cells_; ++k) {
      const double r = mass[i * d.num_cells_ + k] / total;
      d.ratio_[i * d.num_cells_ + k] = r;
      d.normalized_[i * d.num_cells_ + k] = r * quota;
      d.tnd_[k] += r * quota;
    }
  }
  for (std::size_t k = 0; k < d.num_cells_; ++k) d.load_ratio_[k] = d.tnd_[k] / network.cells[k].capacity_rbs;
  return d;
}

std::vector<double> DemandState::normalized_row(SliceId i) const {
  const auto begin = normalized_.begin() + static_cast<std::ptrdiff_t>(i.index() * num_cells_);
  return {begin, begin + static_cast<std::ptrdiff_t>(num_cells_)};
}

bool DemandState::fully_complementary(double rel_tol) const {
  return std::all_of(load_ratio_.begin(), load_ratio_.end(), [&](double r) { return std::abs(r - 1.0) <= rel_tol; });
}

double DemandState::max_imbalance() const {
  double worst = 0.0;
  for (double r : load_ratio_) worst = std::max(worst, std::abs(r - 1.0));
  return worst;
}

DemandState compute_demand_state(const Network& network, const UserDistribution& distribution,
                                 const ChannelState& channel) {
  for (const auto& s : network.slices) {
    if (s.member_ue_ids.empty()) throw Error(ErrorCode::EmptySlice, "slice " + std::to_string(s.id.value));
  }
  return DemandState::from_masses(network, demand_masses(network, distribution, channel));
}

SliceObjective slice_objective(const Network& network, SliceId slice, const UserDistribution& distribution,
                               const ChannelState& channel, std::span<const double> quota_per_cell) {
  const auto& s = network.slices[slice.index()];
  if (s.member_ue_ids.empty()) throw Error(ErrorCode::EmptySlice, "slice " + std::to_string(slice.value));

  std::vector<double> cell_mass(network.cells.size(), 0.0);
  for (UeId u : s.member_ue_ids) {
    cell_mass[distribution.cell_of(u).index()] +=
        serving_effective_weight(network, network.ues[u.index()], distribution, channel);
  }

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  SliceObjective out;
  out.min_normalized_rate = std::numeric_limits<double>::infinity();
  for (UeId u : s.member_ue_ids) {
    const auto& ue = network.ues[u.index()];
    const CellId k = distribution.cell_of(u);
    const double e = channel.efficiency(u, k);
    const double ew = effective_weight(ue.weight, e, s.epsilon);
    const double rbs = quota_per_cell[k.index()] * ew / cell_mass[k.index()];
    const double rate = rbs * e;
    if (rate > 0.0) {
      out.weighted_log_utility += ue.weight * std::log(rate);
      out.score += ew * std::log(rate);
    } else {
      out.weighted_log_utility = kNegInf;
      out.score = kNegInf;
    }
    out.min_normalized_rate = std::min(out.min_normalized_rate, rate / ue.weight);
  }
  if (s.epsilon == 0.0) out.score = out.min_normalized_rate;
  return out;
}

}  // namespace slicelb
