#pragma once

#include <span>
#include <vector>

#include "slicelb/types.hpp"

namespace slicelb {

// w / e^(1 - epsilon). epsilon = 1 gives w (weighted PF), epsilon = 0 gives w / e
// (weighted datarate fairness). Throws ZeroEfficiency when e == 0.
double effective_weight(double weight, double efficiency, double epsilon);

// Demand ratio d_ik of one slice at every cell, using each UE's serving-cell efficiency.
// Throws EmptySlice when the slice has no members.
std::vector<double> demand_ratios(const Network& network, SliceId slice, const UserDistribution& distribution,
                                  const ChannelState& channel);

// Per-slice per-cell demand ratios d_ik, normalized demands D_ik = d_ik Q_i,
// per-cell total normalized demand L_k and load ratio L_k / R_k.
class DemandState {
 public:
  DemandState() = default;

  // mass is slice-major (num_slices x num_cells): summed effective weight of each
  // slice's UEs at each cell.
  static DemandState from_masses(const Network& network, std::span<const double> mass);

  std::size_t num_slices() const { return num_slices_; }
  std::size_t num_cells() const { return num_cells_; }

  double ratio(SliceId i, CellId k) const { return ratio_[i.index() * num_cells_ + k.index()]; }
  double normalized(SliceId i, CellId k) const { return normalized_[i.index() * num_cells_ + k.index()]; }
  double tnd(CellId k) const { return tnd_[k.index()]; }
  double load_ratio(CellId k) const { return load_ratio_[k.index()]; }

  std::span<const double> normalized_values() const { return normalized_; }
  std::span<const double> tnd_values() const { return tnd_; }
  std::span<const double> load_ratios() const { return load_ratio_; }
  std::vector<double> normalized_row(SliceId i) const;

  bool overloaded(CellId k, double rel_tol = 0.0) const { return load_ratio(k) > 1.0 + rel_tol; }
  bool underloaded(CellId k, double rel_tol = 0.0) const { return load_ratio(k) < 1.0 - rel_tol; }
  // Every cell's TND matches its capacity within rel_tol.
  bool fully_complementary(double rel_tol) const;
  double max_imbalance() const;  // max_k |L_k / R_k - 1|

 private:
  std::size_t num_slices_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<double> ratio_;
  std::vector<double> normalized_;
  std::vector<double> tnd_;
  std::vector<double> load_ratio_;
};

// Summed effective weight per (slice, cell) for a distribution; slice-major.
std::vector<double> demand_masses(const Network& network, const UserDistribution& distribution,
                                  const ChannelState& channel);

DemandState compute_demand_state(const Network& network, const UserDistribution& distribution,
                                 const ChannelState& channel);

struct SliceObjective {
  double weighted_log_utility = 0.0;  // sum w log t
  double min_normalized_rate = 0.0;   // min t / w
  // Value the slice optimizes: min_normalized_rate for epsilon = 0, otherwise
  // sum of effective_weight * log t (equal to weighted_log_utility at epsilon = 1).
  double score = 0.0;
};

// Objective of one slice when cell k grants it quota_per_cell[k] RBs, split among the
// slice's UEs at k in proportion to effective weight. A cell with UEs but no quota
// yields -inf utilities and zero minimum rate.
SliceObjective slice_objective(const Network& network, SliceId slice, const UserDistribution& distribution,
                               const ChannelState& channel, std::span<const double> quota_per_cell);

}  // namespace slicelb
