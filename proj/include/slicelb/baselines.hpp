#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicelb/lb_engine.hpp"
#include "slicelb/quota.hpp"

namespace slicelb {

enum class Scheme { TndBalance, NoLB, NaiveLB, IsolatedLB, Mora, MoraPP };

// Config names: radioweaver, nolb, naivelb, isolatedlb, mora, mora_pp.
std::string_view scheme_name(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);
std::vector<Scheme> all_schemes();

struct SchemeConfig {
  LbConfig lb;
  SwapOptions swap;
  int mora_cascade_cap = 3;
};

struct SchemeOutcome {
  LbResult result;
  AllocationScheme allocation;
  // Epsilon each slice's scheduler uses to split RBs among its UEs at a cell.
  // MORA schedules every slice as weighted PF.
  std::vector<double> split_epsilon;
};

// User count relative to the cell's capacity share: count_k / (N * R_k / sum R).
class UserCountLoadModel final : public LoadModel {
 public:
  UserCountLoadModel(const Network& network, const ChannelState& channel);

  void reset(const UserDistribution& distribution) override;
  double ratio(CellId cell) const override { return ratio_[cell.index()]; }
  void on_move(UeId ue, CellId from, CellId to, const UserDistribution& distribution) override;
  bool improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) override;

 private:
  void refresh(CellId cell);

  const Network& network_;
  std::vector<double> count_;
  std::vector<double> ratio_;
  double total_capacity_ = 0.0;
  TndLoadModel tnd_;  // phase-2 checks use the same objective test as the TND balancer
};

// One slice balancing its own demand against its static quota: ratio D_ik / Qstatic_ik.
// Only the slice's UEs may move.
class SliceLoadModel final : public LoadModel {
 public:
  SliceLoadModel(const Network& network, const ChannelState& channel, SliceId slice);

  void reset(const UserDistribution& distribution) override;
  double ratio(CellId cell) const override { return ratio_[cell.index()]; }
  void on_move(UeId ue, CellId from, CellId to, const UserDistribution& distribution) override;
  bool movable(UeId ue) const override { return network_.ues[ue.index()].slice_id == slice_; }
  bool improves_slice(UeId ue, CellId from, CellId to, UserDistribution& distribution) override;

 private:
  void rebuild();

  const Network& network_;
  const ChannelState& channel_;
  SliceId slice_;
  std::vector<double> static_quota_;
  std::vector<double> ue_weight_;
  std::vector<CellId> serving_;
  std::vector<double> ratio_;
};

// Schemes that rebuild the distribution from scratch (nolb, MORA) report one logical
// move per UE whose cell differs from `initial`, so replaying still reproduces the result.

// Every UE at its best cell; quotas from the swap allocator.
SchemeOutcome nolb(const UserDistribution& initial, const Network& network, const ChannelState& channel, const SchemeConfig& config = {});

// TND balancing from `initial`, then the swap allocator.
SchemeOutcome tnd_balance(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                          const SchemeConfig& config = {});

SchemeOutcome naivelb(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                      const SchemeConfig& config = {});

// Each slice in ascending id balances alone; quotas stay static.
SchemeOutcome isolatedlb(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                         const SchemeConfig& config = {});

// Greedy insertion in ascending UE id into the cell giving the UE the highest
// throughput, followed by up to cascade_cap single-user re-homings. Throughput is
// evaluated with the swap allocator on the partial distribution; slices without any
// placed UE yet ask for a capacity-proportional share. `true_epsilon` selects MORA++
// (each slice's own demand model) over MORA (every slice as weighted PF).
SchemeOutcome greedy_insertion(const UserDistribution& initial, const Network& network, const ChannelState& channel, bool true_epsilon,
                               const SchemeConfig& config = {});

inline SchemeOutcome mora(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                          const SchemeConfig& config = {}) {
  return greedy_insertion(initial, network, channel, false, config);
}
inline SchemeOutcome mora_pp(const UserDistribution& initial, const Network& network, const ChannelState& channel,
                             const SchemeConfig& config = {}) {
  return greedy_insertion(initial, network, channel, true, config);
}

SchemeOutcome run_scheme(Scheme scheme, const UserDistribution& initial, const Network& network,
                         const ChannelState& channel, const SchemeConfig& config = {});

}  // namespace slicelb
