#pragma once

#include <vector>

#include "slicelb/types.hpp"

namespace slicelb::test {

struct UeSpec {
  int slice = 0;
  double weight = 1.0;
  std::vector<double> efficiency;  // one per cell, 0 = uncovered
};

// Dense ids, membership filled from the UE list.
inline Network make_network(const std::vector<double>& capacities, const std::vector<double>& quotas,
                            const std::vector<double>& epsilons, const std::vector<UeSpec>& ues) {
  Network net;
  for (std::size_t k = 0; k < capacities.size(); ++k) {
    Cell c;
    c.id = CellId(k);
    c.capacity_rbs = capacities[k];
    net.cells.push_back(c);
  }
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    Slice s;
    s.id = SliceId(i);
    s.name = "s" + std::to_string(i);
    s.global_quota_rbs = quotas[i];
    s.epsilon = epsilons[i];
    net.slices.push_back(s);
  }
  for (std::size_t j = 0; j < ues.size(); ++j) {
    Ue u;
    u.id = UeId(j);
    u.slice_id = SliceId(ues[j].slice);
    u.weight = ues[j].weight;
    net.ues.push_back(u);
    net.slices[ues[j].slice].member_ue_ids.push_back(u.id);
  }
  return net;
}

inline ChannelState make_channel(const std::vector<UeSpec>& ues, std::size_t cells) {
  ChannelState ch(ues.size(), cells);
  for (std::size_t j = 0; j < ues.size(); ++j)
    for (std::size_t k = 0; k < cells; ++k) ch.set(UeId(j), CellId(k), ues[j].efficiency[k]);
  return ch;
}

inline UserDistribution at_cells(const std::vector<int>& cells) {
  std::vector<CellId> serving;
  for (int c : cells) serving.push_back(CellId(c));
  return UserDistribution(serving);
}

}  // namespace slicelb::test
