#pragma once

#include "slicelb/demand.hpp"
#include "slicelb/types.hpp"

namespace slicelb {

// Q_ik = Q_i * R_k / sum_m R_m.
AllocationScheme static_allocation(const Network& network);

struct SwapOptions {
  // Cells whose |L_k - R_k| <= tolerance * R_k count as balanced.
  double complementary_tolerance = 1e-9;
  // Swaps smaller than this fraction of the largest cell capacity are treated as zero.
  double min_swap_fraction = 1e-9;
};

struct AllocationOutcome {
  AllocationScheme scheme;
  bool exact = false;  // demands were fully complementary and granted as-is
  int swaps = 0;
};

// Demand-driven quota: the normalized demands themselves when every cell is balanced,
// otherwise pairwise swaps starting from the static split. A swap between slices A, B
// and cells 1, 2 needs Q_A1 > D_A1, Q_A2 < D_A2, Q_B1 < D_B1, Q_B2 > D_B2 and moves
// the smallest of the four gaps. The first slice pair (ascending ids) with an eligible
// swap is served first, using its largest swap.
AllocationOutcome allocate_detailed(const DemandState& demand, const Network& network, const SwapOptions& options = {});

AllocationScheme allocate(const DemandState& demand, const Network& network, const SwapOptions& options = {});

}  // namespace slicelb
