#include "slicelb/quota.hpp"

#include <algorithm>
#include <cmath>

namespace slicelb {

namespace {

std::vector<double> static_quota(const Network& network) {
  const double total = network.total_capacity();
  const std::size_t nc = network.cells.size();
  std::vector<double> q(network.slices.size() * nc);
  for (std::size_t i = 0; i < network.slices.size(); ++i) {
    for (std::size_t k = 0; k < nc; ++k) {
      q[i * nc + k] = network.slices[i].global_quota_rbs * network.cells[k].capacity_rbs / total;
    }
  }
  return q;
}

}  // namespace

AllocationScheme static_allocation(const Network& network) { return AllocationScheme(static_quota(network), network); }

AllocationOutcome allocate_detailed(const DemandState& demand, const Network& network, const SwapOptions& options) {
  const std::size_t ns = network.slices.size();
  const std::size_t nc = network.cells.size();

  bool balanced = true;
  for (std::size_t k = 0; k < nc; ++k) {
    const double r = network.cells[k].capacity_rbs;
    if (std::abs(demand.tnd(CellId(k)) - r) > options.complementary_tolerance * r) {
      balanced = false;
      break;
    }
  }
  if (balanced) {
    const auto d = demand.normalized_values();
    return {AllocationScheme(std::vector<double>(d.begin(), d.end()), network), true, 0};
  }

  double max_capacity = 0.0;
  for (const auto& c : network.cells) max_capacity = std::max(max_capacity, c.capacity_rbs);
  const double tol = options.min_swap_fraction * max_capacity;

  std::vector<double> q = static_quota(network);
  const auto d = demand.normalized_values();
  // gap > 0: slice holds more than it wants at that cell.
  auto gap = [&](std::size_t i, std::size_t k) { return q[i * nc + k] - d[i * nc + k]; };

  int swaps = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t a = 0; a < ns && !progress; ++a) {
      for (std::size_t b = a + 1; b < ns && !progress; ++b) {
        // The donor cell (A surplus, B deficit) and the receiver cell (A deficit, B
        // surplus) are chosen independently; their sign conditions keep them distinct.
        double give = 0.0, take = 0.0;
        std::size_t best_c1 = nc, best_c2 = nc;
        for (std::size_t c = 0; c < nc; ++c) {
          const double x = std::min(gap(a, c), -gap(b, c));
          const double y = std::min(-gap(a, c), gap(b, c));
          if (x > give) give = x, best_c1 = c;
          if (y > take) take = y, best_c2 = c;
        }
        const double best = std::min(give, take);
        if (!(best > tol)) continue;
        // First tuple in scan order reaching the maximal swap.
        for (std::size_t c = 0; c < nc; ++c) {
          if (std::min(gap(a, c), -gap(b, c)) >= best) {
            best_c1 = c;
            break;
          }
        }
        for (std::size_t c = 0; c < nc; ++c) {
          if (std::min(-gap(a, c), gap(b, c)) >= best) {
            best_c2 = c;
            break;
          }
        }
        q[a * nc + best_c1] -= best;
        q[b * nc + best_c2] -= best;
        q[b * nc + best_c1] += best;
        q[a * nc + best_c2] += best;
        ++swaps;
        progress = true;
      }
    }
  }
  return {AllocationScheme(std::move(q), network), false, swaps};
}

AllocationScheme allocate(const DemandState& demand, const Network& network, const SwapOptions& options) {
  return allocate_detailed(demand, network, options).scheme;
}

}  // namespace slicelb
