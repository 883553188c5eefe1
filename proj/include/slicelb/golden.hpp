#pragma once

#include <string>
#include <vector>

#include "slicelb/types.hpp"

namespace slicelb {

// Two-cell, two-slice, 28-UE fixture. Both cells have capacity R and both slices
// quota R. Slice 0 is datarate-fair (epsilon 0): five UEs see efficiency T at cell 0
// only, three see T/5 at cell 1 only. Slice 1 is weighted PF with 20 UEs: three at
// cell 0 that see 0.9 from cell 1, six at cell 0 with no cell-1 coverage, three at
// cell 0 that see 0.5 from cell 1, three at cell 1 that see 0.9 from cell 0, and five
// at cell 1 only.
struct GoldenFixture {
  Network network;
  ChannelState channel;
  double R = 0.0;
  double T = 0.0;
};

GoldenFixture make_golden_fixture(double R = 100.0, double T = 5.0);

struct GoldenCheck {
  std::string scheme;
  std::string quantity;
  double expected = 0.0;
  double actual = 0.0;
  bool pass = false;
};

// Runs nolb, radioweaver, naivelb and isolatedlb on the fixture and compares every
// value the fixture pins down (cell counts, TNDs, quotas, per-UE RBs and rates).
std::vector<GoldenCheck> run_golden_checks(double R = 100.0, double T = 5.0, double tolerance = 1e-9);

}  // namespace slicelb
