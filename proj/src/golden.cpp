#include "slicelb/golden.hpp"

#include <algorithm>
#include <cmath>

#include "slicelb/baselines.hpp"

namespace slicelb {

namespace {

struct UeSpec {
  int slice;
  double e0;
  double e1;
  int count;
};

}  // namespace

GoldenFixture make_golden_fixture(double R, double T) {
  GoldenFixture f;
  f.R = R;
  f.T = T;
  for (int k = 0; k < 2; ++k) {
    Cell c;
    c.id = CellId(k);
    c.capacity_rbs = R;
    c.position = {500.0 * k, 0.0};
    c.bandwidth_mhz = 20.0;
    c.tx_power_dbm = 35.0;
    f.network.cells.push_back(c);
  }
  f.network.slices.push_back({SliceId(0), "drf", R, 0.0, {}});
  f.network.slices.push_back({SliceId(1), "pf", R, 1.0, {}});

  const std::vector<UeSpec> specs = {
      {0, T, 0.0, 5}, {0, 0.0, T / 5.0, 3},                    // slice 0
      {1, 1.0, 0.9, 3}, {1, 1.0, 0.0, 6}, {1, 1.0, 0.5, 3},  // slice 1 best at cell 0
      {1, 0.9, 1.0, 3}, {1, 0.0, 1.0, 5},                    // slice 1 best at cell 1
  };
  std::vector<std::pair<double, double>> eff;
  for (const auto& s : specs) {
    for (int n = 0; n < s.count; ++n) {
      Ue ue;
      ue.id = UeId(f.network.ues.size());
      ue.slice_id = SliceId(s.slice);
      f.network.slices[s.slice].member_ue_ids.push_back(ue.id);
      f.network.ues.push_back(ue);
      eff.emplace_back(s.e0, s.e1);
    }
  }
  f.channel = ChannelState(f.network.ues.size(), 2);
  for (std::size_t j = 0; j < eff.size(); ++j) {
    f.channel.set(UeId(j), CellId(0), eff[j].first);
    f.channel.set(UeId(j), CellId(1), eff[j].second);
  }
  return f;
}

std::vector<GoldenCheck> run_golden_checks(double R, double T, double tolerance) {
  const auto f = make_golden_fixture(R, T);
  const Network& net = f.network;
  std::vector<GoldenCheck> out;

  auto check = [&](const std::string& scheme, const std::string& what, double expected, double actual) {
    const bool pass = std::abs(expected - actual) <= tolerance * std::max(1.0, std::abs(expected));
    out.push_back({scheme, what, expected, actual, pass});
  };
  // Per-UE RBs and rates under an allocation, RBs split by effective weight.
  auto rbs_of = [&](const SchemeOutcome& o, UeId u) {
    const auto& dist = o.result.distribution;
    const CellId k = dist.cell_of(u);
    const SliceId s = net.ues[u.index()].slice_id;
    double mass = 0.0;
    for (UeId v : net.slices[s.index()].member_ue_ids) {
      if (dist.cell_of(v) == k) mass += effective_weight(1.0, f.channel.efficiency(v, k), net.slices[s.index()].epsilon);
    }
    const double ew = effective_weight(1.0, f.channel.efficiency(u, k), net.slices[s.index()].epsilon);
    return o.allocation.quota(s, k) * ew / mass;
  };
  auto rate_of = [&](const SchemeOutcome& o, UeId u) {
    return rbs_of(o, u) * f.channel.efficiency(u, o.result.distribution.cell_of(u));
  };
  auto counts = [&](const SchemeOutcome& o, const std::string& name) {
    const auto c = o.result.distribution.counts(2);
    check(name, "UEs at C1", name == "nolb" ? 17 : 14, static_cast<double>(c[0]));
    check(name, "UEs at C2", name == "nolb" ? 11 : 14, static_cast<double>(c[1]));
  };
  auto quotas = [&](const SchemeOutcome& o, const std::string& name, double a1, double a2, double b1, double b2) {
    check(name, "Q_A at C1", a1 * R, o.allocation.quota(SliceId(0), CellId(0)));
    check(name, "Q_A at C2", a2 * R, o.allocation.quota(SliceId(0), CellId(1)));
    check(name, "Q_B at C1", b1 * R, o.allocation.quota(SliceId(1), CellId(0)));
    check(name, "Q_B at C2", b2 * R, o.allocation.quota(SliceId(1), CellId(1)));
  };

  const UserDistribution argmax = [&] {
    std::vector<CellId> serving;
    for (const auto& ue : net.ues) serving.push_back(f.channel.best_cell(ue.id));
    return UserDistribution(std::move(serving));
  }();

  SchemeConfig config;
  config.lb.topology_mode = TopologyMode::Overlapping;

  const auto base = nolb(argmax, net, f.channel, config);
  counts(base, "nolb");
  check("nolb", "TND at C1", 0.85 * R, base.result.demand.tnd(CellId(0)));
  check("nolb", "TND at C2", 1.15 * R, base.result.demand.tnd(CellId(1)));
  quotas(base, "nolb", 0.4, 0.6, 0.6, 0.4);

  const auto rw = tnd_balance(argmax, net, f.channel, config);
  check("radioweaver", "logical moves", 3, static_cast<double>(rw.result.logical_moves.size()));
  check("radioweaver", "TND at C1", R, rw.result.demand.tnd(CellId(0)));
  check("radioweaver", "TND at C2", R, rw.result.demand.tnd(CellId(1)));
  quotas(rw, "radioweaver", 0.25, 0.75, 0.75, 0.25);
  for (UeId u : net.slices[0].member_ue_ids) {
    check("radioweaver", "S_A rate of UE " + std::to_string(u.value), 0.05 * R * T, rate_of(rw, u));
  }
  for (UeId u : net.slices[1].member_ue_ids) {
    check("radioweaver", "S_B RBs of UE " + std::to_string(u.value), 0.05 * R, rbs_of(rw, u));
  }

  const auto naive = naivelb(argmax, net, f.channel, config);
  counts(naive, "naivelb");
  quotas(naive, "naivelb", 0.5, 0.5, 0.5, 0.5);
  for (UeId u : net.slices[0].member_ue_ids) {
    const bool at_c1 = naive.result.distribution.cell_of(u) == CellId(0);
    check("naivelb", "S_A rate of UE " + std::to_string(u.value), at_c1 ? 0.1 * R * T : R * T / 30.0,
          rate_of(naive, u));
  }

  const auto iso = isolatedlb(argmax, net, f.channel, config);
  int moves_a = 0, moves_b = 0;
  for (const auto& m : iso.result.logical_moves) (net.ues[m.ue.index()].slice_id == SliceId(0) ? moves_a : moves_b)++;
  check("isolatedlb", "S_A moves", 0, moves_a);
  check("isolatedlb", "S_B moves", 2, moves_b);
  quotas(iso, "isolatedlb", 0.5, 0.5, 0.5, 0.5);
  for (UeId u : net.slices[1].member_ue_ids) {
    check("isolatedlb", "S_B RBs of UE " + std::to_string(u.value), 0.05 * R, rbs_of(iso, u));
  }
  check("isolatedlb", "S_A load ratio at C2", 1.5, iso.result.demand.normalized(SliceId(0), CellId(1)) / (0.5 * R));
  return out;
}

}  // namespace slicelb
