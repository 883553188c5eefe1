#include "slicelb/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace slicelb {

double bounded_pareto_mean(double shape, double min_value, double max_value) {
  const double a = shape, l = min_value, h = max_value;
  const double norm = 1.0 - std::pow(l / h, a);
  if (a == 1.0) return l * std::log(h / l) / norm;
  return std::pow(l, a) / norm * a / (a - 1.0) * (std::pow(l, 1.0 - a) - std::pow(h, 1.0 - a));
}

double sample_bounded_pareto(double shape, double min_value, double max_value, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double tail = 1.0 - std::pow(min_value / max_value, shape);
  return min_value / std::pow(1.0 - u * tail, 1.0 / shape);
}

std::vector<std::vector<Flow>> generate_flows(const Network& network, const ScenarioConfig& config,
                                              std::mt19937_64& rng) {
  std::vector<std::vector<Flow>> flows(network.ues.size());
  for (const auto& ue : network.ues) {
    const auto& w = config.slices[ue.slice_id.index()].workload;
    if (w.kind != WorkloadSpec::Kind::Web) continue;
    const double mean_bytes = bounded_pareto_mean(w.pareto_shape, w.min_flow_bytes, w.max_flow_bytes);
    const double per_ms = w.mean_rate_bps / (8.0 * mean_bytes) / 1000.0;
    std::exponential_distribution<double> gap(per_ms);
    double t = gap(rng);
    while (t < static_cast<double>(config.duration_ms)) {
      Flow f;
      f.ue = ue.id;
      f.id = flows[ue.id.index()].size();
      f.size_bytes = sample_bounded_pareto(w.pareto_shape, w.min_flow_bytes, w.max_flow_bytes, rng);
      f.start_ms = t;
      f.remaining_bits = 8.0 * f.size_bytes;
      flows[ue.id.index()].push_back(f);
      t += gap(rng);
    }
  }
  return flows;
}

namespace {

struct Member {
  std::size_t ue;
  double ew;
  double need;  // RBs per slot still wanted; inf when backlogged
  double given = 0.0;
};

// Splits budget among members in proportion to ew, never past a member's need.
// Returns what nobody could use.
double water_fill(std::vector<Member>& members, double budget) {
  std::vector<Member*> active;
  for (auto& m : members) {
    if (m.need - m.given > 0.0) active.push_back(&m);
  }
  while (budget > 0.0 && !active.empty()) {
    double mass = 0.0;
    for (const auto* m : active) mass += m->ew;
    bool capped = false;
    for (auto it = active.begin(); it != active.end();) {
      Member& m = **it;
      const double share = budget * m.ew / mass;
      if (m.need - m.given <= share) {
        budget -= m.need - m.given;
        m.given = m.need;
        it = active.erase(it);
        capped = true;
      } else {
        ++it;
      }
    }
    if (capped) continue;
    for (auto* m : active) m->given += budget * m->ew / mass;
    budget = 0.0;
  }
  return std::max(budget, 0.0);
}

double unmet(const std::vector<Member>& members) {
  double total = 0.0;
  for (const auto& m : members) total += m.need - m.given;
  return total;
}

}  // namespace

ThroughputReport account_throughput(const Network& network, const AllocationScheme& allocation,
                                    std::span<const double> split_epsilon, const UserDistribution& distribution,
                                    const ChannelState& channel, std::span<const double> owed_bits, double slots) {
  const std::size_t ns = network.slices.size();
  const std::size_t nc = network.cells.size();
  ThroughputReport report;
  report.rbs.assign(network.ues.size(), 0.0);
  report.efficiency.assign(network.ues.size(), 0.0);
  report.bits.assign(network.ues.size(), 0.0);

  // members[k][i]: slice i's UEs at cell k
  std::vector<std::vector<std::vector<Member>>> members(nc, std::vector<std::vector<Member>>(ns));
  for (const auto& ue : network.ues) {
    const CellId k = distribution.cell_of(ue.id);
    const double e = channel.efficiency(ue.id, k);
    report.efficiency[ue.id.index()] = e;
    if (!(e > 0.0)) continue;
    const std::size_t i = ue.slice_id.index();
    const double owed = owed_bits[ue.id.index()];
    const double need = std::isinf(owed) ? kBacklogged : owed / (e * slots);
    members[k.index()][i].push_back({ue.id.index(), effective_weight(ue.weight, e, split_epsilon[i]), need});
  }

  for (std::size_t k = 0; k < nc; ++k) {
    auto& cell = members[k];
    double leftover = 0.0;
    for (std::size_t i = 0; i < ns; ++i) leftover += water_fill(cell[i], allocation.quota(SliceId(i), CellId(k)));

    // Hand unused RBs to slices that still want more.
    for (std::size_t pass = 0; pass <= ns && leftover > 0.0; ++pass) {
      std::vector<double> want(ns);
      bool saturated = false;
      for (std::size_t i = 0; i < ns; ++i) {
        want[i] = unmet(cell[i]);
        saturated = saturated || std::isinf(want[i]);
      }
      std::vector<double> share(ns, 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        if (saturated) {
          share[i] = std::isinf(want[i]) ? allocation.quota(SliceId(i), CellId(k)) : 0.0;
        } else {
          share[i] = want[i];
        }
        total += share[i];
      }
      if (saturated && !(total > 0.0)) {
        for (std::size_t i = 0; i < ns; ++i) share[i] = std::isinf(want[i]) ? 1.0 : 0.0;
        total = std::count_if(want.begin(), want.end(), [](double w) { return std::isinf(w); });
      }
      if (!(total > 0.0)) break;
      double next = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        if (share[i] > 0.0) next += water_fill(cell[i], leftover * share[i] / total);
      }
      if (next >= leftover) break;
      leftover = next;
    }

    for (const auto& slice : cell) {
      for (const auto& m : slice) {
        report.rbs[m.ue] = m.given;
        report.bits[m.ue] = std::min(m.given * report.efficiency[m.ue] * slots, owed_bits[m.ue]);
      }
    }
  }
  return report;
}

}  // namespace slicelb
