#include "slicelb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "slicelb/demand.hpp"
#include "slicelb/lb_engine.hpp"

namespace slicelb {

namespace {

using json = nlohmann::json;

enum class Suite : std::uint64_t { QuotaOptimality = 1, Complementary, QualityOptimal, SwapIsolation };

std::mt19937_64 suite_rng(std::uint64_t seed, Suite suite) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(suite)};
  return std::mt19937_64(seq);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

bool close(double a, double b, double rel = 1e-9) {
  if (a == b) return true;  // also equal infinities
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// a <= b up to relative tolerance.
bool at_most(double a, double b, double rel = 1e-9) { return a <= b || close(a, b, rel); }

Network make_network(const std::vector<double>& capacity, const std::vector<double>& quota,
                     const std::vector<double>& epsilon) {
  Network net;
  for (std::size_t k = 0; k < capacity.size(); ++k) {
    Cell c;
    c.id = CellId(k);
    c.capacity_rbs = capacity[k];
    c.position = {300.0 * static_cast<double>(k), 0.0};
    c.bandwidth_mhz = 20.0;
    net.cells.push_back(c);
  }
  for (std::size_t i = 0; i < quota.size(); ++i) {
    net.slices.push_back({SliceId(i), "s" + std::to_string(i), quota[i], epsilon[i], {}});
  }
  return net;
}

UeId add_ue(Network& net, std::size_t slice, double weight) {
  Ue ue;
  ue.id = UeId(net.ues.size());
  ue.slice_id = SliceId(slice);
  ue.weight = weight;
  net.slices[slice].member_ue_ids.push_back(ue.id);
  net.ues.push_back(ue);
  return ue.id;
}

// Random split of `total` into n positive parts.
std::vector<double> random_split(std::mt19937_64& rng, std::size_t n, double total) {
  std::vector<double> parts(n);
  double sum = 0.0;
  for (double& p : parts) sum += (p = uniform(rng, 0.2, 1.0));
  for (double& p : parts) p *= total / sum;
  return parts;
}

double random_epsilon(std::mt19937_64& rng, bool endpoints_only) {
  const int pick = uniform_int(rng, 0, endpoints_only ? 1 : 2);
  return pick == 0 ? 0.0 : pick == 1 ? 1.0 : uniform(rng, 0.05, 0.95);
}

double random_weight(std::mt19937_64& rng) { return uniform_int(rng, 0, 3) == 0 ? 5.0 : uniform(rng, 0.5, 2.0); }

// Each slice's quota at every cell, from an allocation.
std::vector<double> quota_row(const AllocationScheme& a, SliceId i) { return a.slice_row(i); }

double score_under(const Instance& inst, const UserDistribution& dist, SliceId i, std::span<const double> quota) {
  return slice_objective(inst.network, i, dist, inst.channel, quota).score;
}

// Closed-form best score of slice i over quota splits, for epsilon in {0, 1}, from the
// UEs' efficiencies at their serving cells alone.
double closed_form_best(const Instance& inst, const UserDistribution& dist, SliceId i) {
  const auto& slice = inst.network.slices[i.index()];
  double w_sum = 0.0, w_over_e = 0.0;
  for (UeId u : slice.member_ue_ids) {
    const double w = inst.network.ues[u.index()].weight;
    w_sum += w;
    w_over_e += w / inst.channel.efficiency(u, dist.cell_of(u));
  }
  if (slice.epsilon == 0.0) return slice.global_quota_rbs / w_over_e;
  double total = 0.0;
  for (UeId u : slice.member_ue_ids) {
    const double w = inst.network.ues[u.index()].weight;
    total += w * std::log(slice.global_quota_rbs * w * inst.channel.efficiency(u, dist.cell_of(u)) / w_sum);
  }
  return total;
}

std::string dump_failure(const Instance& inst, const std::string& detail) {
  json j = instance_to_json(inst);
  j["failure"] = detail;
  return j.dump(2);
}

void record_failure(SuiteReport& report, const Instance& inst, const std::string& detail) {
  if (report.passed) report.counterexample = dump_failure(inst, detail);
  report.passed = false;
}

std::string describe(const std::string& what, double got, double bound) {
  std::ostringstream s;
  s.precision(17);
  s << what << ": " << got << " vs bound " << bound;
  return s.str();
}

AllocationScheme run_allocator(const Allocator& allocator, const DemandState& demand, const Network& net) {
  return allocator ? allocator(demand, net) : allocate(demand, net);
}

// Compositions of `units` into `parts` non-negative integers.
void for_each_composition(int units, std::size_t parts, std::vector<int>& current,
                          const std::function<void(const std::vector<int>&)>& visit) {
  if (current.size() + 1 == parts) {
    current.push_back(units);
    visit(current);
    current.pop_back();
    return;
  }
  for (int n = 0; n <= units; ++n) {
    current.push_back(n);
    for_each_composition(units - n, parts, current, visit);
    current.pop_back();
  }
}

// Random UEs over `cells` cells; each UE is covered by at least one cell and served
// by a random covering cell.
Instance random_instance(std::mt19937_64& rng, std::size_t cells, std::size_t slices, int max_ues_per_slice,
                         bool endpoint_epsilons) {
  const auto capacity = [&] {
    std::vector<double> c(cells);
    for (double& v : c) v = uniform(rng, 50.0, 150.0);
    return c;
  }();
  double total = 0.0;
  for (double c : capacity) total += c;
  std::vector<double> eps(slices);
  for (double& e : eps) e = random_epsilon(rng, endpoint_epsilons);
  Instance inst{make_network(capacity, random_split(rng, slices, total), eps), {}, {}};
  std::vector<std::vector<double>> eff;
  for (std::size_t i = 0; i < slices; ++i) {
    const int n = uniform_int(rng, 1, max_ues_per_slice);
    for (int u = 0; u < n; ++u) {
      add_ue(inst.network, i, random_weight(rng));
      std::vector<double> e(cells, 0.0);
      const std::size_t home = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cells) - 1));
      for (std::size_t k = 0; k < cells; ++k) {
        if (k == home || uniform_int(rng, 0, 2) != 0) e[k] = uniform(rng, 0.15, 5.6) * 150.0;
      }
      eff.push_back(std::move(e));
    }
  }
  inst.channel = ChannelState(eff.size(), cells);
  std::vector<CellId> serving;
  for (std::size_t j = 0; j < eff.size(); ++j) {
    std::vector<std::size_t> covering;
    for (std::size_t k = 0; k < cells; ++k) {
      if (eff[j][k] > 0.0) {
        inst.channel.set(UeId(j), CellId(k), eff[j][k]);
        covering.push_back(k);
      }
    }
    serving.push_back(CellId(covering[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(covering.size()) - 1))]));
  }
  inst.distribution = UserDistribution(std::move(serving));
  return inst;
}

// Replaces capacities with the TND of `dist`, making it fully complementary. Returns
// false when some cell would get no capacity.
bool match_capacity_to(Instance& inst, const UserDistribution& dist) {
  const auto demand = compute_demand_state(inst.network, dist, inst.channel);
  for (std::size_t k = 0; k < inst.network.cells.size(); ++k) {
    const double l = demand.tnd(CellId(k));
    if (!(l > 1e-6 * inst.network.total_quota())) return false;
    inst.network.cells[k].capacity_rbs = l;
  }
  // Absorb rounding so total capacity equals total quota exactly enough for validation.
  const double drift = inst.network.total_quota() - inst.network.total_capacity();
  inst.network.cells.back().capacity_rbs += drift;
  return true;
}

}  // namespace

json instance_to_json(const Instance& inst) {
  json cells = json::array();
  for (const auto& c : inst.network.cells) cells.push_back({{"capacity_rbs", c.capacity_rbs}, {"is_macro", c.is_macro}});
  json slices = json::array();
  for (const auto& s : inst.network.slices) slices.push_back({{"quota_rbs", s.global_quota_rbs}, {"epsilon", s.epsilon}});
  json ues = json::array();
  for (const auto& u : inst.network.ues) {
    json eff = json::array();
    for (std::size_t k = 0; k < inst.network.cells.size(); ++k) eff.push_back(inst.channel.efficiency(u.id, CellId(k)));
    ues.push_back({{"slice", u.slice_id.value},
                   {"weight", u.weight},
                   {"efficiency", eff},
                   {"serving", inst.distribution.size() ? inst.distribution.cell_of(u.id).value : 0u}});
  }
  return {{"cells", cells}, {"slices", slices}, {"ues", ues}};
}

Instance instance_from_json(const json& j) {
  std::vector<double> capacity, quota, eps;
  for (const auto& c : j.at("cells")) capacity.push_back(c.at("capacity_rbs").get<double>());
  for (const auto& s : j.at("slices")) {
    quota.push_back(s.at("quota_rbs").get<double>());
    eps.push_back(s.at("epsilon").get<double>());
  }
  Instance inst{make_network(capacity, quota, eps), {}, {}};
  for (std::size_t k = 0; k < capacity.size(); ++k) inst.network.cells[k].is_macro = j.at("cells")[k].value("is_macro", false);
  const auto& ues = j.at("ues");
  inst.channel = ChannelState(ues.size(), capacity.size());
  std::vector<CellId> serving;
  for (std::size_t n = 0; n < ues.size(); ++n) {
    const UeId u = add_ue(inst.network, ues[n].at("slice").get<std::size_t>(), ues[n].at("weight").get<double>());
    const auto& eff = ues[n].at("efficiency");
    for (std::size_t k = 0; k < capacity.size(); ++k) inst.channel.set(u, CellId(k), eff[k].get<double>());
    serving.push_back(CellId(ues[n].at("serving").get<std::uint32_t>()));
  }
  inst.distribution = UserDistribution(std::move(serving));
  return inst;
}

AllocationScheme buggy_allocator(const DemandState& demand, const Network& network) {
  auto q = static_allocation(network);
  std::vector<double> v(q.values().begin(), q.values().end());
  if (network.slices.size() < 2 || network.cells.size() < 2) return q;
  const std::size_t c = network.cells.size();
  const double delta = 0.25 * std::min({v[0], v[1], v[c], v[c + 1]});
  // Push Q_00 away from D_00 and compensate in the 2x2 block.
  const double sign = demand.normalized(SliceId(0), CellId(0)) >= v[0] ? -1.0 : 1.0;
  v[0] += sign * delta;
  v[1] -= sign * delta;
  v[c] -= sign * delta;
  v[c + 1] += sign * delta;
  return AllocationScheme(std::move(v), network);
}

bool VerifyReport::all_passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteReport& s) { return s.passed; });
}

SuiteReport verify_quota_optimality(int trials, std::uint64_t seed) {
  SuiteReport report;
  report.name = "quota_optimality";
  auto rng = suite_rng(seed, Suite::QuotaOptimality);
  constexpr int kGridUnits = 100;  // step of 1% of the slice quota
  for (int t = 0; t < trials; ++t) {
    const std::size_t cells = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const std::size_t slices = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const Instance inst = random_instance(rng, cells, slices, 6, false);
    ++report.trials;
    const auto demand = compute_demand_state(inst.network, inst.distribution, inst.channel);
    for (std::size_t i = 0; i < slices; ++i) {
      const SliceId s(i);
      const auto at_demand = demand.normalized_row(s);
      const double best = score_under(inst, inst.distribution, s, at_demand);
      const double q = inst.network.slices[i].global_quota_rbs;
      double grid_best = -std::numeric_limits<double>::infinity();
      std::vector<int> comp;
      std::vector<double> quota(cells);
      for_each_composition(kGridUnits, cells, comp, [&](const std::vector<int>& n) {
        for (std::size_t k = 0; k < cells; ++k) quota[k] = q * n[k] / kGridUnits;
        grid_best = std::max(grid_best, score_under(inst, inst.distribution, s, quota));
      });
      ++report.checked;
      report.worst = std::max(report.worst, grid_best - best);
      if (!at_most(grid_best, best)) {
        record_failure(report, inst, describe("slice " + std::to_string(i) + " grid beats demand split", grid_best, best));
      }
      const double eps = inst.network.slices[i].epsilon;
      if (eps == 0.0 || eps == 1.0) {
        const double expected = closed_form_best(inst, inst.distribution, s);
        if (!close(best, expected)) {
          record_failure(report, inst, describe("slice " + std::to_string(i) + " closed-form maximum", best, expected));
        }
      }
    }
  }
  return report;
}

SuiteReport verify_complementary_runs(int trials, std::uint64_t seed, const Allocator& allocator) {
  SuiteReport report;
  report.name = "complementary_runs";
  auto rng = suite_rng(seed, Suite::Complementary);
  const int max_attempts = 50 * trials;
  while (report.checked < trials && report.trials < max_attempts) {
    ++report.trials;
    const std::size_t cells = static_cast<std::size_t>(uniform_int(rng, 2, 3));
    const std::size_t slices = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    Instance inst = random_instance(rng, cells, slices, std::max(1, 8 / static_cast<int>(slices)), true);
    if (inst.network.ues.size() > 8) continue;
    // Target: each UE at a cell within the amenability threshold of its best cell.
    LbConfig config;
    config.topology_mode = TopologyMode::Overlapping;
    std::vector<CellId> target;
    std::vector<CellId> best;
    for (const auto& ue : inst.network.ues) {
      best.push_back(inst.channel.best_cell(ue.id));
      std::vector<CellId> options;
      for (std::size_t k = 0; k < cells; ++k) {
        if (amenable(ue.id, best.back(), CellId(k), inst.channel, config.alpha)) options.push_back(CellId(k));
      }
      target.push_back(options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(options.size()) - 1))]);
    }
    if (!match_capacity_to(inst, UserDistribution(target))) continue;
    inst.distribution = UserDistribution(best);

    const auto result = run_load_balancer(inst.distribution, inst.network, inst.channel, config);
    if (!result.converged) continue;
    ++report.checked;
    Instance final_inst = inst;
    final_inst.distribution = result.distribution;
    const auto& demand = result.demand;
    for (std::size_t k = 0; k < cells; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < slices; ++i) sum += demand.normalized(SliceId(i), CellId(k));
      const double cap = inst.network.cells[k].capacity_rbs;
      report.worst = std::max(report.worst, std::abs(sum - cap) / cap - config.load_eq_tolerance);
      if (!close(sum, cap, 10 * config.load_eq_tolerance)) {
        record_failure(report, final_inst, describe("cell " + std::to_string(k) + " demand sum vs capacity", sum, cap));
      }
    }
    const auto quotas = run_allocator(allocator, demand, inst.network);
    for (std::size_t i = 0; i < slices; ++i) {
      const SliceId s(i);
      for (std::size_t k = 0; k < cells; ++k) {
        const double d = demand.normalized(s, CellId(k));
        if (!close(quotas.quota(s, CellId(k)), d, 1e-5)) {
          record_failure(report, final_inst, describe("allocator does not grant demand", quotas.quota(s, CellId(k)), d));
        }
      }
      const double got = score_under(final_inst, result.distribution, s, quota_row(quotas, s));
      const double expected = closed_form_best(final_inst, result.distribution, s);
      if (!close(got, expected, 1e-5)) {
        record_failure(report, final_inst, describe("slice " + std::to_string(i) + " below its maximum", got, expected));
      }
    }
  }
  if (report.checked < trials) {
    report.passed = false;
    if (report.counterexample.empty()) {
      report.counterexample = "only " + std::to_string(report.checked) + " converged runs in " +
                              std::to_string(report.trials) + " attempts";
    }
  }
  return report;
}

SuiteReport verify_quality_optimal(int trials, std::uint64_t seed, const Allocator& allocator) {
  SuiteReport report;
  report.name = "quality_optimal";
  auto rng = suite_rng(seed, Suite::QualityOptimal);
  const int max_attempts = 50 * trials;
  while (report.checked < trials && report.trials < max_attempts) {
    ++report.trials;
    const std::size_t cells = static_cast<std::size_t>(uniform_int(rng, 2, 3));
    const std::size_t slices = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    std::vector<double> eps(slices);
    for (double& e : eps) e = random_epsilon(rng, false);
    Instance inst{make_network(std::vector<double>(cells, 1.0), random_split(rng, slices, 100.0 * cells), eps), {}, {}};
    const int n = uniform_int(rng, static_cast<int>(slices), 8);
    std::vector<std::vector<double>> eff;
    for (int u = 0; u < n; ++u) {
      const std::size_t slice = u < static_cast<int>(slices) ? static_cast<std::size_t>(u)
                                                             : static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(slices) - 1));
      add_ue(inst.network, slice, random_weight(rng));
      // Best efficiency shared by one or two cells; the rest strictly worse or uncovered.
      const double top = uniform(rng, 1.0, 5.6) * 150.0;
      std::vector<double> e(cells);
      for (double& v : e) v = uniform_int(rng, 0, 2) == 0 ? 0.0 : top * uniform(rng, 0.1, 0.95);
      const auto a = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cells) - 1));
      e[a] = top;
      if (uniform_int(rng, 0, 1) == 1) e[(a + 1) % cells] = top;
      eff.push_back(std::move(e));
    }
    inst.channel = ChannelState(eff.size(), cells);
    for (std::size_t j = 0; j < eff.size(); ++j) {
      for (std::size_t k = 0; k < cells; ++k) {
        if (eff[j][k] > 0.0) inst.channel.set(UeId(j), CellId(k), eff[j][k]);
      }
    }
    std::vector<CellId> best;
    std::vector<std::vector<CellId>> ties;
    for (const auto& ue : inst.network.ues) {
      best.push_back(inst.channel.best_cell(ue.id));
      std::vector<CellId> t;
      for (std::size_t k = 0; k < cells; ++k) {
        if (inst.channel.efficiency(ue.id, CellId(k)) == inst.channel.efficiency(ue.id, best.back())) t.push_back(CellId(k));
      }
      ties.push_back(std::move(t));
    }
    inst.distribution = UserDistribution(best);
    if (!match_capacity_to(inst, inst.distribution)) continue;
    ++report.checked;

    LbConfig config;
    config.topology_mode = TopologyMode::Overlapping;
    const auto result = run_load_balancer(inst.distribution, inst.network, inst.channel, config);
    if (!result.logical_moves.empty() || !(result.distribution == inst.distribution)) {
      record_failure(report, inst, describe("engine moved UEs from a balanced best-cell attachment",
                                            static_cast<double>(result.logical_moves.size()), 0.0));
      continue;
    }
    const auto mine = run_allocator(allocator, result.demand, inst.network);
    std::vector<double> own_score(slices);
    for (std::size_t i = 0; i < slices; ++i) own_score[i] = score_under(inst, inst.distribution, SliceId(i), quota_row(mine, SliceId(i)));

    // Every quality-optimal distribution, by mixed-radix counting over the tie sets.
    std::vector<std::size_t> digit(ties.size(), 0);
    while (true) {
      std::vector<CellId> serving(ties.size());
      for (std::size_t j = 0; j < ties.size(); ++j) serving[j] = ties[j][digit[j]];
      const UserDistribution other(serving);
      const auto demand = compute_demand_state(inst.network, other, inst.channel);
      const auto quotas = run_allocator(allocator, demand, inst.network);
      for (std::size_t i = 0; i < slices; ++i) {
        const double s = score_under(inst, other, SliceId(i), quota_row(quotas, SliceId(i)));
        report.worst = std::max(report.worst, s - own_score[i]);
        if (!at_most(s, own_score[i], 1e-7)) {
          Instance shown = inst;
          shown.distribution = other;
          record_failure(report, shown, describe("slice " + std::to_string(i) + " scores higher elsewhere", s, own_score[i]));
        }
      }
      std::size_t pos = 0;
      while (pos < digit.size() && ++digit[pos] == ties[pos].size()) digit[pos++] = 0;
      if (pos == digit.size()) break;
    }
  }
  if (report.checked < trials) report.passed = false;
  return report;
}

SuiteReport verify_swap_isolation(int trials, std::uint64_t seed, const Allocator& allocator) {
  SuiteReport report;
  report.name = "swap_isolation";
  auto rng = suite_rng(seed, Suite::SwapIsolation);
  for (int t = 0; t < trials; ++t) {
    const std::size_t cells = static_cast<std::size_t>(uniform_int(rng, 2, 4));
    const std::size_t slices = static_cast<std::size_t>(uniform_int(rng, 2, 4));
    const Instance inst = random_instance(rng, cells, slices, 8, false);
    ++report.trials;
    const auto demand = compute_demand_state(inst.network, inst.distribution, inst.channel);
    const auto fixed = static_allocation(inst.network);
    std::optional<AllocationScheme> q;
    try {
      q = run_allocator(allocator, demand, inst.network);
    } catch (const Error& e) {
      record_failure(report, inst, std::string("allocator threw: ") + e.what());
      continue;
    }
    ++report.checked;
    for (std::size_t i = 0; i < slices; ++i) {
      double row = 0.0;
      for (std::size_t k = 0; k < cells; ++k) row += q->quota(SliceId(i), CellId(k));
      if (!close(row, inst.network.slices[i].global_quota_rbs)) {
        record_failure(report, inst, describe("slice quota sum", row, inst.network.slices[i].global_quota_rbs));
      }
    }
    for (std::size_t k = 0; k < cells; ++k) {
      double col = 0.0;
      for (std::size_t i = 0; i < slices; ++i) col += q->quota(SliceId(i), CellId(k));
      if (!close(col, inst.network.cells[k].capacity_rbs)) {
        record_failure(report, inst, describe("cell quota sum", col, inst.network.cells[k].capacity_rbs));
      }
    }
    for (std::size_t i = 0; i < slices; ++i) {
      const SliceId s(i);
      for (std::size_t k = 0; k < cells; ++k) {
        const double d = demand.normalized(s, CellId(k));
        const double moved = std::abs(q->quota(s, CellId(k)) - d);
        const double before = std::abs(fixed.quota(s, CellId(k)) - d);
        report.worst = std::max(report.worst, moved - before);
        if (!at_most(moved, before, 1e-9) && moved - before > 1e-9 * inst.network.total_capacity()) {
          record_failure(report, inst, describe("quota drifted away from demand", moved, before));
        }
      }
      const double got = score_under(inst, inst.distribution, s, quota_row(*q, s));
      const double base = score_under(inst, inst.distribution, s, quota_row(fixed, s));
      if (!at_most(base, got)) record_failure(report, inst, describe("slice scores below static", got, base));
    }
  }
  return report;
}

VerifyReport run_verification(const VerifyOptions& options) {
  VerifyReport report;
  report.suites.push_back(verify_quota_optimality(options.trials, options.seed));
  report.suites.push_back(verify_complementary_runs(options.trials, options.seed, options.allocator));
  report.suites.push_back(verify_quality_optimal(options.trials, options.seed, options.allocator));
  report.suites.push_back(
      verify_swap_isolation(options.trials * options.swap_trials_factor, options.seed, options.allocator));
  return report;
}

}  // namespace slicelb
