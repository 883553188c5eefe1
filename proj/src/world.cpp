#include "slicelb/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace slicelb {

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) { return std::mt19937_64(stream_seed(seed, stream)); }

namespace {

Cell make_cell(std::size_t id, const CellSpec& spec, Vec2 position, bool is_macro, double rbs_per_mhz) {
  Cell c;
  c.id = CellId(id);
  c.capacity_rbs = spec.bandwidth_mhz * rbs_per_mhz;
  c.position = position;
  c.tx_power_dbm = spec.tx_power_dbm;
  c.bandwidth_mhz = spec.bandwidth_mhz;
  c.is_macro = is_macro;
  c.band_id = spec.band_id;
  return c;
}

Vec2 uniform_in_disc(Vec2 center, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

}  // namespace

std::vector<Cell> generate_topology(const ScenarioConfig& config, std::mt19937_64& rng) {
  const auto& t = config.topology;
  std::vector<Cell> cells;
  if (t.mode == TopologyMode::Overlapping) {
    for (int k = 0; k < t.small_count; ++k) {
      cells.push_back(make_cell(cells.size(), t.small, {k * t.overlap_spacing_m, 0.0}, false, config.rbs_per_mhz));
    }
    return cells;
  }

  cells.push_back(make_cell(0, t.macro, {0.0, 0.0}, true, config.rbs_per_mhz));
  std::uniform_real_distribution<double> radius2(t.min_radius_m * t.min_radius_m, t.max_radius_m * t.max_radius_m);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  // Whole layouts are drawn and rejected together; placing one cell at a time tends to
  // paint itself into a corner when the separation is tight.
  for (int attempt = 0; attempt < t.max_placement_attempts; ++attempt) {
    std::vector<Vec2> layout;
    for (int k = 0; k < t.small_count; ++k) {
      const double r = std::sqrt(radius2(rng));
      const double a = angle(rng);
      layout.push_back({r * std::cos(a), r * std::sin(a)});
    }
    bool ok = true;
    for (std::size_t x = 0; x < layout.size() && ok; ++x) {
      for (std::size_t y = x + 1; y < layout.size() && ok; ++y) ok = distance(layout[x], layout[y]) >= t.min_separation_m;
    }
    if (!ok) continue;
    for (const Vec2& p : layout) cells.push_back(make_cell(cells.size(), t.small, p, false, config.rbs_per_mhz));
    return cells;
  }
  throw Error(ErrorCode::PlacementInfeasible, "could not place " + std::to_string(t.small_count) +
                                                  " small cells after " + std::to_string(t.max_placement_attempts) +
                                                  " attempts");
}

std::vector<UserPlan> plan_users(const ScenarioConfig& config, std::mt19937_64& rng) {
  std::vector<UserPlan> plan;
  for (std::size_t i = 0; i < config.slices.size(); ++i) {
    const auto& s = config.slices[i];
    // Priority is drawn per region where the region sets its own fraction, and over the
    // remaining UEs of the slice otherwise.
    auto prioritize = [&](std::vector<std::size_t> members, double fraction) {
      const auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t u = 0; u < count; ++u) plan[members[u]].weight = s.priority_weight;
    };
    std::vector<std::size_t> pooled;
    std::vector<std::pair<std::vector<std::size_t>, double>> own;
    for (const auto& r : s.regions) {
      std::uniform_int_distribution<int> count(r.min_users, r.max_users);
      const int n = count(rng);
      std::vector<std::size_t> members;
      for (int u = 0; u < n; ++u) {
        members.push_back(plan.size());
        plan.push_back({SliceId(i), r, 1.0});
      }
      if (r.priority_fraction) {
        own.emplace_back(std::move(members), *r.priority_fraction);
      } else {
        pooled.insert(pooled.end(), members.begin(), members.end());
      }
    }
    for (auto& [members, fraction] : own) prioritize(std::move(members), fraction);
    prioritize(std::move(pooled), s.priority_fraction);
  }
  return plan;
}

Network place_users(const ScenarioConfig& config, const std::vector<Cell>& cells, const std::vector<UserPlan>& plan,
                    const ChannelModel& channel, std::mt19937_64& rng) {
  const auto& pl = config.channel.path_loss;
  std::vector<const Cell*> smalls;
  for (const auto& c : cells) {
    if (!c.is_macro) smalls.push_back(&c);
  }
  auto inside_small = [&](Vec2 p) {
    return std::any_of(smalls.begin(), smalls.end(),
                       [&](const Cell* c) { return distance(c->position, p) <= coverage_radius_m(pl, *c); });
  };

  Network net;
  net.cells = cells;
  for (std::size_t i = 0; i < config.slices.size(); ++i) {
    const double capacity = [&] {
      double total = 0.0;
      for (const auto& c : cells) total += c.capacity_rbs;
      return total;
    }();
    const auto& s = config.slices[i];
    net.slices.push_back({SliceId(i), s.name, s.quota_share ? *s.quota_share * capacity : *s.quota_rbs, s.epsilon, {}});
  }

  for (std::size_t j = 0; j < plan.size(); ++j) {
    const auto& p = plan[j];
    Ue ue;
    ue.id = UeId(j);
    ue.slice_id = p.slice;
    ue.weight = p.weight;
    bool placed = false;
    for (int attempt = 0; attempt < config.topology.max_placement_attempts && !placed; ++attempt) {
      Vec2 pos;
      if (p.region.kind == RegionSpec::Kind::Small) {
        const Cell& c = *smalls.at(static_cast<std::size_t>(p.region.small_index));
        pos = uniform_in_disc(c.position, coverage_radius_m(pl, c), rng);
      } else {
        pos = uniform_in_disc({0.0, 0.0}, config.topology.macro_region_radius_m, rng);
        if (inside_small(pos)) continue;
      }
      placed = channel.covers(ue.id, pos);
      if (placed) ue.position = pos;
    }
    if (!placed) throw Error(ErrorCode::PlacementInfeasible, "no covered position for UE " + std::to_string(j));
    net.slices[p.slice.index()].member_ue_ids.push_back(ue.id);
    net.ues.push_back(ue);
  }
  return net;
}

void assign_mobility(Network& network, const MobilitySpec& spec, std::mt19937_64& rng) {
  const std::size_t n = network.ues.size();
  const auto mobile = static_cast<std::size_t>(std::lround(spec.mobile_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mobile));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (std::size_t m = 0; m < mobile; ++m) {
    auto& ue = network.ues[order[m]];
    const double a = angle(rng);
    ue.is_mobile = true;
    ue.velocity = {spec.speed_mps * std::cos(a), spec.speed_mps * std::sin(a)};
  }
}

void MobilityModel::step(Network& network, double dt_s, const ChannelModel& coverage) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double b = spec_.boundary_m;
  for (auto& ue : network.ues) {
    if (!ue.is_mobile) continue;
    Vec2 next{ue.position.x + ue.velocity.x * dt_s, ue.position.y + ue.velocity.y * dt_s};
    if (next.x > b || next.x < -b) {
      next.x = next.x > b ? 2 * b - next.x : -2 * b - next.x;
      ue.velocity.x = -ue.velocity.x;
    }
    if (next.y > b || next.y < -b) {
      next.y = next.y > b ? 2 * b - next.y : -2 * b - next.y;
      ue.velocity.y = -ue.velocity.y;
    }
    if (coverage.covers(ue.id, next)) {
      ue.position = next;
    } else {
      const double a = angle(rng_);
      const double speed = std::hypot(ue.velocity.x, ue.velocity.y);
      ue.velocity = {speed * std::cos(a), speed * std::sin(a)};
    }
  }
}

World build_world(const ScenarioConfig& config) {
  auto topo_rng = make_rng(config.seed, Stream::Topology);
  auto cells = generate_topology(config, topo_rng);
  auto place_rng = make_rng(config.seed, Stream::Placement);
  const auto plan = plan_users(config, place_rng);
  ChannelModel channel(config.channel.path_loss, cells, plan.size(), stream_seed(config.seed, Stream::Shadowing));
  Network network = place_users(config, cells, plan, channel, place_rng);

  auto mobility_rng = make_rng(config.seed, Stream::Mobility);
  assign_mobility(network, config.mobility, mobility_rng);

  if (config.channel.mode == ChannelMode::Trace) {
    std::vector<CqiTrace> traces;
    if (config.channel.trace_manifest) {
      traces = load_trace_manifest(*config.channel.trace_manifest);
    } else {
      const auto& pl = config.channel.path_loss;
      // Means spread from the edge of coverage to 30 dB above it.
      const double edge = pl.noise_floor_dbm + sinr_threshold_db(1);
      traces = synthesize_traces(config.channel.synthetic_trace_count, stream_seed(config.seed, Stream::Traces),
                                 config.duration_ms, config.channel.synthetic_trace_step_ms, edge, edge + 30.0,
                                 pl.noise_floor_dbm);
    }
    std::vector<Vec2> positions;
    for (const auto& ue : network.ues) positions.push_back(ue.position);
    channel.attach_traces(std::move(traces), positions);
  }
  return {std::move(network), std::move(channel), MobilityModel(config.mobility, std::move(mobility_rng))};
}

}  // namespace slicelb
