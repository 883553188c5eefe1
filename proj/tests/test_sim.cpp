#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "slicelb/golden.hpp"
#include "slicelb/sim.hpp"
#include "slicelb/world.hpp"

using namespace slicelb;
using test::UeSpec;

namespace {

// Macro plus two small cells, two slices, a few UEs per region.
nlohmann::json small_config() {
  return nlohmann::json::parse(R"({
    "seed": 4, "duration_ms": 3000, "control_interval_ms": 500, "scheme": "radioweaver",
    "topology": {"mode": "macro_relay", "small_count": 2, "min_separation_m": 800, "macro_region_radius_m": 850},
    "channel": {"mode": "synthetic", "macro_noise_rise_db": 14.0, "shadowing_sigma_db": 4.0},
    "mobility": {"mobile_fraction": 0.5},
    "slices": [
      {"name": "pf", "quota_share": 0.5, "epsilon": 1.0, "priority_fraction": 0.3,
       "users": [{"region": "small:0", "users": [3, 5]}, {"region": "macro", "users": [2, 3]}]},
      {"name": "drf", "quota_share": 0.5, "epsilon": 0.0,
       "users": [{"region": "small:1", "users": [3, 5]}, {"region": "macro", "users": [1, 2]}]}
    ]
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("invocation trigger") {
  const std::vector<double> last = {10.0, 20.0, 5.0};
  CHECK_FALSE(should_invoke(std::vector<double>{13.0, 17.0, 5.0}, last));
  CHECK(should_invoke(std::vector<double>{13.01, 20.0, 5.0}, last));
  CHECK(should_invoke(std::vector<double>{10.0, 20.0, 1.99}, last));
  CHECK(should_invoke(std::vector<double>{10.0, 20.0, 5.0, 7.0}, last));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(should_invoke(std::vector<double>{10.0, -inf, 5.0}, last));
}

TEST_CASE("percentile interpolates between order statistics") {
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0}, 0.1) == doctest::Approx(2.0));
  CHECK(percentile({7.0}, 0.1) == 7.0);
}

TEST_CASE("topology generation") {
  auto config = parse_scenario(small_config());
  config.topology.small_count = 4;
  config.topology.min_separation_m = 800;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto rng = make_rng(seed, Stream::Topology);
    const auto cells = generate_topology(config, rng);
    REQUIRE(cells.size() == 5);
    CHECK(cells[0].is_macro);
    CHECK(cells[0].capacity_rbs == 500.0);
    for (std::size_t a = 1; a < 5; ++a) {
      const double r = distance(cells[a].position, cells[0].position);
      CHECK(r >= 500.0);
      CHECK(r <= 700.0);
      CHECK(cells[a].capacity_rbs == 100.0);
      for (std::size_t b = a + 1; b < 5; ++b) CHECK(distance(cells[a].position, cells[b].position) >= 800.0);
    }
  }

  // Three small cells fit 1000 m apart inside the annulus; four cannot (a square
  // inscribed in the 700 m circle has sides of 990 m).
  config.topology.min_separation_m = 1000;
  config.topology.small_count = 3;
  auto rng = make_rng(1, Stream::Topology);
  CHECK(generate_topology(config, rng).size() == 4);
  config.topology.small_count = 4;
  config.topology.max_placement_attempts = 2000;
  try {
    generate_topology(config, rng);
    FAIL("expected PlacementInfeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PlacementInfeasible);
  }

  config.topology.small_count = 0;
  CHECK(generate_topology(config, rng).size() == 1);

  config.topology.mode = TopologyMode::Overlapping;
  config.topology.small_count = 4;
  const auto line = generate_topology(config, rng);
  REQUIRE(line.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(line[k].position == Vec2{500.0 * static_cast<double>(k), 0.0});
    CHECK_FALSE(line[k].is_macro);
  }
}

TEST_CASE("user placement") {
  const auto config = parse_scenario(small_config());
  const auto a = build_world(config);
  const auto b = build_world(config);
  REQUIRE(a.network.ues.size() == b.network.ues.size());
  for (std::size_t j = 0; j < a.network.ues.size(); ++j) {
    CHECK(a.network.ues[j].position == b.network.ues[j].position);
    CHECK(a.network.ues[j].weight == b.network.ues[j].weight);
  }

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = config;
    c.seed = seed;
    auto rng = make_rng(seed, Stream::Placement);
    const auto plan = plan_users(c, rng);
    int small0 = 0, macro_pf = 0;
    for (const auto& p : plan) {
      if (p.slice == SliceId(0) && p.region.kind == RegionSpec::Kind::Small) ++small0;
      if (p.slice == SliceId(0) && p.region.kind == RegionSpec::Kind::Macro) ++macro_pf;
    }
    CHECK(small0 >= 3);
    CHECK(small0 <= 5);
    CHECK(macro_pf >= 2);
    CHECK(macro_pf <= 3);

    const auto world = build_world(c);
    const auto& cells = world.channel.cells();
    for (std::size_t j = 0; j < plan.size(); ++j) {
      const Vec2 pos = world.network.ues[j].position;
      CHECK(world.channel.covers(UeId(j), pos));
      if (plan[j].region.kind == RegionSpec::Kind::Macro) {
        for (const auto& cell : cells)
          if (!cell.is_macro) CHECK(distance(pos, cell.position) > coverage_radius_m(c.channel.path_loss, cell));
      } else {
        const auto& cell = cells[1 + plan[j].region.small_index];
        CHECK(distance(pos, cell.position) <= coverage_radius_m(c.channel.path_loss, cell));
      }
    }
  }
}

TEST_CASE("mobility step") {
  Cell c;
  c.id = CellId(0);
  c.tx_power_dbm = 49.0;
  c.is_macro = true;
  c.position = {4990.0, 0.0};
  ChannelModel coverage(PathLossModel{}, {c}, 3, 1);

  Network net;
  net.cells = {c};
  for (int j = 0; j < 3; ++j) {
    Ue u;
    u.id = UeId(j);
    net.ues.push_back(u);
  }
  net.ues[0].position = {4500.0, 100.0};
  net.ues[1].position = {4500.0, 0.0};
  net.ues[1].is_mobile = true;
  net.ues[1].velocity = {0.0, 8.0467};
  net.ues[2].position = {4998.0, 0.0};
  net.ues[2].is_mobile = true;
  net.ues[2].velocity = {8.0467, 0.0};

  MobilityModel model(MobilitySpec{}, 5);
  model.step(net, 1.0, coverage);
  CHECK(net.ues[0].position == Vec2{4500.0, 100.0});
  CHECK(distance(net.ues[1].position, {4500.0, 0.0}) == doctest::Approx(8.0467));
  // Reflected off x = 5000.
  CHECK(net.ues[2].position.x == doctest::Approx(5000.0 - (4998.0 + 8.0467 - 5000.0)));
  CHECK(net.ues[2].velocity.x == doctest::Approx(-8.0467));
}

TEST_CASE("throughput accounting") {
  const auto f = make_golden_fixture();
  // Balanced distribution of the two-cell example with its final quotas.
  std::vector<CellId> serving;
  for (std::size_t j = 0; j < f.network.ues.size(); ++j) serving.push_back(f.channel.best_cell(UeId(j)));
  int moved = 0;
  for (std::size_t j = 0; j < serving.size() && moved < 3; ++j) {
    if (serving[j] == CellId(1) && f.channel.efficiency(UeId(j), CellId(0)) == 0.9) {
      serving[j] = CellId(0);
      ++moved;
    }
  }
  const UserDistribution dist(serving);
  const double R = f.R, T = f.T;
  const AllocationScheme alloc({0.25 * R, 0.75 * R, 0.75 * R, 0.25 * R}, f.network);
  const std::vector<double> eps = {0.0, 1.0};
  const std::vector<double> owed(serving.size(), kBacklogged);
  const double slots = 500;
  const auto report = account_throughput(f.network, alloc, eps, dist, f.channel, owed, slots);
  for (UeId u : f.network.slices[0].member_ue_ids) CHECK(report.bits[u.index()] == doctest::Approx(0.05 * R * T * slots));
  for (UeId u : f.network.slices[1].member_ue_ids) CHECK(report.rbs[u.index()] == doctest::Approx(0.05 * R));

  // Backlogged UEs use every RB of each cell.
  for (std::size_t k = 0; k < 2; ++k) {
    double rbs = 0.0;
    for (std::size_t j = 0; j < serving.size(); ++j)
      if (serving[j] == CellId(k)) rbs += report.rbs[j];
    CHECK(rbs == doctest::Approx(R));
  }

  // A slice with zero quota at a cell delivers nothing there.
  const AllocationScheme starve({0.0, R, R, 0.0}, f.network);
  const auto starved = account_throughput(f.network, starve, eps, dist, f.channel, owed, slots);
  for (UeId u : f.network.slices[0].member_ue_ids)
    if (dist.cell_of(u) == CellId(0)) CHECK(starved.bits[u.index()] == 0.0);

  // A small web flow is served exactly, and the spare RBs go to the other UEs.
  std::vector<double> some = owed;
  some[0] = 1000.0;
  const auto web = account_throughput(f.network, alloc, eps, dist, f.channel, some, slots);
  CHECK(web.bits[0] == doctest::Approx(1000.0));
  double rbs0 = 0.0;
  for (std::size_t j = 0; j < serving.size(); ++j)
    if (serving[j] == CellId(0)) rbs0 += web.rbs[j] * slots;
  CHECK(rbs0 == doctest::Approx(R * slots));
}

TEST_CASE("one static interval invokes the scheme once") {
  const auto f = make_golden_fixture();
  SimInputs in;
  in.network = f.network;
  in.channel = [&](std::int64_t, const Network&) { return f.channel; };
  SimOptions opt;
  opt.duration_ms = 500;
  opt.scheme_config.lb.topology_mode = TopologyMode::Overlapping;
  const auto once = simulate(in, opt);
  CHECK(once.invocations == 1);
  REQUIRE(once.load_ratios.size() == 2);
  for (const auto& s : once.load_ratios) CHECK(s.load_ratio == doctest::Approx(1.0));

  // A static world never triggers again.
  opt.duration_ms = 5000;
  const auto longer = simulate(in, opt);
  CHECK(longer.invocations == 1);
  int handovers = 0;
  for (const auto& u : longer.ues) handovers += u.handovers;
  CHECK(handovers == 3);
}

TEST_CASE("web flows are conserved") {
  auto j = small_config();
  for (auto& s : j["slices"]) s["workload"] = {{"type", "web"}};
  j["duration_ms"] = 4000;
  const auto config = parse_scenario(j);
  const auto m = run_experiment(config);
  REQUIRE_FALSE(m.flows.empty());
  std::vector<double> served(m.ues.size(), 0.0);
  int completed = 0;
  for (const auto& f : m.flows) {
    CHECK(f.remaining_bits >= 0.0);
    CHECK(f.remaining_bits <= 8.0 * f.size_bytes);
    CHECK(f.start_ms < 4000.0);
    if (f.completion_ms >= 0.0) {
      ++completed;
      CHECK(f.remaining_bits == 0.0);
      CHECK(f.completion_ms > f.start_ms);
    }
    served[f.ue.index()] += 8.0 * f.size_bytes - f.remaining_bits;
  }
  CHECK(completed > 0);
  for (const auto& u : m.ues) CHECK(u.bits == doctest::Approx(served[u.ue.index()]).epsilon(1e-6));
}

TEST_CASE("runs are byte-identical for a seed") {
  const auto config = parse_scenario(small_config());
  const auto dir = std::filesystem::temp_directory_path() / "slicelb_sim_det";
  std::filesystem::remove_all(dir);
  write_results(run_experiment(config), config, dir / "a");
  write_results(run_experiment(config), config, dir / "b");
  for (const char* name : {"load_ratios.csv", "slice_metrics.csv", "handovers.csv", "fct.csv", "manifest.json"}) {
    CAPTURE(name);
    const auto a = slurp(dir / "a" / name);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir / "b" / name));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("every scheme runs on the small scenario") {
  auto config = parse_scenario(small_config());
  for (Scheme s : all_schemes()) {
    config.scheme = s;
    const auto m = run_experiment(config);
    CHECK(m.invocations >= 1);
    CHECK(m.slices.size() == 2);
    for (const auto& u : m.ues) CHECK(u.bits > 0.0);
  }
}
