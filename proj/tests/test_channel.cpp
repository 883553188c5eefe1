#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "slicelb/channel.hpp"

using namespace slicelb;

namespace {

Cell macro_at_origin() {
  Cell c;
  c.id = CellId(0);
  c.tx_power_dbm = 49.0;
  c.is_macro = true;
  return c;
}

Cell small_at(double x, int id = 0) {
  Cell c;
  c.id = CellId(id);
  c.position = {x, 0.0};
  c.tx_power_dbm = 35.0;
  return c;
}

}  // namespace

TEST_CASE("rsrp follows the log-distance formula") {
  const PathLossModel model;
  const Cell m = macro_at_origin();
  CHECK(rsrp(model, m, {1000.0, 0.0}) == doctest::Approx(-79.1).epsilon(1e-12));
  CHECK(rsrp(model, m, {0.0, 10000.0}) == doctest::Approx(-116.7).epsilon(1e-12));
  // Below 1 m the distance is clamped.
  CHECK(rsrp(model, m, {0.0, 0.0}) == rsrp(model, m, {1.0, 0.0}));
  CHECK(rsrp(model, m, {0.3, 0.0}) == rsrp(model, m, {1.0, 0.0}));
  CHECK(rsrp(model, m, {0.0, 0.0}, 4.0) == doctest::Approx(rsrp(model, m, {1.0, 0.0}) - 4.0));
}

TEST_CASE("efficiency mapping") {
  const double noise = -87.0;
  CHECK(efficiency_from_rsrp(-140.0, noise) == 0.0);
  // Just under the CQI-1 threshold is still out of coverage.
  CHECK(efficiency_from_rsrp(noise - 6.01, noise) == 0.0);
  CHECK(efficiency_from_rsrp(noise - 6.0, noise) == doctest::Approx(0.1523 * 150));

  const double top = noise + sinr_threshold_db(15);
  CHECK(efficiency_from_rsrp(top + 10.0, noise) == efficiency_from_rsrp(top, noise));
  CHECK(efficiency_from_rsrp(top, noise) == doctest::Approx(5.5547 * 150));

  double prev = 0.0;
  for (double r = -120.0; r <= -40.0; r += 0.05) {
    const double e = efficiency_from_rsrp(r, noise);
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(cqi_from_sinr(-6.0) == 1);
  CHECK(cqi_from_sinr(21.99) == 14);
  CHECK(cqi_from_sinr(22.0) == 15);
}

TEST_CASE("coverage radius is where the CQI-1 threshold is met") {
  const PathLossModel model;
  const Cell c = small_at(0.0);
  const double r = coverage_radius_m(model, c);
  CHECK(efficiency_from_rsrp(rsrp(model, c, {r * 0.999, 0.0}), model.noise_floor_dbm) > 0.0);
  CHECK(efficiency_from_rsrp(rsrp(model, c, {r * 1.001, 0.0}), model.noise_floor_dbm) == 0.0);
}

TEST_CASE("trace binding picks the nearest mean, lower id on ties") {
  auto trace = [](int id, double mean) {
    CqiTrace t;
    t.id = id;
    t.mean_rsrp_dbm = mean;
    t.samples = {{0, 7}};
    return t;
  };
  const std::vector<CqiTrace> one = {trace(0, -90)};
  const std::vector<double> modeled = {-60.0, -85.0, -130.0};
  for (auto b : bind_traces(modeled, one)) CHECK(b == 0);

  const std::vector<CqiTrace> two = {trace(0, -80), trace(1, -100)};
  const std::vector<double> at85 = {-85.0};
  CHECK(bind_traces(at85, two)[0] == 0);
  const std::vector<double> at90 = {-90.0};
  CHECK(bind_traces(at90, two)[0] == 0);
  const std::vector<CqiTrace> swapped = {trace(0, -100), trace(1, -80)};
  CHECK(bind_traces(at90, swapped)[0] == 0);

  try {
    bind_traces(at85, std::vector<CqiTrace>{});
    FAIL("expected EmptyTraceSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTraceSet);
  }
}

TEST_CASE("trace lookup repeats with the trace period") {
  CqiTrace t;
  t.samples = {{0, 5}, {100, 7}};
  CHECK(t.cqi_at(0) == 5);
  CHECK(t.cqi_at(99) == 5);
  CHECK(t.cqi_at(150) == 7);
  CHECK(t.cqi_at(250) == 5);
  CHECK(t.cqi_at(350) == 7);

  CqiTrace bad;
  bad.samples = {{0, 16}};
  CHECK_THROWS_AS(check_trace(bad), Error);
  bad.samples = {{100, 3}, {50, 3}};
  CHECK_THROWS_AS(check_trace(bad), Error);
  bad.samples.clear();
  CHECK_THROWS_AS(check_trace(bad), Error);
}

TEST_CASE("synthetic channel is static and symmetric") {
  ChannelModel model(PathLossModel{}, {small_at(0.0, 0), small_at(400.0, 1)}, 2, 7);
  const std::vector<Vec2> pos = {{200.0, 0.0}, {50.0, 30.0}};
  const auto a = model.at(0, pos);
  const auto b = model.at(12345, pos);
  CHECK(a == b);
  CHECK(a.efficiency(UeId(0), CellId(0)) > 0.0);
  CHECK(a.efficiency(UeId(0), CellId(0)) == a.efficiency(UeId(0), CellId(1)));
  CHECK(a.quality_db(UeId(0), CellId(0)) == a.quality_db(UeId(0), CellId(1)));
  CHECK(a.efficiency(UeId(1), CellId(0)) >= a.efficiency(UeId(1), CellId(1)));
}

TEST_CASE("trace mode scales the table entry by the link's Shannon rate") {
  ChannelModel model(PathLossModel{}, {small_at(0.0)}, 1, 3);
  const std::vector<Vec2> pos = {{100.0, 0.0}};
  CqiTrace t;
  t.mean_rsrp_dbm = -80.0;
  t.samples = {{0, 4}, {500, 9}};
  model.attach_traces({t}, pos);
  REQUIRE(model.mode() == ChannelMode::Trace);

  // 35 - (140.7 + 36.7 log10(0.1)) = -69.0 dBm, so link SINR 18 dB against trace SINR 7 dB.
  const double link = 18.0, mean = 7.0;
  const double scale = std::log2(1 + std::pow(10.0, link / 10)) / std::log2(1 + std::pow(10.0, mean / 10));
  const auto s = model.at(600, pos);
  CHECK(s.efficiency(UeId(0), CellId(0)) == doctest::Approx(2.4063 * 150 * scale).epsilon(1e-9));
  CHECK(s.quality_db(UeId(0), CellId(0)) == doctest::Approx(sinr_threshold_db(9) + link - mean));
  const auto s0 = model.at(100, pos);
  CHECK(s0.efficiency(UeId(0), CellId(0)) == doctest::Approx(0.6016 * 150 * scale).epsilon(1e-9));
}

TEST_CASE("macro noise rise lowers the macro link only") {
  PathLossModel pl;
  pl.macro_noise_rise_db = 10.0;
  Cell m = macro_at_origin();
  Cell s = small_at(300.0, 1);
  ChannelModel model(pl, {m, s}, 1, 1);
  const Vec2 p{600.0, 0.0};
  CHECK(model.modeled_rsrp(UeId(0), CellId(0), p) == doctest::Approx(rsrp(pl, m, p) - 10.0));
  CHECK(model.modeled_rsrp(UeId(0), CellId(1), p) == doctest::Approx(rsrp(pl, s, p)));
  PathLossModel flat;
  CHECK(coverage_radius_m(pl, m) < coverage_radius_m(flat, m));
}

TEST_CASE("trace manifest loading") {
  const auto dir = std::filesystem::temp_directory_path() / "slicelb_trace_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.csv") << "t_ms,cqi\n0,3\n100,4\n";
    std::ofstream(dir / "m.csv") << "trace_id,path,mean_rsrp_dbm\n0,a.csv,-85.5\n";
  }
  const auto traces = load_trace_manifest(dir / "m.csv");
  REQUIRE(traces.size() == 1);
  CHECK(traces[0].mean_rsrp_dbm == -85.5);
  CHECK(traces[0].samples.size() == 2);
  CHECK(traces[0].cqi_at(120) == 4);
  CHECK_THROWS_AS(load_trace_manifest(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}
