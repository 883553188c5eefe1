#include "slicelb/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace slicelb {

using nlohmann::json;

namespace {

std::string topology_mode_name(TopologyMode m) { return m == TopologyMode::MacroRelay ? "macro_relay" : "overlapping"; }

RegionSpec parse_region(const json& j) {
  RegionSpec r;
  const std::string name = j.at("region").get<std::string>();
  if (name == "macro") {
    r.kind = RegionSpec::Kind::Macro;
  } else if (name.rfind("small:", 0) == 0) {
    r.kind = RegionSpec::Kind::Small;
    r.small_index = std::stoi(name.substr(6));
  } else {
    throw Error(ErrorCode::ConfigError, "unknown region '" + name + "'");
  }
  const auto& users = j.at("users");
  if (users.is_array()) {
    r.min_users = users.at(0).get<int>();
    r.max_users = users.at(1).get<int>();
  } else {
    r.min_users = r.max_users = users.get<int>();
  }
  if (j.contains("priority_fraction")) r.priority_fraction = j.at("priority_fraction").get<double>();
  return r;
}

std::string region_name(const RegionSpec& r) {
  return r.kind == RegionSpec::Kind::Macro ? "macro" : "small:" + std::to_string(r.small_index);
}

WorkloadSpec parse_workload(const json& j) {
  WorkloadSpec w;
  const std::string type = j.value("type", "backlogged");
  if (type == "backlogged") {
    w.kind = WorkloadSpec::Kind::Backlogged;
  } else if (type == "web") {
    w.kind = WorkloadSpec::Kind::Web;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown workload type '" + type + "'");
  }
  w.mean_rate_bps = j.value("mean_rate_bps", w.mean_rate_bps);
  w.pareto_shape = j.value("pareto_shape", w.pareto_shape);
  w.min_flow_bytes = j.value("min_flow_bytes", w.min_flow_bytes);
  w.max_flow_bytes = j.value("max_flow_bytes", w.max_flow_bytes);
  return w;
}

CellSpec parse_cell(const json& j, CellSpec c) {
  c.tx_power_dbm = j.value("tx_power_dbm", c.tx_power_dbm);
  c.bandwidth_mhz = j.value("bandwidth_mhz", c.bandwidth_mhz);
  c.band_id = j.value("band_id", c.band_id);
  return c;
}

json cell_json(const CellSpec& c) {
  return {{"tx_power_dbm", c.tx_power_dbm}, {"bandwidth_mhz", c.bandwidth_mhz}, {"band_id", c.band_id}};
}

PathLossCoeffs parse_coeffs(const json& j, PathLossCoeffs c) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>()};
  return c;
}

ScenarioConfig parse_impl(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  c.seed = j.value("seed", c.seed);
  c.duration_ms = j.value("duration_ms", c.duration_ms);
  c.control_interval_ms = j.value("control_interval_ms", c.control_interval_ms);
  c.accounting_step_ms = j.value("accounting_step_ms", c.accounting_step_ms);
  c.trigger_db = j.value("trigger_db", c.trigger_db);
  c.rbs_per_mhz = j.value("rbs_per_mhz", c.rbs_per_mhz);
  const std::string scheme = j.value("scheme", "radioweaver");
  const auto parsed = parse_scheme(scheme);
  if (!parsed) throw Error(ErrorCode::ConfigError, "unknown scheme '" + scheme + "'");
  c.scheme = *parsed;

  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    const std::string mode = t.value("mode", "macro_relay");
    if (mode == "macro_relay") {
      c.topology.mode = TopologyMode::MacroRelay;
    } else if (mode == "overlapping") {
      c.topology.mode = TopologyMode::Overlapping;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown topology mode '" + mode + "'");
    }
    if (t.contains("macro")) c.topology.macro = parse_cell(t.at("macro"), c.topology.macro);
    if (t.contains("small")) c.topology.small = parse_cell(t.at("small"), c.topology.small);
    c.topology.small_count = t.value("small_count", c.topology.small_count);
    c.topology.min_radius_m = t.value("min_radius_m", c.topology.min_radius_m);
    c.topology.max_radius_m = t.value("max_radius_m", c.topology.max_radius_m);
    c.topology.min_separation_m = t.value("min_separation_m", c.topology.min_separation_m);
    c.topology.overlap_spacing_m = t.value("overlap_spacing_m", c.topology.overlap_spacing_m);
    c.topology.macro_region_radius_m = t.value("macro_region_radius_m", c.topology.macro_region_radius_m);
    c.topology.max_placement_attempts = t.value("max_placement_attempts", c.topology.max_placement_attempts);
  }

  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    const std::string mode = ch.value("mode", "synthetic");
    if (mode == "synthetic") {
      c.channel.mode = ChannelMode::Synthetic;
    } else if (mode == "trace") {
      c.channel.mode = ChannelMode::Trace;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown channel mode '" + mode + "'");
    }
    auto& pl = c.channel.path_loss;
    if (ch.contains("macro_path_loss")) pl.macro = parse_coeffs(ch.at("macro_path_loss"), pl.macro);
    if (ch.contains("small_path_loss")) pl.small = parse_coeffs(ch.at("small_path_loss"), pl.small);
    pl.noise_floor_dbm = ch.value("noise_floor_dbm", pl.noise_floor_dbm);
    pl.macro_noise_rise_db = ch.value("macro_noise_rise_db", pl.macro_noise_rise_db);
    pl.shadowing_sigma_db = ch.value("shadowing_sigma_db", pl.shadowing_sigma_db);
    pl.symbols_per_rb = ch.value("symbols_per_rb", pl.symbols_per_rb);
    if (ch.contains("trace_manifest")) {
      std::filesystem::path p = ch.at("trace_manifest").get<std::string>();
      c.channel.trace_manifest = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    c.channel.synthetic_trace_count = ch.value("synthetic_trace_count", c.channel.synthetic_trace_count);
    c.channel.synthetic_trace_step_ms = ch.value("synthetic_trace_step_ms", c.channel.synthetic_trace_step_ms);
  }

  if (j.contains("mobility")) {
    const auto& m = j.at("mobility");
    c.mobility.mobile_fraction = m.value("mobile_fraction", c.mobility.mobile_fraction);
    c.mobility.speed_mps = m.value("speed_mps", c.mobility.speed_mps);
    c.mobility.boundary_m = m.value("boundary_m", c.mobility.boundary_m);
  }

  if (j.contains("algorithm")) {
    const auto& a = j.at("algorithm");
    c.algorithm.lb.alpha = a.value("alpha", c.algorithm.lb.alpha);
    c.algorithm.lb.max_rounds = a.value("max_rounds", c.algorithm.lb.max_rounds);
    c.algorithm.lb.load_eq_tolerance = a.value("load_eq_tolerance", c.algorithm.lb.load_eq_tolerance);
    c.algorithm.lb.slice_specific_phase = a.value("slice_specific_phase", c.algorithm.lb.slice_specific_phase);
    c.algorithm.mora_cascade_cap = a.value("mora_cascade_cap", c.algorithm.mora_cascade_cap);
    c.algorithm.swap.complementary_tolerance =
        a.value("complementary_tolerance", c.algorithm.swap.complementary_tolerance);
    c.algorithm.swap.min_swap_fraction = a.value("min_swap_fraction", c.algorithm.swap.min_swap_fraction);
  }
  c.algorithm.lb.topology_mode = c.topology.mode;

  for (const auto& s : j.at("slices")) {
    SliceSpec spec;
    spec.name = s.value("name", "slice" + std::to_string(c.slices.size()));
    if (s.contains("quota_share")) spec.quota_share = s.at("quota_share").get<double>();
    if (s.contains("quota_rbs")) spec.quota_rbs = s.at("quota_rbs").get<double>();
    spec.epsilon = s.value("epsilon", spec.epsilon);
    if (s.contains("users")) {
      for (const auto& r : s.at("users")) spec.regions.push_back(parse_region(r));
    }
    spec.priority_fraction = s.value("priority_fraction", spec.priority_fraction);
    spec.priority_weight = s.value("priority_weight", spec.priority_weight);
    if (s.contains("workload")) spec.workload = parse_workload(s.at("workload"));
    c.slices.push_back(std::move(spec));
  }
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  try {
    return parse_impl(j, base_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

json to_json(const ScenarioConfig& c) {
  json slices = json::array();
  for (const auto& s : c.slices) {
    json users = json::array();
    for (const auto& r : s.regions) {
      json entry = {{"region", region_name(r)}, {"users", {r.min_users, r.max_users}}};
      if (r.priority_fraction) entry["priority_fraction"] = *r.priority_fraction;
      users.push_back(entry);
    }
    json workload = {{"type", s.workload.kind == WorkloadSpec::Kind::Web ? "web" : "backlogged"}};
    if (s.workload.kind == WorkloadSpec::Kind::Web) {
      workload["mean_rate_bps"] = s.workload.mean_rate_bps;
      workload["pareto_shape"] = s.workload.pareto_shape;
      workload["min_flow_bytes"] = s.workload.min_flow_bytes;
      workload["max_flow_bytes"] = s.workload.max_flow_bytes;
    }
    json entry = {{"name", s.name},
                  {"epsilon", s.epsilon},
                  {"users", users},
                  {"priority_fraction", s.priority_fraction},
                  {"priority_weight", s.priority_weight},
                  {"workload", workload}};
    if (s.quota_share) entry["quota_share"] = *s.quota_share;
    if (s.quota_rbs) entry["quota_rbs"] = *s.quota_rbs;
    slices.push_back(entry);
  }
  const auto& pl = c.channel.path_loss;
  json channel = {{"mode", c.channel.mode == ChannelMode::Trace ? "trace" : "synthetic"},
                  {"macro_path_loss", {pl.macro.intercept_db, pl.macro.slope_db_per_decade}},
                  {"small_path_loss", {pl.small.intercept_db, pl.small.slope_db_per_decade}},
                  {"noise_floor_dbm", pl.noise_floor_dbm},
                  {"macro_noise_rise_db", pl.macro_noise_rise_db},
                  {"shadowing_sigma_db", pl.shadowing_sigma_db},
                  {"symbols_per_rb", pl.symbols_per_rb},
                  {"synthetic_trace_count", c.channel.synthetic_trace_count},
                  {"synthetic_trace_step_ms", c.channel.synthetic_trace_step_ms}};
  if (c.channel.trace_manifest) channel["trace_manifest"] = c.channel.trace_manifest->generic_string();
  const auto& t = c.topology;
  return {{"seed", c.seed},
          {"duration_ms", c.duration_ms},
          {"control_interval_ms", c.control_interval_ms},
          {"accounting_step_ms", c.accounting_step_ms},
          {"trigger_db", c.trigger_db},
          {"scheme", std::string(scheme_name(c.scheme))},
          {"rbs_per_mhz", c.rbs_per_mhz},
          {"topology",
           {{"mode", topology_mode_name(t.mode)},
            {"macro", cell_json(t.macro)},
            {"small", cell_json(t.small)},
            {"small_count", t.small_count},
            {"min_radius_m", t.min_radius_m},
            {"max_radius_m", t.max_radius_m},
            {"min_separation_m", t.min_separation_m},
            {"overlap_spacing_m", t.overlap_spacing_m},
            {"macro_region_radius_m", t.macro_region_radius_m},
            {"max_placement_attempts", t.max_placement_attempts}}},
          {"channel", channel},
          {"mobility",
           {{"mobile_fraction", c.mobility.mobile_fraction},
            {"speed_mps", c.mobility.speed_mps},
            {"boundary_m", c.mobility.boundary_m}}},
          {"algorithm",
           {{"alpha", c.algorithm.lb.alpha},
            {"max_rounds", c.algorithm.lb.max_rounds},
            {"load_eq_tolerance", c.algorithm.lb.load_eq_tolerance},
            {"slice_specific_phase", c.algorithm.lb.slice_specific_phase},
            {"mora_cascade_cap", c.algorithm.mora_cascade_cap},
            {"complementary_tolerance", c.algorithm.swap.complementary_tolerance},
            {"min_swap_fraction", c.algorithm.swap.min_swap_fraction}}},
          {"slices", slices}};
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> out;
  auto add = [&](std::string_view code, const std::string& detail) { out.push_back(std::string(code) + ": " + detail); };
  constexpr std::string_view kConfig = "ConfigError";

  if (c.duration_ms <= 0) add(kConfig, "duration_ms must be positive");
  if (c.control_interval_ms <= 0) add(kConfig, "control_interval_ms must be positive");
  if (c.accounting_step_ms <= 0 || (c.control_interval_ms > 0 && c.control_interval_ms % c.accounting_step_ms != 0)) {
    add(kConfig, "accounting_step_ms must be positive and divide control_interval_ms");
  }
  if (!(c.trigger_db >= 0.0)) add(kConfig, "trigger_db must be non-negative");
  if (!(c.rbs_per_mhz > 0.0)) add(kConfig, "rbs_per_mhz must be positive");

  const auto& t = c.topology;
  const bool overlapping = t.mode == TopologyMode::Overlapping;
  if (t.small_count < 0) add(kConfig, "small_count must be non-negative");
  if (overlapping && t.small_count < 1) add(kConfig, "overlapping mode needs small cells");
  if (!(t.small.bandwidth_mhz > 0.0) || (!overlapping && !(t.macro.bandwidth_mhz > 0.0))) {
    add(to_string(ViolationCode::NonPositiveCapacity), "cell bandwidth must be positive");
  }
  if (!(t.min_radius_m <= t.max_radius_m)) add(kConfig, "min_radius_m exceeds max_radius_m");
  if (c.channel.path_loss.shadowing_sigma_db < 0.0) add(kConfig, "shadowing_sigma_db must be non-negative");
  if (!(c.channel.path_loss.macro.slope_db_per_decade > 0.0) || !(c.channel.path_loss.small.slope_db_per_decade > 0.0)) {
    add(kConfig, "path-loss slopes must be positive");
  }
  if (c.mobility.mobile_fraction < 0.0 || c.mobility.mobile_fraction > 1.0) add(kConfig, "mobile_fraction outside [0,1]");
  if (!(c.mobility.speed_mps >= 0.0)) add(kConfig, "speed_mps must be non-negative");
  if (!(c.algorithm.lb.alpha > 0.0 && c.algorithm.lb.alpha <= 1.0)) add(kConfig, "alpha outside (0,1]");
  if (c.algorithm.lb.max_rounds < 1) add(kConfig, "max_rounds must be at least 1");
  if (c.algorithm.mora_cascade_cap < 0) add(kConfig, "mora_cascade_cap must be non-negative");

  if (c.channel.mode == ChannelMode::Trace) {
    if (c.channel.trace_manifest) {
      if (!std::filesystem::exists(*c.channel.trace_manifest)) {
        add("MissingTraceManifest", c.channel.trace_manifest->string() + " does not exist");
      }
    } else if (c.channel.synthetic_trace_count <= 0) {
      add("MissingTraceManifest", "trace mode needs trace_manifest or synthetic_trace_count");
    }
  }

  if (c.slices.empty()) add(kConfig, "no slices");
  const double capacity = c.rbs_per_mhz * ((overlapping ? 0.0 : t.macro.bandwidth_mhz) +
                                           std::max(0, t.small_count) * t.small.bandwidth_mhz);
  double quota = 0.0;
  for (const auto& s : c.slices) {
    if (s.quota_share.has_value() == s.quota_rbs.has_value()) {
      add(kConfig, "slice '" + s.name + "' needs exactly one of quota_share, quota_rbs");
      continue;
    }
    const double q = s.quota_share ? *s.quota_share * capacity : *s.quota_rbs;
    if (!(q > 0.0)) add(to_string(ViolationCode::NonPositiveQuota), "slice '" + s.name + "'");
    quota += q;
    if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) add(to_string(ViolationCode::EpsilonOutOfRange), "slice '" + s.name + "'");
    if (!(s.priority_weight > 0.0)) add(to_string(ViolationCode::NonPositiveWeight), "slice '" + s.name + "'");
    if (s.priority_fraction < 0.0 || s.priority_fraction > 1.0) add(kConfig, "priority_fraction outside [0,1]");
    for (const auto& r : s.regions) {
      if (r.priority_fraction && (*r.priority_fraction < 0.0 || *r.priority_fraction > 1.0)) {
        add(kConfig, "region priority_fraction outside [0,1]");
      }
    }
    int max_total = 0;
    for (const auto& r : s.regions) {
      if (r.min_users < 0 || r.min_users > r.max_users) add(kConfig, "bad user range in slice '" + s.name + "'");
      if (r.kind == RegionSpec::Kind::Small && (r.small_index < 0 || r.small_index >= t.small_count)) {
        add(kConfig, "slice '" + s.name + "' references missing small cell " + std::to_string(r.small_index));
      }
      if (r.kind == RegionSpec::Kind::Macro && overlapping) add(kConfig, "macro region without a macro cell");
      max_total += r.max_users;
    }
    if (max_total == 0) add(kConfig, "slice '" + s.name + "' can never have users");
    if (s.workload.kind == WorkloadSpec::Kind::Web) {
      const auto& w = s.workload;
      if (!(w.mean_rate_bps > 0.0) || !(w.pareto_shape > 1.0) || !(w.min_flow_bytes > 0.0) ||
          !(w.max_flow_bytes > w.min_flow_bytes)) {
        add(kConfig, "invalid web workload in slice '" + s.name + "'");
      }
    }
  }
  if (capacity > 0.0 && !approx_equal(quota, capacity, AllocationScheme::kSumTolerance)) {
    std::ostringstream msg;
    msg << "slice quotas sum to " << quota << " RBs but cells provide " << capacity;
    add(to_string(ViolationCode::QuotaCapacityMismatch), msg.str());
  }
  return out;
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace slicelb
