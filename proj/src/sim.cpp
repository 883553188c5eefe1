#include "slicelb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "slicelb/world.hpp"

namespace slicelb {

bool should_invoke(std::span<const double> quality_now_db, std::span<const double> quality_at_last_db,
                   double trigger_db) {
  if (quality_now_db.size() != quality_at_last_db.size()) return true;
  for (std::size_t j = 0; j < quality_now_db.size(); ++j) {
    const double now = quality_now_db[j], last = quality_at_last_db[j];
    if (!std::isfinite(now) || !std::isfinite(last)) {
      if (now != last) return true;
      continue;
    }
    if (std::abs(now - last) > trigger_db) return true;
  }
  return false;
}

double percentile(std::vector<double> values, double fraction) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = fraction * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::vector<double> serving_quality(const UserDistribution& dist, const ChannelState& channel) {
  std::vector<double> q(dist.size());
  for (std::size_t j = 0; j < dist.size(); ++j) q[j] = channel.quality_db(UeId(j), dist.cell_of(UeId(j)));
  return q;
}

}  // namespace

MetricsBundle simulate(SimInputs inputs, const SimOptions& options) {
  Network& net = inputs.network;
  const std::size_t n = net.ues.size();
  MetricsBundle out;
  inputs.flows.resize(n);
  inputs.backlogged_slice.resize(net.slices.size(), true);

  std::vector<int> handovers(n, 0);
  std::vector<double> delivered(n, 0.0);
  std::vector<std::size_t> next_open(n, 0);  // first flow not yet completed, per UE
  bool any_web = false;
  for (const auto& ue : net.ues) any_web = any_web || !inputs.backlogged_slice[ue.slice_id.index()];
  const std::int64_t step_ms = any_web ? options.accounting_step_ms : options.control_interval_ms;

  UserDistribution serving;
  std::optional<PreviousInvocation> previous;
  std::vector<double> quality_at_last;
  std::optional<SchemeOutcome> current;

  const std::int64_t intervals = (options.duration_ms + options.control_interval_ms - 1) / options.control_interval_ms;
  for (std::int64_t i = 0; i < intervals; ++i) {
    const std::int64_t t = i * options.control_interval_ms;
    if (i > 0 && inputs.move) inputs.move(net, static_cast<double>(options.control_interval_ms) / 1000.0);
    const ChannelState channel = inputs.channel(t, net);

    if (i == 0) {
      std::vector<CellId> attach(n);
      for (std::size_t j = 0; j < n; ++j) attach[j] = channel.best_cell(UeId(j));
      serving = UserDistribution(std::move(attach));
    }
    if (i == 0 || should_invoke(serving_quality(serving, channel), quality_at_last, options.trigger_db)) {
      const UserDistribution initial = initialize_distribution(previous, channel, options.trigger_db);
      current = run_scheme(options.scheme, initial, net, channel, options.scheme_config);
      const auto& final = current->result.distribution;
      for (const auto& h : diff_physical_handovers(serving, final)) ++handovers[h.ue.index()];
      serving = final;
      previous = PreviousInvocation{final, channel};
      quality_at_last = serving_quality(serving, channel);

      const auto demand = compute_demand_state(net, serving, channel);
      for (std::size_t k = 0; k < net.cells.size(); ++k) {
        out.load_ratios.push_back({out.invocations, t, CellId(k), demand.load_ratio(CellId(k))});
      }
      ++out.invocations;
    }

    const std::int64_t end = std::min(t + options.control_interval_ms, options.duration_ms);
    for (std::int64_t s = t; s < end; s += step_ms) {
      const std::int64_t len = std::min(step_ms, end - s);
      std::vector<double> owed(n, kBacklogged);
      for (const auto& ue : net.ues) {
        if (inputs.backlogged_slice[ue.slice_id.index()]) continue;
        const std::size_t j = ue.id.index();
        double total = 0.0;
        const auto& flows = inputs.flows[j];
        for (std::size_t f = next_open[j]; f < flows.size() && flows[f].start_ms <= static_cast<double>(s); ++f) {
          total += flows[f].remaining_bits;
        }
        owed[j] = total;
      }
      const auto report = account_throughput(net, current->allocation, current->split_epsilon, serving, channel, owed,
                                             static_cast<double>(len));
      for (std::size_t j = 0; j < n; ++j) {
        delivered[j] += report.bits[j];
        if (!std::isfinite(owed[j]) || !(report.bits[j] > 0.0)) continue;
        // FIFO service; completion times interpolate within the step.
        auto& flows = inputs.flows[j];
        double served = 0.0;
        while (next_open[j] < flows.size() && flows[next_open[j]].start_ms <= static_cast<double>(s)) {
          Flow& f = flows[next_open[j]];
          const double take = std::min(f.remaining_bits, report.bits[j] - served);
          f.remaining_bits -= take;
          served += take;
          if (f.remaining_bits > 1e-6 * 8.0 * f.size_bytes) break;
          f.remaining_bits = 0.0;
          f.completion_ms = static_cast<double>(s) + static_cast<double>(len) * served / report.bits[j];
          ++next_open[j];
        }
      }
    }
  }

  const double seconds = static_cast<double>(options.duration_ms) / 1000.0;
  for (const auto& ue : net.ues) {
    const std::size_t j = ue.id.index();
    out.ues.push_back({ue.id, ue.slice_id, ue.weight, ue.is_mobile, handovers[j], delivered[j],
                       delivered[j] / seconds / 1e6});
  }
  for (const auto& s : net.slices) {
    SliceMetrics m{s.id, s.name, s.epsilon, 0.0, 0.0, 0.0, -1.0};
    std::vector<double> rates;
    std::vector<double> fcts;
    for (UeId u : s.member_ue_ids) {
      const auto& um = out.ues[u.index()];
      rates.push_back(um.mean_mbps);
      m.weighted_pf_metric += um.weight * std::log(std::max(um.mean_mbps, kMinRateMbps));
      for (const auto& f : inputs.flows[u.index()]) {
        if (f.completion_ms >= 0.0) fcts.push_back(f.completion_ms - f.start_ms);
      }
    }
    if (!rates.empty()) {
      m.p10_throughput_mbps = percentile(rates, 0.1);
      double sum = 0.0;
      for (double r : rates) sum += r;
      m.mean_throughput_mbps = sum / static_cast<double>(rates.size());
    }
    if (!fcts.empty()) m.median_fct_ms = percentile(fcts, 0.5);
    out.slices.push_back(m);
  }
  for (auto& flows : inputs.flows) {
    for (auto& f : flows) out.flows.push_back(f);
  }
  return out;
}

SimOptions sim_options(const ScenarioConfig& config) {
  SimOptions o;
  o.duration_ms = config.duration_ms;
  o.control_interval_ms = config.control_interval_ms;
  o.accounting_step_ms = config.accounting_step_ms;
  o.trigger_db = config.trigger_db;
  o.scheme = config.scheme;
  o.scheme_config = config.algorithm;
  return o;
}

MetricsBundle run_experiment(const ScenarioConfig& config) {
  const auto problems = validate_scenario(config);
  if (!problems.empty()) throw Error(ErrorCode::ConfigError, problems.front());

  World world = build_world(config);
  SimInputs inputs;
  inputs.network = world.network;
  auto workload_rng = make_rng(config.seed, Stream::Workload);
  inputs.flows = generate_flows(world.network, config, workload_rng);
  for (const auto& s : config.slices) inputs.backlogged_slice.push_back(s.workload.kind == WorkloadSpec::Kind::Backlogged);

  auto channel = std::make_shared<ChannelModel>(std::move(world.channel));
  auto mobility = std::make_shared<MobilityModel>(std::move(world.mobility));
  inputs.channel = [channel](std::int64_t t, const Network& net) {
    std::vector<Vec2> positions;
    positions.reserve(net.ues.size());
    for (const auto& ue : net.ues) positions.push_back(ue.position);
    return channel->at(t, positions);
  };
  inputs.move = [channel, mobility](Network& net, double dt) { mobility->step(net, dt, *channel); };

  const auto violations = validate_topology(inputs.network, inputs.channel(0, inputs.network));
  if (!violations.empty()) {
    throw Error(ErrorCode::ConfigError,
                std::string(to_string(violations.front().code)) + ": " + violations.front().detail);
  }
  return simulate(std::move(inputs), sim_options(config));
}

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  f << text;
}

}  // namespace

void write_results(const MetricsBundle& m, const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::ostringstream load;
  load << "invocation,time_ms,cell_id,load_ratio\n";
  for (const auto& s : m.load_ratios) {
    load << s.invocation << ',' << s.time_ms << ',' << s.cell.value << ',' << num(s.load_ratio) << '\n';
  }
  write_file(out_dir / "load_ratios.csv", load.str());

  std::ostringstream slices;
  slices << "slice_id,slice_name,epsilon,weighted_pf_metric,p10_throughput_mbps,mean_throughput_mbps,median_fct_ms\n";
  for (const auto& s : m.slices) {
    slices << s.slice.value << ',' << s.name << ',' << num(s.epsilon) << ',' << num(s.weighted_pf_metric) << ','
           << num(s.p10_throughput_mbps) << ',' << num(s.mean_throughput_mbps) << ',' << num(s.median_fct_ms) << '\n';
  }
  write_file(out_dir / "slice_metrics.csv", slices.str());

  std::ostringstream ho;
  ho << "ue_id,slice_id,is_mobile,handovers\n";
  for (const auto& u : m.ues) ho << u.ue.value << ',' << u.slice.value << ',' << (u.is_mobile ? 1 : 0) << ',' << u.handovers << '\n';
  write_file(out_dir / "handovers.csv", ho.str());

  std::ostringstream fct;
  fct << "ue_id,slice_id,flow_id,size_bytes,start_ms,completion_ms,fct_ms,completed\n";
  for (const auto& f : m.flows) {
    const bool done = f.completion_ms >= 0.0;
    fct << f.ue.value << ',' << m.ues[f.ue.index()].slice.value << ',' << f.id << ',' << num(f.size_bytes) << ','
        << num(f.start_ms) << ',' << num(f.completion_ms) << ',' << num(done ? f.completion_ms - f.start_ms : -1.0)
        << ',' << (done ? 1 : 0) << '\n';
  }
  write_file(out_dir / "fct.csv", fct.str());

  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(config);
  nlohmann::json manifest = {{"config_hash", hash.str()},
                             {"seed", config.seed},
                             {"scheme", std::string(scheme_name(config.scheme))},
                             {"invocations", m.invocations},
                             {"num_ues", m.ues.size()},
                             {"num_cells", config.topology.mode == TopologyMode::Overlapping
                                               ? config.topology.small_count
                                               : config.topology.small_count + 1},
                             {"config", to_json(config)}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

double load_ratio_fraction_within(const MetricsBundle& metrics, double low, double high) {
  if (metrics.load_ratios.empty()) return 0.0;
  const auto inside = std::count_if(metrics.load_ratios.begin(), metrics.load_ratios.end(),
                                    [&](const LoadSample& s) { return s.load_ratio >= low && s.load_ratio <= high; });
  return static_cast<double>(inside) / static_cast<double>(metrics.load_ratios.size());
}

}  // namespace slicelb
