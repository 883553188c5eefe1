#include "slicelb/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace slicelb {
namespace {

constexpr std::array<double, kMaxCqi + 1> kCqiEfficiency = {
    0.0,    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
    1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
};

constexpr double kCqi1ThresholdDb = -6.0;
constexpr double kCqiStepDb = 2.0;

const PathLossCoeffs& coeffs_for(const PathLossModel& model, const Cell& cell) {
  return cell.is_macro ? model.macro : model.small;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  return out;
}

}  // namespace

double path_loss_db(const PathLossModel& model, const Cell& cell, double distance_m) {
  const auto& c = coeffs_for(model, cell);
  const double d_km = std::max(distance_m, kMinDistanceM) / 1000.0;
  return c.intercept_db + c.slope_db_per_decade * std::log10(d_km);
}

double rsrp(const PathLossModel& model, const Cell& cell, Vec2 ue_position, double shadowing_db) {
  return cell.tx_power_dbm - path_loss_db(model, cell, distance(cell.position, ue_position)) - shadowing_db;
}

double shannon_rate(double sinr_db) { return std::log2(1.0 + std::pow(10.0, sinr_db / 10.0)); }

double sinr_threshold_db(int cqi) { return kCqi1ThresholdDb + kCqiStepDb * (cqi - 1); }

int cqi_from_sinr(double sinr_db) {
  if (!(sinr_db >= kCqi1ThresholdDb)) return 0;
  const int cqi = 1 + static_cast<int>(std::floor((sinr_db - kCqi1ThresholdDb) / kCqiStepDb));
  return std::min(cqi, kMaxCqi);
}

double cqi_spectral_efficiency(int cqi) { return kCqiEfficiency[static_cast<std::size_t>(std::clamp(cqi, 0, kMaxCqi))]; }

double efficiency_from_sinr(double sinr_db, double symbols_per_rb) {
  return cqi_spectral_efficiency(cqi_from_sinr(sinr_db)) * symbols_per_rb;
}

double efficiency_from_rsrp(double rsrp_dbm, double noise_floor_dbm, double symbols_per_rb) {
  return efficiency_from_sinr(rsrp_dbm - noise_floor_dbm, symbols_per_rb);
}

double link_noise_dbm(const PathLossModel& model, const Cell& cell) {
  return model.noise_floor_dbm + (cell.is_macro ? model.macro_noise_rise_db : 0.0);
}

double coverage_radius_m(const PathLossModel& model, const Cell& cell) {
  const auto& c = coeffs_for(model, cell);
  // tx - (a + b log10(d_km)) - noise = threshold
  const double budget = cell.tx_power_dbm - link_noise_dbm(model, cell) - kCqi1ThresholdDb - c.intercept_db;
  return 1000.0 * std::pow(10.0, budget / c.slope_db_per_decade);
}

int CqiTrace::cqi_at(std::int64_t t_ms) const {
  const auto& s = samples;
  if (s.size() == 1) return s.front().cqi;
  const std::int64_t span = s.back().t_ms - s.front().t_ms;
  const std::int64_t spacing = std::max<std::int64_t>(1, span / static_cast<std::int64_t>(s.size() - 1));
  const std::int64_t period = span + spacing;
  std::int64_t rel = t_ms - s.front().t_ms;
  if (rel < 0) return s.front().cqi;
  rel %= period;
  const std::int64_t t = s.front().t_ms + rel;
  auto it = std::upper_bound(s.begin(), s.end(), t, [](std::int64_t v, const CqiSample& x) { return v < x.t_ms; });
  return std::prev(it)->cqi;
}

void check_trace(const CqiTrace& trace) {
  if (trace.samples.empty()) {
    throw Error(ErrorCode::ConfigError, "trace " + std::to_string(trace.id) + " has no samples");
  }
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& x = trace.samples[i];
    if (x.cqi < 1 || x.cqi > kMaxCqi) {
      throw Error(ErrorCode::ConfigError, "trace " + std::to_string(trace.id) + " has CQI outside [1,15]");
    }
    if (i > 0 && x.t_ms <= trace.samples[i - 1].t_ms) {
      throw Error(ErrorCode::ConfigError, "trace " + std::to_string(trace.id) + " timestamps not increasing");
    }
  }
}

CqiTrace load_trace_csv(const std::filesystem::path& path, int id, double mean_rsrp_dbm) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open trace " + path.string());
  CqiTrace trace;
  trace.id = id;
  trace.profile = path.stem().string();
  trace.mean_rsrp_dbm = mean_rsrp_dbm;
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"t_ms", "cqi"}) {
    throw Error(ErrorCode::ConfigError, "trace " + path.string() + " must start with header t_ms,cqi");
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw Error(ErrorCode::ConfigError, "malformed trace row in " + path.string());
    try {
      trace.samples.push_back({std::stoll(f[0]), std::stoi(f[1])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "non-numeric trace row in " + path.string());
    }
  }
  check_trace(trace);
  return trace;
}

std::vector<CqiTrace> load_trace_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open trace manifest " + manifest.string());
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"trace_id", "path", "mean_rsrp_dbm"}) {
    throw Error(ErrorCode::ConfigError, "manifest must start with header trace_id,path,mean_rsrp_dbm");
  }
  std::vector<CqiTrace> out;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw Error(ErrorCode::ConfigError, "malformed manifest row: " + line);
    std::filesystem::path p = f[1];
    if (p.is_relative()) p = manifest.parent_path() / p;
    try {
      out.push_back(load_trace_csv(p, std::stoi(f[0]), std::stod(f[2])));
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ConfigError, "non-numeric manifest row: " + line);
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyTraceSet, "manifest lists no traces");
  std::sort(out.begin(), out.end(), [](const CqiTrace& a, const CqiTrace& b) { return a.id < b.id; });
  return out;
}

std::vector<CqiTrace> synthesize_traces(int count, std::uint64_t seed, std::int64_t duration_ms,
                                        std::int64_t step_ms, double min_rsrp_dbm, double max_rsrp_dbm,
                                        double noise_floor_dbm) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> walk(-1, 1);
  std::vector<CqiTrace> out;
  for (int i = 0; i < count; ++i) {
    CqiTrace t;
    t.id = i;
    t.profile = "synthetic-" + std::to_string(i);
    t.mean_rsrp_dbm =
        count == 1 ? min_rsrp_dbm : min_rsrp_dbm + (max_rsrp_dbm - min_rsrp_dbm) * i / static_cast<double>(count - 1);
    // Bounded walk around the CQI the mean RSRP maps to, so shifting by the RSRP offset stays consistent.
    const int center = std::max(1, cqi_from_sinr(t.mean_rsrp_dbm - noise_floor_dbm));
    int offset = 0;
    for (std::int64_t ts = 0; ts < std::max(duration_ms, step_ms); ts += step_ms) {
      t.samples.push_back({ts, std::clamp(center + offset, 1, kMaxCqi)});
      offset = std::clamp(offset + walk(rng), -2, 2);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::size_t> bind_traces(std::span<const double> modeled_rsrp_dbm, std::span<const CqiTrace> traces) {
  if (traces.empty()) throw Error(ErrorCode::EmptyTraceSet, "no traces to bind");
  std::vector<std::size_t> out;
  out.reserve(modeled_rsrp_dbm.size());
  for (double r : modeled_rsrp_dbm) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < traces.size(); ++t) {
      const double d = std::abs(traces[t].mean_rsrp_dbm - r);
      const double db = std::abs(traces[best].mean_rsrp_dbm - r);
      if (d < db || (d == db && traces[t].id < traces[best].id)) best = t;
    }
    out.push_back(best);
  }
  return out;
}

ChannelModel::ChannelModel(PathLossModel model, std::vector<Cell> cells, std::size_t num_ues, std::uint64_t seed)
    : model_(model), cells_(std::move(cells)), num_ues_(num_ues), shadowing_(num_ues * cells_.size(), 0.0) {
  if (model_.shadowing_sigma_db > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shadow(0.0, model_.shadowing_sigma_db);
    for (double& s : shadowing_) s = shadow(rng);
  }
}

double ChannelModel::modeled_rsrp(UeId ue, CellId cell, Vec2 position) const {
  const Cell& c = cells_[cell.index()];
  return rsrp(model_, c, position, shadowing_db(ue, cell)) - (link_noise_dbm(model_, c) - model_.noise_floor_dbm);
}

void ChannelModel::attach_traces(std::vector<CqiTrace> traces, std::span<const Vec2> positions) {
  for (const auto& t : traces) check_trace(t);
  std::vector<double> strongest(num_ues_);
  for (std::size_t j = 0; j < num_ues_; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cells_.size(); ++k) best = std::max(best, modeled_rsrp(UeId(j), CellId(k), positions[j]));
    strongest[j] = best;
  }
  binding_ = bind_traces(strongest, traces);
  traces_ = std::move(traces);
  mode_ = ChannelMode::Trace;
}

ChannelState ChannelModel::at(std::int64_t t_ms, std::span<const Vec2> positions) const {
  ChannelState out(num_ues_, cells_.size());
  for (std::size_t j = 0; j < num_ues_; ++j) {
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const double r = modeled_rsrp(UeId(j), CellId(k), positions[j]);
      const double sinr = r - model_.noise_floor_dbm;
      if (cqi_from_sinr(sinr) == 0) continue;
      if (mode_ == ChannelMode::Synthetic) {
        out.set(UeId(j), CellId(k), efficiency_from_sinr(sinr, model_.symbols_per_rb), sinr);
      } else {
        // The bound trace's table efficiency, scaled by the Shannon rate of this link
        // relative to the trace's mean SINR. Coverage itself comes from the path-loss model.
        const auto& trace = traces_[binding_[j]];
        const int cqi = trace.cqi_at(t_ms);
        const double trace_sinr = trace.mean_rsrp_dbm - model_.noise_floor_dbm;
        const double scale = shannon_rate(sinr) / shannon_rate(trace_sinr);
        const double e = cqi_spectral_efficiency(cqi) * model_.symbols_per_rb * scale;
        out.set(UeId(j), CellId(k), e, sinr_threshold_db(cqi) + (sinr - trace_sinr));
      }
    }
  }
  return out;
}

bool ChannelModel::covered(Vec2 position) const {
  for (const auto& c : cells_) {
    if (cqi_from_sinr(rsrp(model_, c, position) - link_noise_dbm(model_, c)) > 0) return true;
  }
  return false;
}

bool ChannelModel::covers(UeId ue, Vec2 position) const {
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (cqi_from_sinr(modeled_rsrp(ue, CellId(k), position) - model_.noise_floor_dbm) > 0) return true;
  }
  return false;
}

}  // namespace slicelb
