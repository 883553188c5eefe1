#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slicelb/types.hpp"

namespace slicelb {

struct PathLossCoeffs {
  double intercept_db = 0.0;
  double slope_db_per_decade = 0.0;  // distance in km
};

// Log-distance urban macro/micro model (TR 36.942 coefficients by default).
struct PathLossModel {
  PathLossCoeffs macro{128.1, 37.6};
  PathLossCoeffs small{140.7, 36.7};
  double noise_floor_dbm = -87.0;
  // Interference-plus-noise rise on the macro band over the small-cell bands.
  double macro_noise_rise_db = 0.0;
  double shadowing_sigma_db = 0.0;
  double symbols_per_rb = 150.0;
};

inline constexpr int kMaxCqi = 15;
inline constexpr double kMinDistanceM = 1.0;

double path_loss_db(const PathLossModel& model, const Cell& cell, double distance_m);

// tx - PL(d) - shadowing; distances below 1 m are clamped.
double rsrp(const PathLossModel& model, const Cell& cell, Vec2 ue_position, double shadowing_db = 0.0);

// SINR threshold (dB) for CQI index 1..15: -6 dB in 2 dB steps.
double sinr_threshold_db(int cqi);

// log2(1 + SINR), bits/s/Hz.
double shannon_rate(double sinr_db);
// Highest CQI whose threshold is met; 0 when below CQI 1.
int cqi_from_sinr(double sinr_db);
// Spectral efficiency in bits/symbol of the LTE 4-bit CQI table; 0 for CQI 0.
double cqi_spectral_efficiency(int cqi);

double efficiency_from_sinr(double sinr_db, double symbols_per_rb = 150.0);
double efficiency_from_rsrp(double rsrp_dbm, double noise_floor_dbm, double symbols_per_rb = 150.0);

// Distance at which the cell's SINR (no shadowing) drops to the CQI-1 threshold.
double coverage_radius_m(const PathLossModel& model, const Cell& cell);

// Noise floor seen on this cell's links, including the macro rise.
double link_noise_dbm(const PathLossModel& model, const Cell& cell);

struct CqiSample {
  std::int64_t t_ms = 0;
  int cqi = 1;
};

struct CqiTrace {
  int id = 0;
  std::string profile;
  std::vector<CqiSample> samples;
  double mean_rsrp_dbm = 0.0;

  // Sample in effect at t. The trace repeats with period last.t + mean spacing.
  int cqi_at(std::int64_t t_ms) const;
};

// Throws Error(ConfigError) when samples are empty, unordered or out of range.
void check_trace(const CqiTrace& trace);

// CSV with header `t_ms,cqi`.
CqiTrace load_trace_csv(const std::filesystem::path& path, int id, double mean_rsrp_dbm);

// Manifest CSV with header `trace_id,path,mean_rsrp_dbm`; relative paths resolve against the manifest.
std::vector<CqiTrace> load_trace_manifest(const std::filesystem::path& manifest);

// Wideband CQI traces with means spread evenly over [min_rsrp, max_rsrp]. Each trace
// walks within +-2 CQI of the index its mean RSRP maps to under the noise floor.
std::vector<CqiTrace> synthesize_traces(int count, std::uint64_t seed, std::int64_t duration_ms,
                                        std::int64_t step_ms, double min_rsrp_dbm, double max_rsrp_dbm,
                                        double noise_floor_dbm);

// For each UE, index of the trace whose mean RSRP is nearest its modeled RSRP.
// Ties go to the lowest trace id. Throws EmptyTraceSet.
std::vector<std::size_t> bind_traces(std::span<const double> modeled_rsrp_dbm, std::span<const CqiTrace> traces);

enum class ChannelMode { Synthetic, Trace };

// Produces ChannelState snapshots for a fixed set of cells and UEs.
// Shadowing is sampled once per (UE, cell) from the seed and frozen.
class ChannelModel {
 public:
  ChannelModel(PathLossModel model, std::vector<Cell> cells, std::size_t num_ues, std::uint64_t seed);

  const PathLossModel& model() const { return model_; }
  const std::vector<Cell>& cells() const { return cells_; }

  // Binds every UE to a trace using its strongest-cell RSRP at the given positions
  // and switches to trace mode.
  void attach_traces(std::vector<CqiTrace> traces, std::span<const Vec2> positions);

  ChannelMode mode() const { return mode_; }
  const std::vector<std::size_t>& trace_binding() const { return binding_; }

  double shadowing_db(UeId ue, CellId cell) const { return shadowing_[ue.index() * cells_.size() + cell.index()]; }
  // RSRP after shadowing, lowered by the macro noise rise so that every link is
  // compared against the common noise floor.
  double modeled_rsrp(UeId ue, CellId cell, Vec2 position) const;

  ChannelState at(std::int64_t t_ms, std::span<const Vec2> positions) const;

  // True when some cell covers the position (ignoring shadowing).
  bool covered(Vec2 position) const;
  // Same, with the UE's own shadowing.
  bool covers(UeId ue, Vec2 position) const;

 private:
  PathLossModel model_;
  std::vector<Cell> cells_;
  std::size_t num_ues_;
  std::vector<double> shadowing_;
  ChannelMode mode_ = ChannelMode::Synthetic;
  std::vector<CqiTrace> traces_;
  std::vector<std::size_t> binding_;
};

}  // namespace slicelb
