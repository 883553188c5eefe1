#include "slicelb/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace slicelb {

unsigned sweep_threads() {
  if (const char* env = std::getenv("SLICELB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double relative_gain_pct(double value, double reference) {
  if (reference == value) return 0.0;
  if (!(reference > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (value / reference - 1.0) * 100.0;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& config, int seeds, const std::vector<Scheme>& schemes,
                      const std::filesystem::path& out_dir, unsigned threads) {
  if (seeds < 1) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one seed");
  std::vector<Scheme> run_list = schemes;
  if (std::find(run_list.begin(), run_list.end(), Scheme::NoLB) == run_list.end()) run_list.push_back(Scheme::NoLB);

  struct Job {
    std::uint64_t seed;
    Scheme scheme;
    bool write;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < seeds; ++s) {
    for (Scheme scheme : run_list) {
      const bool requested = std::find(schemes.begin(), schemes.end(), scheme) != schemes.end();
      jobs.push_back({config.seed + static_cast<std::uint64_t>(s), scheme, requested});
    }
  }

  std::vector<MetricsBundle> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        ScenarioConfig c = config;
        c.seed = jobs[i].seed;
        c.scheme = jobs[i].scheme;
        results[i] = run_experiment(c);
        if (!out_dir.empty() && jobs[i].write) {
          write_results(results[i], c,
                        out_dir / ("seed_" + std::to_string(c.seed)) / std::string(scheme_name(c.scheme)));
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads ? threads : sweep_threads(),
                                                             static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!jobs[i].write) continue;
    const MetricsBundle* reference = nullptr;
    for (std::size_t r = 0; r < jobs.size(); ++r) {
      if (jobs[r].seed == jobs[i].seed && jobs[r].scheme == Scheme::NoLB) reference = &results[r];
    }
    const auto& m = results[i];
    double static_ho = 0.0, mobile_ho = 0.0;
    int statics = 0, mobiles = 0;
    for (const auto& u : m.ues) {
      (u.is_mobile ? mobile_ho : static_ho) += u.handovers;
      (u.is_mobile ? mobiles : statics)++;
    }
    const double in_band = load_ratio_fraction_within(m, 0.9, 1.1);
    for (std::size_t s = 0; s < m.slices.size(); ++s) {
      const auto& mine = m.slices[s];
      const auto& ref = reference->slices[s];
      double weight = 0.0;
      for (const auto& u : m.ues) {
        if (u.slice == mine.slice) weight += u.weight;
      }
      SweepRow row;
      row.seed = jobs[i].seed;
      row.scheme = jobs[i].scheme;
      row.slice = mine;
      row.pf_improvement_pct =
          weight > 0.0 ? (std::exp((mine.weighted_pf_metric - ref.weighted_pf_metric) / weight) - 1.0) * 100.0 : 0.0;
      row.p10_improvement_pct = relative_gain_pct(mine.p10_throughput_mbps, ref.p10_throughput_mbps);
      row.fct_improvement_pct = (mine.median_fct_ms > 0.0 && ref.median_fct_ms > 0.0)
                                    ? (1.0 - mine.median_fct_ms / ref.median_fct_ms) * 100.0
                                    : 0.0;
      row.handovers_per_static_ue = statics ? static_ho / statics : 0.0;
      row.handovers_per_mobile_ue = mobiles ? mobile_ho / mobiles : 0.0;
      row.load_ratio_within_10pct = in_band;
      out.rows.push_back(row);
    }
  }
  if (!out_dir.empty()) write_summary(out, out_dir / "summary.csv");
  return out;
}

void write_summary(const SweepResult& result, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ostringstream s;
  s << std::setprecision(10);
  s << "seed,scheme,slice_id,slice_name,epsilon,weighted_pf_metric,p10_throughput_mbps,mean_throughput_mbps,"
       "median_fct_ms,pf_improvement_pct,p10_improvement_pct,fct_improvement_pct,handovers_per_static_ue,"
       "handovers_per_mobile_ue,load_ratio_within_10pct\n";
  for (const auto& r : result.rows) {
    s << r.seed << ',' << scheme_name(r.scheme) << ',' << r.slice.slice.value << ',' << r.slice.name << ','
      << r.slice.epsilon << ',' << r.slice.weighted_pf_metric << ',' << r.slice.p10_throughput_mbps << ','
      << r.slice.mean_throughput_mbps << ',' << r.slice.median_fct_ms << ',' << r.pf_improvement_pct << ','
      << r.p10_improvement_pct << ',' << r.fct_improvement_pct << ',' << r.handovers_per_static_ue << ','
      << r.handovers_per_mobile_ue << ',' << r.load_ratio_within_10pct << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  f << s.str();
}

}  // namespace slicelb
