#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "slicelb/demand.hpp"

using namespace slicelb;
using test::UeSpec;

namespace {

// UEs of the two-cell example: a datarate-fair slice with five UEs at C1 (e = T) and
// three at C2 (e = T/5), and a PF slice with 12 UEs at C1 and 8 at C2.
struct TwoCell {
  std::vector<UeSpec> ues;
  std::vector<int> serving;
  double R = 100.0, T = 5.0;
  TwoCell() {
    for (int n = 0; n < 5; ++n) ues.push_back({0, 1.0, {T, 0.0}}), serving.push_back(0);
    for (int n = 0; n < 3; ++n) ues.push_back({0, 1.0, {0.0, T / 5}}), serving.push_back(1);
    for (int n = 0; n < 12; ++n) ues.push_back({1, 1.0, {1.0, 0.9}}), serving.push_back(0);
    for (int n = 0; n < 8; ++n) ues.push_back({1, 1.0, {0.9, 1.0}}), serving.push_back(1);
  }
  Network net() const { return test::make_network({R, R}, {R, R}, {0.0, 1.0}, ues); }
};

// Independent TND: a plain loop over UEs per (slice, cell).
std::vector<double> tnd_oracle(const Network& net, const ChannelState& ch, const UserDistribution& dist) {
  std::vector<double> tnd(net.cells.size(), 0.0);
  for (const auto& s : net.slices) {
    std::vector<double> mass(net.cells.size(), 0.0);
    for (const auto& u : net.ues) {
      if (u.slice_id != s.id) continue;
      const CellId k = dist.cell_of(u.id);
      mass[k.index()] += u.weight / std::pow(ch.efficiency(u.id, k), 1.0 - s.epsilon);
    }
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (std::size_t k = 0; k < mass.size(); ++k) tnd[k] += mass[k] / total * s.global_quota_rbs;
  }
  return tnd;
}

struct Random {
  Network net;
  ChannelState ch;
  UserDistribution dist;
};

Random random_instance(std::mt19937_64& rng, int cells, int slices, int per_slice, bool drf_only = false) {
  std::uniform_real_distribution<double> eff(0.5, 6.0), w(0.5, 3.0), cap(50.0, 150.0);
  std::vector<double> caps(cells), quotas(slices), eps(slices);
  for (auto& c : caps) c = cap(rng);
  const double total = std::accumulate(caps.begin(), caps.end(), 0.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double qsum = 0.0;
  for (auto& q : quotas) qsum += (q = 0.2 + u01(rng));
  for (auto& q : quotas) q *= total / qsum;
  for (int i = 0; i < slices; ++i) eps[i] = drf_only ? 0.0 : std::vector<double>{0.0, 0.5, 1.0}[i % 3];
  std::vector<UeSpec> ues;
  std::vector<int> serving;
  std::uniform_int_distribution<int> pick(0, cells - 1);
  for (int i = 0; i < slices; ++i) {
    for (int n = 0; n < per_slice; ++n) {
      UeSpec u{i, w(rng), {}};
      for (int k = 0; k < cells; ++k) u.efficiency.push_back(eff(rng));
      ues.push_back(u);
      serving.push_back(pick(rng));
    }
  }
  return {test::make_network(caps, quotas, eps, ues), test::make_channel(ues, cells), test::at_cells(serving)};
}

}  // namespace

TEST_CASE("effective weight") {
  CHECK(effective_weight(1.0, 4.0, 1.0) == 1.0);
  CHECK(effective_weight(1.0, 4.0, 0.0) == 0.25);
  CHECK(effective_weight(2.0, 4.0, 0.5) == doctest::Approx(1.0));
  try {
    effective_weight(1.0, 0.0, 0.0);
    FAIL("expected ZeroEfficiency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroEfficiency);
  }
}

TEST_CASE("demand ratios of the two-cell example") {
  const TwoCell f;
  const auto net = f.net();
  const auto ch = test::make_channel(f.ues, 2);
  const auto dist = test::at_cells(f.serving);
  const auto pf = demand_ratios(net, SliceId(1), dist, ch);
  CHECK(pf[0] == doctest::Approx(0.6));
  CHECK(pf[1] == doctest::Approx(0.4));
  const auto drf = demand_ratios(net, SliceId(0), dist, ch);
  CHECK(drf[0] == doctest::Approx(0.25));
  CHECK(drf[1] == doctest::Approx(0.75));

  const auto state = compute_demand_state(net, dist, ch);
  CHECK(state.tnd(CellId(0)) == doctest::Approx(0.85 * f.R));
  CHECK(state.tnd(CellId(1)) == doctest::Approx(1.15 * f.R));
  CHECK(state.load_ratio(CellId(1)) == doctest::Approx(1.15));
  CHECK(state.overloaded(CellId(1)));
  CHECK(state.underloaded(CellId(0)));
  CHECK(state.max_imbalance() == doctest::Approx(0.15));
}

TEST_CASE("single cell and single-cell concentration") {
  const std::vector<UeSpec> ues = {{0, 1.0, {2.0, 1.0}}, {0, 3.0, {2.0, 1.0}}};
  const auto net = test::make_network({80, 20}, {100}, {1}, ues);
  const auto ch = test::make_channel(ues, 2);
  const auto r = demand_ratios(net, SliceId(0), test::at_cells({1, 1}), ch);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);

  const auto one = test::make_network({100}, {100}, {1}, {{0, 1.0, {2.0}}});
  const auto s = compute_demand_state(one, test::at_cells({0}), test::make_channel({{0, 1.0, {2.0}}}, 1));
  CHECK(s.tnd(CellId(0)) == doctest::Approx(100));
  CHECK(s.load_ratio(CellId(0)) == doctest::Approx(1.0));
  CHECK(s.fully_complementary(1e-12));
}

TEST_CASE("empty slice is rejected") {
  const auto net = test::make_network({100}, {50, 50}, {1, 1}, {{0, 1.0, {1.0}}});
  CHECK_THROWS_AS(demand_ratios(net, SliceId(1), test::at_cells({0}), test::make_channel({{0, 1.0, {1.0}}}, 1)),
                  Error);
}

TEST_CASE("TND matches a per-UE summation on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_instance(rng, 3, 3, 5);
    const auto state = compute_demand_state(r.net, r.dist, r.ch);
    const auto oracle = tnd_oracle(r.net, r.ch, r.dist);
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(state.tnd(CellId(k)) == doctest::Approx(oracle[k]).epsilon(1e-12));
      total += state.tnd(CellId(k));
    }
    // Every slice's normalized demands add up to its quota.
    CHECK(total == doctest::Approx(r.net.total_quota()).epsilon(1e-12));
  }
}

TEST_CASE("demand ratios ignore a common weight scale and UE order") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto r = random_instance(rng, 3, 2, 6);
    const auto base = compute_demand_state(r.net, r.dist, r.ch);

    auto scaled = r.net;
    for (auto& u : scaled.ues)
      if (u.slice_id == SliceId(0)) u.weight *= 7.5;
    const auto s = compute_demand_state(scaled, r.dist, r.ch);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s.ratio(SliceId(0), CellId(k)) == doctest::Approx(base.ratio(SliceId(0), CellId(k))));

    // Reverse the UE numbering.
    const std::size_t n = r.net.ues.size();
    std::vector<UeSpec> specs(n);
    std::vector<int> serving(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t src = n - 1 - j;
      specs[j].slice = static_cast<int>(r.net.ues[src].slice_id.index());
      specs[j].weight = r.net.ues[src].weight;
      for (std::size_t k = 0; k < 3; ++k) specs[j].efficiency.push_back(r.ch.efficiency(UeId(src), CellId(k)));
      serving[j] = static_cast<int>(r.dist.cell_of(UeId(src)).index());
    }
    std::vector<double> caps, quotas, eps;
    for (const auto& c : r.net.cells) caps.push_back(c.capacity_rbs);
    for (const auto& sl : r.net.slices) quotas.push_back(sl.global_quota_rbs), eps.push_back(sl.epsilon);
    const auto rev = compute_demand_state(test::make_network(caps, quotas, eps, specs), test::at_cells(serving),
                                          test::make_channel(specs, 3));
    for (std::size_t k = 0; k < 3; ++k) CHECK(rev.tnd(CellId(k)) == doctest::Approx(base.tnd(CellId(k))).epsilon(1e-12));
  }
}

TEST_CASE("slice objective examples") {
  const TwoCell f;
  const auto net = f.net();
  const auto ch = test::make_channel(f.ues, 2);
  const auto dist = test::at_cells(f.serving);
  const std::vector<double> q = {0.25 * f.R, 0.75 * f.R};
  const auto obj = slice_objective(net, SliceId(0), dist, ch, q);
  CHECK(obj.min_normalized_rate == doctest::Approx(0.05 * f.R * f.T));
  CHECK(obj.score == doctest::Approx(0.05 * f.R * f.T));

  const std::vector<UeSpec> one = {{0, 2.0, {3.0}}};
  const auto single = slice_objective(test::make_network({40}, {40}, {1}, one), SliceId(0), test::at_cells({0}),
                                      test::make_channel(one, 1), std::vector<double>{40.0});
  CHECK(single.weighted_log_utility == doctest::Approx(2.0 * std::log(120.0)));

  // A cell hosting UEs with zero quota.
  const auto starved = slice_objective(net, SliceId(0), dist, ch, std::vector<double>{100.0, 0.0});
  CHECK(starved.min_normalized_rate == 0.0);
  CHECK(std::isinf(starved.weighted_log_utility));
}

TEST_CASE("quota equal to normalized demand reaches the closed-form optimum") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_instance(rng, 3, 2, 5);
    const auto state = compute_demand_state(r.net, r.dist, r.ch);
    for (const auto& s : r.net.slices) {
      if (s.epsilon != 0.0 && s.epsilon != 1.0) continue;
      const auto obj = slice_objective(r.net, s.id, r.dist, r.ch, state.normalized_row(s.id));
      double W = 0.0, M = 0.0, pf = 0.0;
      for (UeId u : s.member_ue_ids) {
        const double w = r.net.ues[u.index()].weight;
        W += w;
        M += w / r.ch.efficiency(u, r.dist.cell_of(u));
      }
      for (UeId u : s.member_ue_ids) {
        const double w = r.net.ues[u.index()].weight;
        pf += w * std::log(s.global_quota_rbs * w * r.ch.efficiency(u, r.dist.cell_of(u)) / W);
      }
      if (s.epsilon == 1.0) {
        CHECK(obj.weighted_log_utility == doctest::Approx(pf).epsilon(1e-10));
      } else {
        CHECK(obj.min_normalized_rate == doctest::Approx(s.global_quota_rbs / M).epsilon(1e-10));
      }
    }
  }
}
