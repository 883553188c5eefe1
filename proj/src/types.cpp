#include "slicelb/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slicelb {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroEfficiency: return "ZeroEfficiency";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::UnreachableUE: return "UnreachableUE";
    case ErrorCode::EmptyTraceSet: return "EmptyTraceSet";
    case ErrorCode::KeySetMismatch: return "KeySetMismatch";
    case ErrorCode::PlacementInfeasible: return "PlacementInfeasible";
    case ErrorCode::InvalidAllocation: return "InvalidAllocation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::NonDenseId: return "NonDenseId";
    case ViolationCode::NonPositiveCapacity: return "NonPositiveCapacity";
    case ViolationCode::NonPositiveQuota: return "NonPositiveQuota";
    case ViolationCode::QuotaCapacityMismatch: return "QuotaCapacityMismatch";
    case ViolationCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ViolationCode::OverlappingMembership: return "OverlappingMembership";
    case ViolationCode::MembershipMismatch: return "MembershipMismatch";
    case ViolationCode::UnknownSlice: return "UnknownSlice";
    case ViolationCode::NonPositiveWeight: return "NonPositiveWeight";
    case ViolationCode::ChannelShapeMismatch: return "ChannelShapeMismatch";
    case ViolationCode::NonFiniteEfficiency: return "NonFiniteEfficiency";
    case ViolationCode::UnreachableUE: return "UnreachableUE";
  }
  return "Unknown";
}

bool approx_equal(double a, double b, double rel_tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel_tol * scale;
}

double Network::total_capacity() const {
  double total = 0.0;
  for (const auto& c : cells) total += c.capacity_rbs;
  return total;
}

double Network::total_quota() const {
  double total = 0.0;
  for (const auto& s : slices) total += s.global_quota_rbs;
  return total;
}

const Cell* Network::macro_cell() const {
  for (const auto& c : cells) {
    if (c.is_macro) return &c;
  }
  return nullptr;
}

ChannelState::ChannelState(std::size_t num_ues, std::size_t num_cells)
    : num_ues_(num_ues),
      num_cells_(num_cells),
      efficiency_(num_ues * num_cells, 0.0),
      quality_db_(num_ues * num_cells, -std::numeric_limits<double>::infinity()) {}

void ChannelState::set(UeId ue, CellId cell, double efficiency) {
  const double q = efficiency > 0.0 ? 10.0 * std::log10(efficiency) : -std::numeric_limits<double>::infinity();
  set(ue, cell, efficiency, q);
}

void ChannelState::set(UeId ue, CellId cell, double efficiency, double quality_db) {
  efficiency_[slot(ue, cell)] = efficiency;
  quality_db_[slot(ue, cell)] = quality_db;
}

CellId ChannelState::best_cell(UeId ue) const {
  double best = 0.0;
  std::size_t best_k = num_cells_;
  for (std::size_t k = 0; k < num_cells_; ++k) {
    const double e = efficiency_[ue.index() * num_cells_ + k];
    if (e > best) {
      best = e;
      best_k = k;
    }
  }
  if (best_k == num_cells_) {
    throw Error(ErrorCode::UnreachableUE, "UE " + std::to_string(ue.value) + " has no covering cell");
  }
  return CellId(best_k);
}

std::vector<std::size_t> UserDistribution::counts(std::size_t num_cells) const {
  std::vector<std::size_t> out(num_cells, 0);
  for (CellId c : serving_) ++out[c.index()];
  return out;
}

AllocationScheme::AllocationScheme(std::vector<double> quota, const Network& network)
    : num_slices_(network.slices.size()), num_cells_(network.cells.size()), quota_(std::move(quota)) {
  if (quota_.size() != num_slices_ * num_cells_) {
    throw Error(ErrorCode::InvalidAllocation, "quota matrix has wrong shape");
  }
  for (double q : quota_) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::InvalidAllocation, "quota must be finite and non-negative");
    }
  }
  for (std::size_t i = 0; i < num_slices_; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < num_cells_; ++k) sum += quota_[i * num_cells_ + k];
    if (!approx_equal(sum, network.slices[i].global_quota_rbs, kSumTolerance)) {
      std::ostringstream msg;
      msg << "slice " << i << " quotas sum to " << sum << ", expected " << network.slices[i].global_quota_rbs;
      throw Error(ErrorCode::InvalidAllocation, msg.str());
    }
  }
  for (std::size_t k = 0; k < num_cells_; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < num_slices_; ++i) sum += quota_[i * num_cells_ + k];
    if (!approx_equal(sum, network.cells[k].capacity_rbs, kSumTolerance)) {
      std::ostringstream msg;
      msg << "cell " << k << " quotas sum to " << sum << ", expected " << network.cells[k].capacity_rbs;
      throw Error(ErrorCode::InvalidAllocation, msg.str());
    }
  }
}

std::vector<double> AllocationScheme::slice_row(SliceId slice) const {
  const auto begin = quota_.begin() + static_cast<std::ptrdiff_t>(slice.index() * num_cells_);
  return {begin, begin + static_cast<std::ptrdiff_t>(num_cells_)};
}

std::vector<Violation> validate_topology(const Network& network, const ChannelState& channel) {
  std::vector<Violation> out;
  auto add = [&](ViolationCode code, std::string detail) { out.push_back({code, std::move(detail)}); };

  for (std::size_t k = 0; k < network.cells.size(); ++k) {
    const auto& c = network.cells[k];
    if (c.id.index() != k) add(ViolationCode::NonDenseId, "cell at position " + std::to_string(k));
    if (!(c.capacity_rbs > 0.0)) add(ViolationCode::NonPositiveCapacity, "cell " + std::to_string(k));
  }
  for (std::size_t i = 0; i < network.slices.size(); ++i) {
    const auto& s = network.slices[i];
    if (s.id.index() != i) add(ViolationCode::NonDenseId, "slice at position " + std::to_string(i));
    if (!(s.global_quota_rbs > 0.0)) add(ViolationCode::NonPositiveQuota, "slice " + std::to_string(i));
    if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) add(ViolationCode::EpsilonOutOfRange, "slice " + std::to_string(i));
  }
  if (!approx_equal(network.total_quota(), network.total_capacity(), AllocationScheme::kSumTolerance)) {
    std::ostringstream msg;
    msg << "slice quotas sum to " << network.total_quota() << " but cell capacities sum to "
        << network.total_capacity();
    add(ViolationCode::QuotaCapacityMismatch, msg.str());
  }

  // Membership: each UE listed by exactly the slice its slice_id names.
  std::vector<int> listed_by(network.ues.size(), -1);
  for (std::size_t i = 0; i < network.slices.size(); ++i) {
    for (UeId u : network.slices[i].member_ue_ids) {
      if (u.index() >= network.ues.size()) {
        add(ViolationCode::MembershipMismatch, "slice " + std::to_string(i) + " lists unknown UE");
        continue;
      }
      if (listed_by[u.index()] >= 0) {
        add(ViolationCode::OverlappingMembership, "UE " + std::to_string(u.value));
      } else {
        listed_by[u.index()] = static_cast<int>(i);
      }
    }
  }
  for (std::size_t j = 0; j < network.ues.size(); ++j) {
    const auto& u = network.ues[j];
    if (u.id.index() != j) add(ViolationCode::NonDenseId, "UE at position " + std::to_string(j));
    if (!(u.weight > 0.0)) add(ViolationCode::NonPositiveWeight, "UE " + std::to_string(j));
    if (u.slice_id.index() >= network.slices.size()) {
      add(ViolationCode::UnknownSlice, "UE " + std::to_string(j));
    } else if (listed_by[j] != static_cast<int>(u.slice_id.index())) {
      add(ViolationCode::MembershipMismatch, "UE " + std::to_string(j));
    }
  }

  if (channel.num_ues() != network.ues.size() || channel.num_cells() != network.cells.size()) {
    add(ViolationCode::ChannelShapeMismatch, "channel state does not match network dimensions");
    return out;
  }
  for (std::size_t j = 0; j < network.ues.size(); ++j) {
    bool covered = false;
    for (std::size_t k = 0; k < network.cells.size(); ++k) {
      const double e = channel.efficiency(UeId(j), CellId(k));
      if (!std::isfinite(e) || e < 0.0) {
        add(ViolationCode::NonFiniteEfficiency, "UE " + std::to_string(j) + " cell " + std::to_string(k));
      } else if (e > 0.0) {
        covered = true;
      }
    }
    if (!covered) add(ViolationCode::UnreachableUE, "UE " + std::to_string(j));
  }
  return out;
}

}  // namespace slicelb
