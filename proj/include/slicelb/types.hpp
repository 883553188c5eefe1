#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slicelb {

// Identifiers are dense indices assigned when a scenario is loaded:
// cells[k].id == k, slices[i].id == i, ues[j].id == j.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}
  constexpr explicit Id(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit Id(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(Id, Id) = default;
};

using CellId = Id<struct CellTag>;
using SliceId = Id<struct SliceTag>;
using UeId = Id<struct UeTag>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(Vec2, Vec2) = default;
};

double distance(Vec2 a, Vec2 b);

enum class ErrorCode {
  ZeroEfficiency,
  EmptySlice,
  UnreachableUE,
  EmptyTraceSet,
  KeySetMismatch,
  PlacementInfeasible,
  InvalidAllocation,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Cell {
  CellId id;
  double capacity_rbs = 0.0;  // R_k, resource blocks per slot
  Vec2 position;
  double tx_power_dbm = 0.0;
  double bandwidth_mhz = 0.0;
  bool is_macro = false;
  int band_id = 0;
};

struct Slice {
  SliceId id;
  std::string name;
  double global_quota_rbs = 0.0;  // Q_i, summed across all cells
  double epsilon = 1.0;           // 1 = weighted PF, 0 = weighted datarate fairness
  std::vector<UeId> member_ue_ids;
};

struct Ue {
  UeId id;
  SliceId slice_id;
  double weight = 1.0;
  Vec2 position;
  Vec2 velocity;
  bool is_mobile = false;
};

struct Network {
  std::vector<Cell> cells;
  std::vector<Slice> slices;
  std::vector<Ue> ues;

  double total_capacity() const;
  double total_quota() const;
  // First macro cell, if any.
  const Cell* macro_cell() const;
};

// Per-(UE, cell) deliverable bits per RB. Zero means out of coverage.
// quality_db is the wideband channel measure the handover trigger compares.
class ChannelState {
 public:
  ChannelState() = default;
  ChannelState(std::size_t num_ues, std::size_t num_cells);

  std::size_t num_ues() const { return num_ues_; }
  std::size_t num_cells() const { return num_cells_; }

  double efficiency(UeId ue, CellId cell) const { return efficiency_[slot(ue, cell)]; }
  double quality_db(UeId ue, CellId cell) const { return quality_db_[slot(ue, cell)]; }

  // Sets efficiency; quality defaults to 10*log10(efficiency), -inf when uncovered.
  void set(UeId ue, CellId cell, double efficiency);
  void set(UeId ue, CellId cell, double efficiency, double quality_db);

  // Covering cell with the highest efficiency; ties go to the lowest cell id.
  // Throws UnreachableUE when no cell covers the UE.
  CellId best_cell(UeId ue) const;

  friend bool operator==(const ChannelState&, const ChannelState&) = default;

 private:
  std::size_t slot(UeId ue, CellId cell) const { return ue.index() * num_cells_ + cell.index(); }

  std::size_t num_ues_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<double> efficiency_;
  std::vector<double> quality_db_;
};

class UserDistribution {
 public:
  UserDistribution() = default;
  explicit UserDistribution(std::vector<CellId> serving) : serving_(std::move(serving)) {}

  std::size_t size() const { return serving_.size(); }
  CellId cell_of(UeId ue) const { return serving_[ue.index()]; }
  void assign(UeId ue, CellId cell) { serving_[ue.index()] = cell; }
  std::span<const CellId> serving() const { return serving_; }

  // Number of UEs served by each cell.
  std::vector<std::size_t> counts(std::size_t num_cells) const;

  friend bool operator==(const UserDistribution&, const UserDistribution&) = default;

 private:
  std::vector<CellId> serving_;
};

// Q_ik: quota of slice i at cell k. Construction enforces
// sum_k Q_ik = Q_i and sum_i Q_ik = R_k to 1e-9 relative, and Q_ik >= 0.
class AllocationScheme {
 public:
  static constexpr double kSumTolerance = 1e-9;

  AllocationScheme(std::vector<double> quota, const Network& network);

  std::size_t num_slices() const { return num_slices_; }
  std::size_t num_cells() const { return num_cells_; }
  double quota(SliceId slice, CellId cell) const {
    return quota_[slice.index() * num_cells_ + cell.index()];
  }
  std::span<const double> values() const { return quota_; }
  std::vector<double> slice_row(SliceId slice) const;

  friend bool operator==(const AllocationScheme&, const AllocationScheme&) = default;

 private:
  std::size_t num_slices_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<double> quota_;
};

enum class ViolationCode {
  NonDenseId,
  NonPositiveCapacity,
  NonPositiveQuota,
  QuotaCapacityMismatch,
  EpsilonOutOfRange,
  OverlappingMembership,
  MembershipMismatch,
  UnknownSlice,
  NonPositiveWeight,
  ChannelShapeMismatch,
  NonFiniteEfficiency,
  UnreachableUE,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_topology(const Network& network, const ChannelState& channel);

// Relative comparison used by every sum invariant in the library.
bool approx_equal(double a, double b, double rel_tol);

}  // namespace slicelb

template <class Tag>
struct std::hash<slicelb::Id<Tag>> {
  std::size_t operator()(slicelb::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
