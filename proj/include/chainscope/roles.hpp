#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "chainscope/nullmodel.hpp"

namespace chainscope {

enum class Role : std::uint8_t { Miner, Collector, Customer, Seller };

inline constexpr std::array<Role, 4> kAllRoles{Role::Miner, Role::Collector, Role::Customer, Role::Seller};

std::string_view role_name(Role role);

/// Independent role flags; a node may hold several.
struct RoleLabel {
  bool miner = false;
  bool collector = false;
  bool customer = false;
  bool seller = false;

  bool has(Role role) const;
  bool any() const { return miner || collector || customer || seller; }
  bool operator==(const RoleLabel&) const = default;
};

/// miner:     out_value - in_value   > T(out - in value)
/// collector: in_value - out_value   > T(in - out value)
/// customer:  out_degree - in_degree > T(out - in degree)
/// seller:    in_degree - out_degree > T(in - out degree)
RoleLabel classify(const NodeMetrics& metrics, const SignificanceThresholds& thresholds);

/// Labels for every node; reserved nodes are never labeled.
std::vector<RoleLabel> classify_all(const TxGraph& graph, std::span<const NodeMetrics> metrics,
                                    const SignificanceThresholds& thresholds);

std::vector<NodeId> nodes_with_role(std::span<const RoleLabel> labels, Role role);

/// Pairwise overlap counts: overlap[a][b] = nodes holding both roles.
std::array<std::array<std::uint64_t, 4>, 4> role_overlaps(std::span<const RoleLabel> labels);

/// Values on a strictly increasing timestamp grid. Missing values are NaN.
struct TimeSeries {
  std::vector<Timestamp> grid;
  std::vector<double> values;

  /// Throws UsageError unless the grid is strictly increasing and the lengths match.
  void validate() const;
  std::size_t size() const { return grid.size(); }
};

/// start, start + step, ... up to and including `end` when it lands on the grid.
std::vector<Timestamp> make_grid(Timestamp start, Timestamp end, Timestamp step);

inline constexpr Timestamp kDefaultGridStep = 14 * 86400;

/// Count, at each grid instant t, of `members` whose lifetime
/// [first_ts, last_ts] contains t. Nodes without edges have no lifetime.
TimeSeries active_population(std::span<const NodeMetrics> metrics, std::span<const NodeId> members,
                             std::span<const Timestamp> grid);
TimeSeries active_population(std::span<const NodeMetrics> metrics, std::span<const RoleLabel> labels,
                             Role role, std::span<const Timestamp> grid);

/// Elementwise customers / sellers; points with zero sellers are NaN.
TimeSeries customer_seller_ratio(const TimeSeries& customers, const TimeSeries& sellers);

}  // namespace chainscope
