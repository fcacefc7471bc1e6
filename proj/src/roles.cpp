#include "chainscope/roles.hpp"

#include <algorithm>
#include <limits>

namespace chainscope {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Miner: return "miner";
    case Role::Collector: return "collector";
    case Role::Customer: return "customer";
    case Role::Seller: return "seller";
  }
  return "unknown";
}

bool RoleLabel::has(Role role) const {
  switch (role) {
    case Role::Miner: return miner;
    case Role::Collector: return collector;
    case Role::Customer: return customer;
    case Role::Seller: return seller;
  }
  return false;
}

RoleLabel classify(const NodeMetrics& m, const SignificanceThresholds& t) {
  const auto in_deg = static_cast<std::int64_t>(m.in_degree);
  const auto out_deg = static_cast<std::int64_t>(m.out_degree);
  RoleLabel label;
  label.miner = m.out_value - m.in_value > t.out_minus_in_value;
  label.collector = m.in_value - m.out_value > t.in_minus_out_value;
  label.customer = out_deg - in_deg > t.out_minus_in_degree;
  label.seller = in_deg - out_deg > t.in_minus_out_degree;
  return label;
}

std::vector<RoleLabel> classify_all(const TxGraph& graph, std::span<const NodeMetrics> metrics,
                                    const SignificanceThresholds& thresholds) {
  if (metrics.size() != graph.node_count()) throw UsageError("classify_all: metrics/graph size mismatch");
  std::vector<RoleLabel> labels(metrics.size());
  for (NodeId v = 0; v < metrics.size(); ++v) {
    if (!graph.is_reserved(v)) labels[v] = classify(metrics[v], thresholds);
  }
  return labels;
}

std::vector<NodeId> nodes_with_role(std::span<const RoleLabel> labels, Role role) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (labels[v].has(role)) out.push_back(v);
  }
  return out;
}

std::array<std::array<std::uint64_t, 4>, 4> role_overlaps(std::span<const RoleLabel> labels) {
  std::array<std::array<std::uint64_t, 4>, 4> overlap{};
  for (const auto& label : labels) {
    for (std::size_t a = 0; a < kAllRoles.size(); ++a) {
      for (std::size_t b = 0; b < kAllRoles.size(); ++b) {
        if (label.has(kAllRoles[a]) && label.has(kAllRoles[b])) ++overlap[a][b];
      }
    }
  }
  return overlap;
}

void TimeSeries::validate() const {
  if (grid.size() != values.size()) throw UsageError("time series grid and values differ in length");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw UsageError("time series grid is not strictly increasing");
  }
}

std::vector<Timestamp> make_grid(Timestamp start, Timestamp end, Timestamp step) {
  if (step <= 0) throw UsageError("grid step must be positive");
  std::vector<Timestamp> grid;
  for (Timestamp t = start; t <= end; t += step) grid.push_back(t);
  return grid;
}

TimeSeries active_population(std::span<const NodeMetrics> metrics, std::span<const NodeId> members,
                             std::span<const Timestamp> grid) {
  TimeSeries series{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
  series.validate();

  // count(t) = #{first <= t} - #{last < t}
  std::vector<Timestamp> firsts, lasts;
  for (const NodeId v : members) {
    const auto& m = metrics[v];
    if (!m.active()) continue;
    firsts.push_back(m.first_ts);
    lasts.push_back(m.last_ts);
  }
  std::sort(firsts.begin(), firsts.end());
  std::sort(lasts.begin(), lasts.end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto started = std::upper_bound(firsts.begin(), firsts.end(), grid[i]) - firsts.begin();
    const auto ended = std::lower_bound(lasts.begin(), lasts.end(), grid[i]) - lasts.begin();
    series.values[i] = static_cast<double>(started - ended);
  }
  return series;
}

TimeSeries active_population(std::span<const NodeMetrics> metrics, std::span<const RoleLabel> labels,
                             Role role, std::span<const Timestamp> grid) {
  const auto members = nodes_with_role(labels, role);
  return active_population(metrics, members, grid);
}

TimeSeries customer_seller_ratio(const TimeSeries& customers, const TimeSeries& sellers) {
  customers.validate();
  sellers.validate();
  if (customers.grid != sellers.grid) throw UsageError("customer_seller_ratio: grid mismatch");
  TimeSeries ratio{customers.grid, std::vector<double>(customers.size())};
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    ratio.values[i] = sellers.values[i] == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                               : customers.values[i] / sellers.values[i];
  }
  return ratio;
}

}  // namespace chainscope
