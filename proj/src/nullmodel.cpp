#include "chainscope/nullmodel.hpp"

#include <unordered_set>

#include "chainscope/random.hpp"

namespace chainscope {

void NullModelConfig::validate() const {
  if (nodes < 2) throw UsageError("null model needs at least 2 nodes");
  if (!(p_value > 0.0 && p_value < 1.0)) throw UsageError("p_value must lie in (0, 1)");
  if (nodes > (std::uint64_t{1} << 32)) throw UsageError("null model node count too large");
  if (edges > nodes * (nodes - 1)) {
    throw UsageError("edge count exceeds n(n-1) for a simple digraph");
  }
}

TxGraph generate_er(const NullModelConfig& config) {
  config.validate();
  const std::uint64_t n = config.nodes;
  const std::uint64_t pairs = n * (n - 1);
  Rng rng(config.seed);

  // Floyd: for j in [N-m, N) draw t in [0, j]; take t, or j if t is taken.
  std::vector<std::uint64_t> chosen;
  chosen.reserve(config.edges);
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(config.edges);
  for (std::uint64_t j = pairs - config.edges; j < pairs; ++j) {
    const std::uint64_t t = uniform_below(rng, j + 1);
    const std::uint64_t pick = taken.insert(t).second ? t : j;
    if (pick == j) taken.insert(j);
    chosen.push_back(pick);
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<Edge> edges;
  edges.reserve(chosen.size());
  for (const std::uint64_t k : chosen) {
    const auto src = static_cast<NodeId>(k / (n - 1));
    auto dst = static_cast<NodeId>(k % (n - 1));
    if (dst >= src) ++dst;
    edges.push_back({src, dst, 0, 0});
  }
  std::vector<ExternalId> ids(n);
  for (std::uint64_t i = 0; i < n; ++i) ids[i] = static_cast<ExternalId>(i);
  return TxGraph(std::move(ids), std::move(edges));
}

TxGraph assign_sampled_values(const TxGraph& graph, std::span<const Satoshi> empirical_values,
                              std::uint64_t seed) {
  if (empirical_values.empty()) throw UsageError("assign_sampled_values: empty value list");
  Rng rng(seed);
  std::vector<Satoshi> values(graph.edge_count());
  for (auto& v : values) v = empirical_values[uniform_below(rng, empirical_values.size())];
  return graph.with_values(values);
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::InDegree: return "in_degree";
    case Metric::OutDegree: return "out_degree";
    case Metric::InMinusOutDegree: return "in_minus_out_degree";
    case Metric::OutMinusInDegree: return "out_minus_in_degree";
    case Metric::InValue: return "in_value";
    case Metric::OutValue: return "out_value";
    case Metric::InMinusOutValue: return "in_minus_out_value";
    case Metric::OutMinusInValue: return "out_minus_in_value";
  }
  return "unknown";
}

std::int64_t metric_value(const NodeMetrics& m, Metric metric) {
  const auto in_deg = static_cast<std::int64_t>(m.in_degree);
  const auto out_deg = static_cast<std::int64_t>(m.out_degree);
  switch (metric) {
    case Metric::InDegree: return in_deg;
    case Metric::OutDegree: return out_deg;
    case Metric::InMinusOutDegree: return std::max<std::int64_t>(0, in_deg - out_deg);
    case Metric::OutMinusInDegree: return std::max<std::int64_t>(0, out_deg - in_deg);
    case Metric::InValue: return m.in_value;
    case Metric::OutValue: return m.out_value;
    case Metric::InMinusOutValue: return std::max<std::int64_t>(0, m.in_value - m.out_value);
    case Metric::OutMinusInValue: return std::max<std::int64_t>(0, m.out_value - m.in_value);
  }
  return 0;
}

std::int64_t& SignificanceThresholds::operator[](Metric metric) {
  switch (metric) {
    case Metric::InDegree: return in_degree;
    case Metric::OutDegree: return out_degree;
    case Metric::InMinusOutDegree: return in_minus_out_degree;
    case Metric::OutMinusInDegree: return out_minus_in_degree;
    case Metric::InValue: return in_value;
    case Metric::OutValue: return out_value;
    case Metric::InMinusOutValue: return in_minus_out_value;
    case Metric::OutMinusInValue: return out_minus_in_value;
  }
  throw UsageError("unknown metric");
}

std::int64_t SignificanceThresholds::operator[](Metric metric) const {
  return const_cast<SignificanceThresholds&>(*this)[metric];
}

SignificanceThresholds compute_thresholds(std::span<const NodeMetrics> metrics, double p_value) {
  if (!(p_value > 0.0 && p_value < 1.0)) throw UsageError("p_value must lie in (0, 1)");
  if (static_cast<double>(metrics.size()) * p_value < 1.0 - 1e-9) {
    throw UsageError("too few nodes for the requested p-value (need n >= 1/p)");
  }
  SignificanceThresholds t;
  std::vector<std::int64_t> column(metrics.size());
  for (const Metric metric : kAllMetrics) {
    std::transform(metrics.begin(), metrics.end(), column.begin(),
                   [metric](const NodeMetrics& m) { return metric_value(m, metric); });
    t[metric] = upper_percentile_threshold(column, p_value);
  }
  return t;
}

SignificanceThresholds compute_thresholds(const TxGraph& graph, double p_value) {
  const auto all = node_metrics(graph);
  std::vector<NodeMetrics> users;
  users.reserve(all.size());
  for (NodeId v = 0; v < all.size(); ++v) {
    if (!graph.is_reserved(v)) users.push_back(all[v]);
  }
  return compute_thresholds(users, p_value);
}

NullModelResult null_model_for(const TxGraph& data, double p_value, std::uint64_t seed) {
  NullModelResult result;
  std::vector<Satoshi> values;
  for (const auto& e : data.edges()) {
    if (!data.is_reserved(e.src) && !data.is_reserved(e.dst)) values.push_back(e.value);
  }
  std::uint64_t users = 0;
  for (NodeId v = 0; v < data.node_count(); ++v) users += data.is_reserved(v) ? 0 : 1;

  result.config = {users, values.size(), p_value, seed};
  if (values.empty()) throw DataError("null model: data graph has no user-to-user edges");
  if (users < 2 || static_cast<double>(users) * p_value < 1.0 - 1e-9) {
    throw DataError("null model: too few user nodes for p-value " + std::to_string(p_value));
  }
  if (values.size() > users * (users - 1)) {
    throw DataError("null model: more edges than a simple digraph on the user nodes can hold");
  }
  result.config.validate();

  const TxGraph topology = generate_er({users, values.size(), p_value, derive_seed(seed, "nullmodel.edges")});
  const TxGraph valued = assign_sampled_values(topology, values, derive_seed(seed, "nullmodel.values"));
  result.thresholds = compute_thresholds(valued, p_value);
  return result;
}

}  // namespace chainscope
