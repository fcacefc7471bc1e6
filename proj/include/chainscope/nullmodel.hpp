#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "chainscope/error.hpp"
#include "chainscope/txgraph.hpp"

namespace chainscope {

struct NullModelConfig {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  double p_value = 0.01;
  std::uint64_t seed = 0;

  /// Throws UsageError unless n >= 2, 0 < p < 1 and m <= n(n-1).
  void validate() const;
};

/// Directed G(n, m): exactly m distinct ordered pairs without self-loops,
/// sampled uniformly without replacement (Floyd's algorithm over the
/// n(n-1) pair indices). Edge values and timestamps are zero; edges are
/// sorted by (src, dst). Seed-deterministic.
TxGraph generate_er(const NullModelConfig& config);

/// Bootstrap edge values: each edge gets an i.i.d. draw (with replacement)
/// from `empirical_values`.
TxGraph assign_sampled_values(const TxGraph& graph, std::span<const Satoshi> empirical_values,
                              std::uint64_t seed);

enum class Metric : std::uint8_t {
  InDegree,
  OutDegree,
  InMinusOutDegree,
  OutMinusInDegree,
  InValue,
  OutValue,
  InMinusOutValue,
  OutMinusInValue,
};

inline constexpr std::array<Metric, 8> kAllMetrics{
    Metric::InDegree, Metric::OutDegree, Metric::InMinusOutDegree, Metric::OutMinusInDegree,
    Metric::InValue,  Metric::OutValue,  Metric::InMinusOutValue,  Metric::OutMinusInValue,
};

std::string_view metric_name(Metric metric);

/// Metric value of a node. Differences are one-sided: max(0, a - b).
std::int64_t metric_value(const NodeMetrics& m, Metric metric);

struct SignificanceThresholds {
  std::int64_t in_degree = 0;
  std::int64_t out_degree = 0;
  std::int64_t in_minus_out_degree = 0;
  std::int64_t out_minus_in_degree = 0;
  Satoshi in_value = 0;
  Satoshi out_value = 0;
  Satoshi in_minus_out_value = 0;
  Satoshi out_minus_in_value = 0;

  std::int64_t& operator[](Metric metric);
  std::int64_t operator[](Metric metric) const;
  bool operator==(const SignificanceThresholds&) const = default;
};

/// 1-based nearest rank ceil(q * n), guarded against binary rounding of q * n.
inline std::size_t nearest_rank(double q, std::size_t n) {
  const double r = std::ceil(q * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, n);
}

/// Value at nearest rank ceil((1 - p) n) of the ascending order. Values
/// strictly greater than the result are significant at level p.
template <typename T>
T upper_percentile_threshold(std::vector<T> values, double p_value) {
  if (values.empty()) throw UsageError("percentile of an empty sample");
  const std::size_t k = nearest_rank(1.0 - p_value, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

/// Thresholds over the given node metrics. Requires n * p >= 1.
SignificanceThresholds compute_thresholds(std::span<const NodeMetrics> metrics, double p_value);
/// Thresholds over all non-reserved nodes of `graph`.
SignificanceThresholds compute_thresholds(const TxGraph& graph, double p_value);

struct NullModelResult {
  NullModelConfig config;
  SignificanceThresholds thresholds;
};

/// Null model matched to `data`: n = user nodes, m = edges between user
/// nodes, values bootstrapped from those edges. Seeds for edge and value
/// sampling are derived from `seed`.
NullModelResult null_model_for(const TxGraph& data, double p_value, std::uint64_t seed);

}  // namespace chainscope
