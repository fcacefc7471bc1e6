#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "chainscope/cluster.hpp"
#include "chainscope/error.hpp"
#include "chainscope/roles.hpp"
#include "chainscope/txgraph.hpp"

namespace chainscope {

// ---------------------------------------------------------------------------
// Power-law fit of the address-reuse distribution, frequency(r) = a r^-k.

enum class FitMethod : std::uint8_t {
  /// Least squares on (log r, log frequency), each bin weighted by its count
  /// (the inverse variance of a log count).
  LogLogLeastSquares,
  /// Exact discrete power-law likelihood, truncated to the observed range.
  DiscreteMaximumLikelihood,
};

std::string_view fit_method_name(FitMethod method);

struct PowerLawFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  std::uint64_t r_min = 1;
  FitMethod method = FitMethod::LogLogLeastSquares;
  /// RMS of the unweighted log-space residuals over the fitted bins.
  double residual = 0.0;
  std::size_t bins_used = 0;
};

/// Throws DataError with fewer than three non-empty bins at r >= r_min.
PowerLawFit fit_power_law(const ReuseHistogram& hist, std::uint64_t r_min = 1);
PowerLawFit fit_power_law_mle(const ReuseHistogram& hist, std::uint64_t r_min = 1);

// ---------------------------------------------------------------------------
// Centrality. Reserved nodes and their edges are excluded; they score zero.

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// Weight transitions by edge value instead of edge multiplicity.
  bool value_weighted = false;
};

/// Power iteration with uniform teleport and dangling mass spread uniformly.
/// Stops when the L1 change drops below tolerance; the result sums to 1.
/// Throws ConvergenceError carrying the last iterate otherwise.
Eigen::VectorXd pagerank(const TxGraph& graph, const PageRankOptions& options = {});

struct HitsOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
};

struct HitsScores {
  Eigen::VectorXd hubs;
  Eigen::VectorXd authorities;
};

/// Mutual reinforcement a = A^T h, h = A a with L2 normalization each step,
/// starting from uniform hubs. Throws DataError on a graph without edges.
HitsScores hits(const TxGraph& graph, const HitsOptions& options = {});

struct CentralityScores {
  Eigen::VectorXd pagerank;
  Eigen::VectorXd hubs;
  Eigen::VectorXd authorities;
};

CentralityScores compute_centrality(const TxGraph& graph, const PageRankOptions& pr = {},
                                    const HitsOptions& hits_options = {});

// ---------------------------------------------------------------------------
// Correlation.

/// Sample Pearson coefficient. Pairs where either side is NaN are dropped.
/// Throws DataError for mismatched lengths, fewer than two pairs, or zero
/// variance.
template <typename DerivedX, typename DerivedY>
double pearson(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  Eigen::ArrayXd xs(x.size()), ys(y.size());
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto a = static_cast<double>(x.derived().coeff(i));
    const auto b = static_cast<double>(y.derived().coeff(i));
    if (std::isnan(a) || std::isnan(b)) continue;
    xs(n) = a;
    ys(n) = b;
    ++n;
  }
  if (n < 2) throw DataError("pearson: need at least two complete pairs");
  xs.conservativeResize(n);
  ys.conservativeResize(n);
  xs -= xs.mean();
  ys -= ys.mean();
  const double sxx = xs.square().sum();
  const double syy = ys.square().sum();
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance");
  const double r = (xs * ys).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  return pearson(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                 Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

struct CorrelationResult {
  double log_log = 0.0;
  double linear = 0.0;
  std::size_t used = 0;
  /// Sellers dropped for zero earnings or zero score.
  std::size_t excluded = 0;
};

struct CentralityEarnings {
  CorrelationResult pagerank;
  CorrelationResult hubs;
  CorrelationResult authorities;
};

/// Per measure, Pearson between log(score) and log(in_value) over sellers
/// with positive score and positive in_value ("money earned" is lifetime
/// inflow). A linear-space coefficient is reported alongside.
/// Throws DataError with fewer than three usable sellers.
CorrelationResult score_earnings_correlation(std::span<const NodeMetrics> metrics,
                                             const Eigen::VectorXd& scores,
                                             std::span<const NodeId> sellers);
CentralityEarnings centrality_earnings_correlation(std::span<const NodeMetrics> metrics,
                                                   const CentralityScores& scores,
                                                   std::span<const NodeId> sellers);

/// Resamples both series onto the grid of the one with fewer points in the
/// common time window (last observation carried forward), then applies
/// Pearson. Throws DataError when the windows do not overlap.
double series_correlation(const TimeSeries& a, const TimeSeries& b);

}  // namespace chainscope
