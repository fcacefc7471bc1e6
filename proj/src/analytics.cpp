#include "chainscope/analytics.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCore>

#include <limits>

namespace chainscope {

namespace {

struct FitBins {
  Eigen::ArrayXd log_r;
  Eigen::ArrayXd log_freq;
  Eigen::ArrayXd counts;
  std::uint64_t r_max = 0;
};

FitBins usable_bins(const ReuseHistogram& hist, std::uint64_t r_min) {
  if (r_min < 1) throw UsageError("power-law fit: r_min must be >= 1");
  if (hist.total_addresses == 0) throw DataError("power-law fit: empty histogram");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> used;
  for (const auto& [r, count] : hist.bins) {
    if (r >= r_min && count > 0) used.emplace_back(r, count);
  }
  if (used.size() < 3) throw DataError("power-law fit: fewer than three usable bins");

  FitBins bins;
  const auto k = static_cast<Eigen::Index>(used.size());
  bins.log_r.resize(k);
  bins.log_freq.resize(k);
  bins.counts.resize(k);
  const double total = static_cast<double>(hist.total_addresses);
  for (Eigen::Index i = 0; i < k; ++i) {
    bins.log_r(i) = std::log(static_cast<double>(used[i].first));
    bins.counts(i) = static_cast<double>(used[i].second);
    bins.log_freq(i) = std::log(bins.counts(i) / total);
  }
  bins.r_max = used.back().first;
  return bins;
}

double rms(const Eigen::ArrayXd& residuals) { return std::sqrt(residuals.square().mean()); }

// Compact numbering of the non-reserved nodes.
struct ActiveNodes {
  std::vector<Eigen::Index> compact;
  std::vector<NodeId> nodes;
};

ActiveNodes active_nodes(const TxGraph& graph) {
  ActiveNodes a;
  a.compact.assign(graph.node_count(), -1);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (graph.is_reserved(v)) continue;
    a.compact[v] = static_cast<Eigen::Index>(a.nodes.size());
    a.nodes.push_back(v);
  }
  return a;
}

Eigen::VectorXd scatter(const ActiveNodes& active, const Eigen::VectorXd& compact, std::size_t n) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < active.nodes.size(); ++i) {
    full(active.nodes[i]) = compact(static_cast<Eigen::Index>(i));
  }
  return full;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string_view fit_method_name(FitMethod method) {
  switch (method) {
    case FitMethod::LogLogLeastSquares: return "loglog-wls";
    case FitMethod::DiscreteMaximumLikelihood: return "discrete-mle";
  }
  return "unknown";
}

PowerLawFit fit_power_law(const ReuseHistogram& hist, std::uint64_t r_min) {
  const FitBins bins = usable_bins(hist, r_min);
  const Eigen::Index k = bins.log_r.size();

  Eigen::MatrixXd design(k, 2);
  design.col(0) = bins.log_r.matrix();
  design.col(1).setOnes();
  const Eigen::VectorXd sqrt_w = bins.counts.sqrt().matrix();
  const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * design;
  const Eigen::VectorXd rhs = sqrt_w.asDiagonal() * bins.log_freq.matrix();
  const Eigen::Vector2d beta = weighted.colPivHouseholderQr().solve(rhs);

  PowerLawFit fit;
  fit.exponent = -beta(0);
  fit.amplitude = std::exp(beta(1));
  fit.r_min = r_min;
  fit.method = FitMethod::LogLogLeastSquares;
  fit.residual = rms(bins.log_freq - (design * beta).array());
  fit.bins_used = static_cast<std::size_t>(k);
  if (!(fit.exponent > 0.0)) throw DataError("power-law fit: distribution is not decreasing");
  return fit;
}

PowerLawFit fit_power_law_mle(const ReuseHistogram& hist, std::uint64_t r_min) {
  const FitBins bins = usable_bins(hist, r_min);
  const double n = bins.counts.sum();
  const double s = (bins.counts * bins.log_r).sum();

  Eigen::ArrayXd log_support(static_cast<Eigen::Index>(bins.r_max - r_min + 1));
  for (Eigen::Index i = 0; i < log_support.size(); ++i) {
    log_support(i) = std::log(static_cast<double>(r_min + static_cast<std::uint64_t>(i)));
  }
  const auto log_partition = [&](double alpha) { return std::log((-alpha * log_support).exp().sum()); };
  // Negative log-likelihood; convex in alpha.
  const auto nll = [&](double alpha) { return alpha * s + n * log_partition(alpha); };

  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 1e-6, hi = 20.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = nll(x1), f2 = nll(x2);
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = nll(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = nll(x2);
    }
  }

  PowerLawFit fit;
  fit.exponent = 0.5 * (lo + hi);
  fit.amplitude = (n / static_cast<double>(hist.total_addresses)) / std::exp(log_partition(fit.exponent));
  fit.r_min = r_min;
  fit.method = FitMethod::DiscreteMaximumLikelihood;
  fit.residual = rms(bins.log_freq - (std::log(fit.amplitude) - fit.exponent * bins.log_r));
  fit.bins_used = static_cast<std::size_t>(bins.log_r.size());
  return fit;
}

Eigen::VectorXd pagerank(const TxGraph& graph, const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0)) throw UsageError("pagerank: damping must lie in (0, 1)");
  if (!(options.tolerance > 0.0)) throw UsageError("pagerank: tolerance must be positive");
  if (options.max_iterations < 1) throw UsageError("pagerank: max_iterations must be >= 1");

  const ActiveNodes active = active_nodes(graph);
  const auto n = static_cast<Eigen::Index>(active.nodes.size());
  if (n == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.node_count()));

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd out_weight = Eigen::VectorXd::Zero(n);
  for (const auto& e : graph.edges()) {
    const Eigen::Index s = active.compact[e.src], d = active.compact[e.dst];
    if (s < 0 || d < 0) continue;
    const double w = options.value_weighted ? static_cast<double>(e.value) : 1.0;
    if (w == 0.0) continue;
    triplets.emplace_back(d, s, w);
    out_weight(s) += w;
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> transition(n, n);
  transition.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::VectorXd inv_out = out_weight.unaryExpr([](double w) { return w > 0.0 ? 1.0 / w : 0.0; });
  transition = transition * inv_out.asDiagonal();
  const Eigen::ArrayXd dangling = (out_weight.array() == 0.0).cast<double>();

  const double d = options.damping;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double dangling_mass = (x.array() * dangling).sum();
    Eigen::VectorXd next = d * (transition * x);
    next.array() += (d * dangling_mass + (1.0 - d)) / static_cast<double>(n);
    residual = (next - x).lpNorm<1>();
    x.swap(next);
    if (residual < options.tolerance) {
      x /= x.sum();
      return scatter(active, x, graph.node_count());
    }
  }
  throw ConvergenceError("pagerank did not converge", residual, options.max_iterations,
                         to_std(scatter(active, x, graph.node_count())));
}

HitsScores hits(const TxGraph& graph, const HitsOptions& options) {
  if (!(options.tolerance > 0.0)) throw UsageError("hits: tolerance must be positive");
  if (options.max_iterations < 1) throw UsageError("hits: max_iterations must be >= 1");

  const ActiveNodes active = active_nodes(graph);
  const auto n = static_cast<Eigen::Index>(active.nodes.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& e : graph.edges()) {
    const Eigen::Index s = active.compact[e.src], d = active.compact[e.dst];
    if (s >= 0 && d >= 0) triplets.emplace_back(s, d, 1.0);
  }
  if (triplets.empty()) throw DataError("hits: graph has no edges");

  Eigen::SparseMatrix<double, Eigen::RowMajor> adjacency(n, n);
  adjacency.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::SparseMatrix<double, Eigen::RowMajor> adjacency_t = adjacency.transpose();

  Eigen::VectorXd hub = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd auth = Eigen::VectorXd::Zero(n);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXd next_auth = adjacency_t * hub;
    next_auth.normalize();
    Eigen::VectorXd next_hub = adjacency * next_auth;
    next_hub.normalize();
    residual = (next_auth - auth).lpNorm<1>() + (next_hub - hub).lpNorm<1>();
    auth.swap(next_auth);
    hub.swap(next_hub);
    if (residual < options.tolerance) {
      return {scatter(active, hub, graph.node_count()), scatter(active, auth, graph.node_count())};
    }
  }
  throw ConvergenceError("hits did not converge", residual, options.max_iterations,
                         to_std(scatter(active, auth, graph.node_count())));
}

CentralityScores compute_centrality(const TxGraph& graph, const PageRankOptions& pr,
                                    const HitsOptions& hits_options) {
  CentralityScores scores;
  scores.pagerank = pagerank(graph, pr);
  auto h = hits(graph, hits_options);
  scores.hubs = std::move(h.hubs);
  scores.authorities = std::move(h.authorities);
  return scores;
}

CorrelationResult score_earnings_correlation(std::span<const NodeMetrics> metrics,
                                             const Eigen::VectorXd& scores,
                                             std::span<const NodeId> sellers) {
  CorrelationResult result;
  std::vector<double> score, earned;
  for (const NodeId v : sellers) {
    if (v >= metrics.size() || static_cast<Eigen::Index>(v) >= scores.size()) {
      throw UsageError("centrality correlation: seller id out of range");
    }
    const double s = scores(v);
    const auto e = metrics[v].in_value;
    if (s > 0.0 && e > 0) {
      score.push_back(s);
      earned.push_back(static_cast<double>(e));
    } else {
      ++result.excluded;
    }
  }
  result.used = score.size();
  if (result.used < 3) throw DataError("centrality correlation: fewer than three usable sellers");

  const Eigen::Map<const Eigen::ArrayXd> s(score.data(), static_cast<Eigen::Index>(score.size()));
  const Eigen::Map<const Eigen::ArrayXd> e(earned.data(), static_cast<Eigen::Index>(earned.size()));
  result.log_log = pearson(s.log(), e.log());
  result.linear = pearson(s, e);
  return result;
}

CentralityEarnings centrality_earnings_correlation(std::span<const NodeMetrics> metrics,
                                                   const CentralityScores& scores,
                                                   std::span<const NodeId> sellers) {
  return {score_earnings_correlation(metrics, scores.pagerank, sellers),
          score_earnings_correlation(metrics, scores.hubs, sellers),
          score_earnings_correlation(metrics, scores.authorities, sellers)};
}

double series_correlation(const TimeSeries& a, const TimeSeries& b) {
  a.validate();
  b.validate();
  if (a.size() == 0 || b.size() == 0) throw DataError("series_correlation: empty series");
  const Timestamp lo = std::max(a.grid.front(), b.grid.front());
  const Timestamp hi = std::min(a.grid.back(), b.grid.back());
  if (lo > hi) throw DataError("series_correlation: no overlapping time range");

  const auto in_window = [lo, hi](const TimeSeries& s) {
    return std::count_if(s.grid.begin(), s.grid.end(), [&](Timestamp t) { return t >= lo && t <= hi; });
  };
  const bool b_coarser = in_window(b) < in_window(a);
  const TimeSeries& coarse = b_coarser ? b : a;
  const TimeSeries& fine = b_coarser ? a : b;

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const Timestamp t = coarse.grid[i];
    if (t < lo || t > hi) continue;
    const auto it = std::upper_bound(fine.grid.begin(), fine.grid.end(), t);
    const auto j = static_cast<std::size_t>(it - fine.grid.begin()) - 1;
    xs.push_back(coarse.values[i]);
    ys.push_back(fine.values[j]);
  }
  // Keep the argument order stable regardless of which grid was coarser.
  return b_coarser ? pearson(std::span<const double>(ys), std::span<const double>(xs))
                   : pearson(std::span<const double>(xs), std::span<const double>(ys));
}

}  // namespace chainscope
