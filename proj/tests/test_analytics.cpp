#include <doctest.h>

#include <cmath>
#include <random>

#include "chainscope/analytics.hpp"
#include "oracles.hpp"

using namespace chainscope;

namespace {

TxGraph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  std::vector<ExternalId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ExternalId>(i);
  std::vector<Edge> edges;
  for (NodeId s = 0; s < n; ++s)
    for (NodeId d = 0; d < n; ++d)
      if (s != d && std::uniform_real_distribution<>(0, 1)(rng) < p) {
        edges.push_back({s, d, static_cast<Satoshi>(1 + rng() % 1000), 0});
        if (rng() % 10 == 0) edges.push_back({s, d, 5, 0});  // parallel edge
      }
  return TxGraph(ids, edges);
}

ReuseHistogram analytic_histogram(double alpha, std::uint64_t r_max, double scale) {
  ReuseHistogram h;
  for (std::uint64_t r = 1; r <= r_max; ++r) {
    const auto c = static_cast<std::uint64_t>(std::llround(scale * std::pow(static_cast<double>(r), -alpha)));
    if (c == 0) continue;
    h.bins[r] = c;
    h.total_addresses += c;
  }
  return h;
}

}  // namespace

TEST_CASE("power-law fit on an analytic histogram") {
  const auto h = analytic_histogram(2.5, 1000, 1e12);
  const auto fit = fit_power_law(h);
  CHECK(fit.exponent == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(fit.bins_used == 1000);
  const auto mle = fit_power_law_mle(h);
  CHECK(mle.exponent == doctest::Approx(2.5).epsilon(1e-4));
  CHECK(fit_method_name(mle.method) == "discrete-mle");
}

TEST_CASE("power-law fit honours r_min and rejects thin histograms") {
  auto h = analytic_histogram(2.0, 200, 1e9);
  h.bins[1] += 1'000'000'000;  // distort the head only
  h.total_addresses += 1'000'000'000;
  CHECK(fit_power_law(h, 2).exponent == doctest::Approx(2.0).epsilon(1e-4));
  ReuseHistogram thin;
  thin.bins = {{1, 10}, {2, 3}};
  thin.total_addresses = 13;
  CHECK_THROWS_AS(fit_power_law(thin), DataError);
}

TEST_CASE("pagerank: cycle, dangling node, sum and oracle") {
  const TxGraph cycle({0, 1, 2}, {{0, 1, 1, 0}, {1, 2, 1, 0}, {2, 0, 1, 0}});
  const auto pr = pagerank(cycle);
  for (int i = 0; i < 3; ++i) CHECK(pr(i) == doctest::Approx(1.0 / 3).epsilon(1e-12));

  const TxGraph dangling({0, 1, 2}, {{0, 1, 1, 0}, {0, 2, 1, 0}});
  const auto pd = pagerank(dangling);
  CHECK(pd.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pd(1) == doctest::Approx(pd(2)));
  CHECK(pd(1) > pd(0));

  std::mt19937_64 rng(14);
  for (int t = 0; t < 5; ++t) {
    const auto g = random_graph(rng, 30, 0.08);
    const auto got = pagerank(g);
    const auto want = testsupport::dense_pagerank(g);
    CHECK(std::abs(got.sum() - 1.0) < 1e-9);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got(i) - want[i]) < 1e-8);
  }
}

TEST_CASE("pagerank ranking ignores edge values unless value weighting is on") {
  std::mt19937_64 rng(3);
  const auto g = random_graph(rng, 25, 0.1);
  std::vector<Satoshi> scaled;
  for (const auto& e : g.edges()) scaled.push_back(e.value * 1000);
  const auto a = pagerank(g);
  const auto b = pagerank(g.with_values(scaled));
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);

  PageRankOptions weighted;
  weighted.value_weighted = true;
  const auto wa = pagerank(g, weighted);
  const auto wb = pagerank(g.with_values(scaled), weighted);
  CHECK((wa - wb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pagerank reserved nodes score zero and options are validated") {
  const TxGraph g({-1, 0, 1}, {{0, 1, 5, 0}, {1, 2, 1, 0}, {2, 1, 1, 0}});
  const auto pr = pagerank(g);
  CHECK(pr(0) == 0.0);
  CHECK(pr.sum() == doctest::Approx(1.0));
  PageRankOptions bad;
  bad.damping = 1.0;
  CHECK_THROWS_AS(pagerank(g, bad), UsageError);
  PageRankOptions tight;
  tight.max_iterations = 1;
  tight.tolerance = 1e-300;
  std::mt19937_64 rng(1);
  const auto dense = random_graph(rng, 20, 0.2);
  try {
    pagerank(dense, tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_iterate().size() == 20);
  }
}

TEST_CASE("hits: single edge, bipartite, oracle") {
  const auto one = hits(TxGraph({0, 1}, {{0, 1, 1, 0}}));
  CHECK(one.hubs(0) == doctest::Approx(1.0));
  CHECK(one.authorities(1) == doctest::Approx(1.0));
  CHECK(one.hubs(1) == 0.0);

  std::vector<Edge> k23;
  for (NodeId s : {0u, 1u})
    for (NodeId d : {2u, 3u, 4u}) k23.push_back({s, d, 1, 0});
  const auto b = hits(TxGraph({0, 1, 2, 3, 4}, k23));
  CHECK(b.hubs(0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(b.hubs(1) == doctest::Approx(1 / std::sqrt(2.0)));
  for (int i = 2; i < 5; ++i) CHECK(b.authorities(i) == doctest::Approx(1 / std::sqrt(3.0)));

  std::mt19937_64 rng(19);
  for (int t = 0; t < 5; ++t) {
    const auto g = random_graph(rng, 30, 0.15);
    const auto want = testsupport::eigen_hits(g);
    if (want.gap_ratio > 0.95) continue;
    const auto got = hits(g);
    CHECK(got.hubs.norm() == doctest::Approx(1.0));
    CHECK((got.authorities - want.authorities).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((got.hubs - want.hubs).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(hits(TxGraph({0, 1}, {})), DataError);
}

TEST_CASE("pearson") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(2 * v + 3);
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(y, x) == pearson(x, y));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> a(500), c(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = z(rng);
    c[i] = 0.3 * a[i] + z(rng);
  }
  const double r = pearson(a, c);
  CHECK(std::abs(r - testsupport::definition_pearson(a, c)) < 1e-12);
  std::vector<double> a2, c2;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a2.push_back(-4 * a[i] + 7);
    c2.push_back(0.5 * c[i] - 1);
  }
  CHECK(pearson(a2, c2) == doctest::Approx(-r).epsilon(1e-12));

  std::vector<double> with_nan{1, NAN, 3, 4}, other{2, 100, 6, 8.5};
  CHECK(pearson(with_nan, other) == doctest::Approx(testsupport::definition_pearson({1, 3, 4}, {2, 6, 8.5})));
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), DataError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), DataError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), DataError);
}

TEST_CASE("score/earnings correlation excludes zero earners") {
  std::vector<NodeMetrics> m(5);
  Eigen::VectorXd s(5);
  for (int i = 0; i < 5; ++i) {
    s(i) = 0.1 * (i + 1);
    m[i].in_value = static_cast<Satoshi>(std::llround(1e6 * std::pow(s(i), 2.0)));
  }
  m[4].in_value = 0;
  const std::vector<NodeId> sellers{0, 1, 2, 3, 4};
  const auto r = score_earnings_correlation(m, s, sellers);
  CHECK(r.used == 4);
  CHECK(r.excluded == 1);
  CHECK(r.log_log == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(score_earnings_correlation(m, s, std::vector<NodeId>{0, 4}), DataError);
}

TEST_CASE("series correlation resamples onto the coarser grid") {
  TimeSeries daily, fortnightly;
  for (Timestamp t = 0; t <= 140; ++t) {
    daily.grid.push_back(t);
    daily.values.push_back(static_cast<double>(t * t));
  }
  for (Timestamp t = 0; t <= 140; t += 14) {
    fortnightly.grid.push_back(t);
    fortnightly.values.push_back(3.0 * static_cast<double>(t * t) + 1);
  }
  CHECK(series_correlation(daily, fortnightly) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(series_correlation(fortnightly, daily) == doctest::Approx(1.0).epsilon(1e-12));

  // Scaling either series leaves the coefficient unchanged.
  TimeSeries scaled = daily;
  for (auto& v : scaled.values) v *= 1e-3;
  CHECK(series_correlation(scaled, fortnightly) == doctest::Approx(series_correlation(daily, fortnightly)));

  TimeSeries later{{1000, 1001}, {1, 2}};
  CHECK_THROWS_AS(series_correlation(daily, later), DataError);
}
