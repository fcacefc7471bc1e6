#include <doctest.h>

#include <algorithm>
#include <random>

#include "chainscope/cluster.hpp"
#include "oracles.hpp"

using namespace chainscope;

namespace {

std::vector<ResolvedTransaction> random_txs(std::mt19937_64& rng, std::size_t addresses, std::size_t count) {
  std::vector<ResolvedTransaction> txs(count);
  for (auto& tx : txs) {
    tx.timestamp = static_cast<Timestamp>(rng() % 1000);
    tx.is_coinbase = rng() % 10 == 0;
    const std::size_t n_in = tx.is_coinbase ? 0 : 1 + rng() % 3;
    for (std::size_t i = 0; i < n_in; ++i) tx.input_addresses.push_back(static_cast<AddressId>(rng() % addresses));
    const std::size_t n_out = 1 + rng() % 3;
    for (std::size_t i = 0; i < n_out; ++i) {
      ResolvedOutput o{static_cast<Satoshi>(rng() % 1000), std::nullopt};
      if (rng() % 5) o.address = static_cast<AddressId>(rng() % addresses);
      tx.outputs.push_back(o);
    }
  }
  return txs;
}

}  // namespace

TEST_CASE("union-find basics") {
  UnionFind uf(5);
  CHECK(uf.set_count() == 5);
  CHECK(uf.unite(0, 1));
  CHECK(uf.unite(3, 4));
  CHECK_FALSE(uf.unite(1, 0));
  CHECK(uf.find(0) == uf.find(1));
  CHECK(uf.find(0) != uf.find(3));
  CHECK(uf.set_count() == 3);
}

TEST_CASE("canonical id is the smallest address of the cluster") {
  std::vector<ResolvedTransaction> txs(2);
  txs[0].input_addresses = {4, 2};
  txs[1].input_addresses = {2, 3};
  const auto c = cluster_transactions(txs, 6);
  CHECK(c.user_of(4) == 2);
  CHECK(c.user_of(3) == 2);
  CHECK(c.user_of(0) == 0);
  CHECK(c.user_of(5) == 5);
  CHECK(c.user_count() == 4);
}

TEST_CASE("coinbase transactions do not merge") {
  std::vector<ResolvedTransaction> txs(1);
  txs[0].is_coinbase = true;
  txs[0].input_addresses = {0, 1};
  CHECK(cluster_transactions(txs, 2).user_count() == 2);
}

TEST_CASE("clustering matches BFS components and ignores order") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    auto txs = random_txs(rng, n, rng() % 300);
    const auto expect = testsupport::bfs_clusters(txs, n);
    const auto got = cluster_transactions(txs, n);
    CHECK(std::equal(expect.begin(), expect.end(), got.assignment().begin(), got.assignment().end()));

    std::shuffle(txs.begin(), txs.end(), rng);
    for (auto& tx : txs) std::shuffle(tx.input_addresses.begin(), tx.input_addresses.end(), rng);
    const auto again = cluster_transactions(txs, n);
    CHECK(std::equal(expect.begin(), expect.end(), again.assignment().begin(), again.assignment().end()));
  }
}

TEST_CASE("from_assignment validates canonical ids") {
  CHECK(AddressClustering::from_assignment({0, 0, 2, 0}).user_count() == 2);
  CHECK_THROWS_AS(AddressClustering::from_assignment({1, 1}), DataError);
  CHECK_THROWS_AS(AddressClustering::from_assignment({0, 5}), DataError);
}

TEST_CASE("reuse histogram counts distinct transactions per address") {
  std::vector<ResolvedTransaction> txs(2);
  txs[0].input_addresses = {0, 0};
  txs[0].outputs = {{1, 0}, {1, 1}};
  txs[1].outputs = {{1, 1}, {1, std::nullopt}};
  const auto h = reuse_histogram(txs);
  CHECK(h.total_addresses == 2);
  CHECK(h.bins.at(1) == 1);  // address 0: one transaction
  CHECK(h.bins.at(2) == 1);  // address 1: two transactions
}

TEST_CASE("histogram conservation") {
  std::mt19937_64 rng(4);
  auto txs = random_txs(rng, 80, 500);
  const auto h = reuse_histogram(txs);
  std::uint64_t occurrences = 0;
  std::set<AddressId> seen;
  for (const auto& tx : txs) {
    std::set<AddressId> here(tx.input_addresses.begin(), tx.input_addresses.end());
    for (const auto& o : tx.outputs)
      if (o.address) here.insert(*o.address);
    occurrences += here.size();
    seen.insert(here.begin(), here.end());
  }
  CHECK(h.total_occurrences() == occurrences);
  CHECK(h.total_addresses == seen.size());
  std::uint64_t bins = 0;
  for (auto [r, c] : h.bins) bins += c;
  CHECK(bins == h.total_addresses);
}

TEST_CASE("time partition") {
  std::mt19937_64 rng(8);
  auto txs = random_txs(rng, 10, 11);
  const auto parts = time_partition<ResolvedTransaction>(txs, 3);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].size() == 4);
  CHECK(parts[1].size() == 4);
  CHECK(parts[2].size() == 3);
  Timestamp last = -1;
  for (const auto& p : parts)
    for (const auto& tx : p) {
      CHECK(tx.timestamp >= last);
      last = tx.timestamp;
    }
  CHECK_THROWS_AS(time_partition<ResolvedTransaction>(txs, 0), UsageError);
  CHECK_THROWS_AS(time_partition<ResolvedTransaction>(txs, 12), UsageError);
}
