#include "chainscope/cluster.hpp"

#include <numeric>

namespace chainscope {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), sets_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --sets_;
  return true;
}

AddressClustering::AddressClustering(UnionFind forest) : user_of_(forest.size()) {
  // Smallest member of each set becomes its canonical id: walking addresses in
  // increasing order, the first one seen per root claims it.
  std::vector<AddressId> canonical(forest.size(), static_cast<AddressId>(-1));
  for (std::size_t a = 0; a < forest.size(); ++a) {
    const std::size_t root = forest.find(a);
    if (canonical[root] == static_cast<AddressId>(-1)) {
      canonical[root] = static_cast<AddressId>(a);
      ++user_count_;
    }
    user_of_[a] = canonical[root];
  }
}

AddressClustering AddressClustering::from_assignment(std::vector<AddressId> user_of) {
  AddressClustering c;
  for (std::size_t a = 0; a < user_of.size(); ++a) {
    const AddressId u = user_of[a];
    if (u > a || user_of[u] != u) throw DataError("clustering: user id is not a canonical cluster member");
    if (u == a) ++c.user_count_;
  }
  c.user_of_ = std::move(user_of);
  return c;
}

AddressClustering cluster_transactions(std::span<const ResolvedTransaction> transactions,
                                       std::size_t address_count) {
  UnionFind forest(address_count);
  for (const auto& tx : transactions) {
    if (tx.is_coinbase || tx.input_addresses.empty()) continue;
    const AddressId first = tx.input_addresses.front();
    for (const AddressId a : tx.input_addresses) {
      if (a >= address_count || first >= address_count) {
        throw UsageError("cluster_transactions: address id out of range");
      }
      forest.unite(first, a);
    }
  }
  return AddressClustering(std::move(forest));
}

std::uint64_t ReuseHistogram::total_occurrences() const {
  std::uint64_t sum = 0;
  for (const auto& [r, count] : bins) sum += r * count;
  return sum;
}

ReuseHistogram reuse_histogram(std::span<const ResolvedTransaction> transactions) {
  std::vector<std::uint64_t> uses;
  std::vector<AddressId> seen;
  for (const auto& tx : transactions) {
    seen.assign(tx.input_addresses.begin(), tx.input_addresses.end());
    for (const auto& out : tx.outputs) {
      if (out.address) seen.push_back(*out.address);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const AddressId a : seen) {
      if (a >= uses.size()) uses.resize(static_cast<std::size_t>(a) + 1, 0);
      ++uses[a];
    }
  }
  ReuseHistogram hist;
  for (const std::uint64_t r : uses) {
    if (r == 0) continue;
    ++hist.bins[r];
    ++hist.total_addresses;
  }
  return hist;
}

}  // namespace chainscope
