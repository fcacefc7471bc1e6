#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "chainscope/error.hpp"
#include "chainscope/ledger.hpp"

namespace chainscope {

/// Disjoint-set forest with path compression and union by rank.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0);

  std::size_t find(std::size_t x);
  /// Returns false if both were already in one set.
  bool unite(std::size_t a, std::size_t b);

  std::size_t size() const { return parent_.size(); }
  std::size_t set_count() const { return sets_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::size_t sets_ = 0;
};

/// Finalized address -> user assignment. The user id of a cluster is its
/// smallest address id, so results do not depend on union order.
class AddressClustering {
 public:
  AddressClustering() = default;
  explicit AddressClustering(UnionFind forest);
  /// Rebuilds a finalized clustering from an exported assignment. Throws
  /// DataError unless every user id is the smallest address of its cluster.
  static AddressClustering from_assignment(std::vector<AddressId> user_of);

  AddressId user_of(AddressId address) const { return user_of_.at(address); }
  std::size_t address_count() const { return user_of_.size(); }
  std::size_t user_count() const { return user_count_; }
  std::span<const AddressId> assignment() const { return user_of_; }

 private:
  std::vector<AddressId> user_of_;
  std::size_t user_count_ = 0;
};

/// Common-input-ownership clustering: every resolved input address of a
/// transaction joins one cluster. Coinbase transactions contribute nothing.
AddressClustering cluster_transactions(std::span<const ResolvedTransaction> transactions,
                                       std::size_t address_count);

struct ReuseHistogram {
  /// usage count r -> number of addresses used exactly r times.
  std::map<std::uint64_t, std::uint64_t> bins;
  std::uint64_t total_addresses = 0;

  /// Sum of r * bins[r].
  std::uint64_t total_occurrences() const;
};

/// Usage count of an address = number of distinct transactions it appears in,
/// on either the input or output side.
ReuseHistogram reuse_histogram(std::span<const ResolvedTransaction> transactions);

/// Splits a transaction stream into `parts` contiguous time ranges with equal
/// counts (the first `size % parts` ranges take one extra). Stable in time.
template <typename Tx>
std::vector<std::vector<Tx>> time_partition(std::span<const Tx> transactions, std::size_t parts) {
  if (parts == 0) throw UsageError("time_partition: parts must be >= 1");
  if (parts > transactions.size()) {
    throw UsageError("time_partition: more parts than transactions");
  }
  std::vector<Tx> sorted(transactions.begin(), transactions.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Tx& a, const Tx& b) { return a.timestamp < b.timestamp; });

  std::vector<std::vector<Tx>> out(parts);
  const std::size_t base = sorted.size() / parts;
  const std::size_t extra = sorted.size() % parts;
  auto it = sorted.begin();
  for (std::size_t p = 0; p < parts; ++p) {
    const auto n = static_cast<std::ptrdiff_t>(base + (p < extra ? 1 : 0));
    out[p].assign(std::make_move_iterator(it), std::make_move_iterator(it + n));
    it += n;
  }
  return out;
}

}  // namespace chainscope
