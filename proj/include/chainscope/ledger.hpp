#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "chainscope/blockparse.hpp"

namespace chainscope {

/// Dense index of an interned address, assigned in first-seen order.
using AddressId = std::uint32_t;

class AddressBook {
 public:
  AddressId intern(const Address& address);
  std::optional<AddressId> find(const Address& address) const;
  const Address& at(AddressId id) const { return addresses_.at(id); }
  std::size_t size() const { return addresses_.size(); }

 private:
  std::vector<Address> addresses_;
  std::unordered_map<Hash160, AddressId, DigestHash<20>> ids_;
};

struct Outpoint {
  Hash256 txid;
  std::uint32_t vout = 0;

  bool operator==(const Outpoint&) const = default;
};

struct OutpointHash {
  std::size_t operator()(const Outpoint& o) const noexcept {
    return DigestHash<32>{}(o.txid) ^ (static_cast<std::size_t>(o.vout) * 0x9E3779B97F4A7C15ull);
  }
};

/// Maps every output ever seen to its address (absent for non-P2PKH
/// scripts). Built by a single writer, read-only afterwards.
class OutpointIndex {
 public:
  void add(const RawTransaction& tx, AddressBook& book);
  /// nullptr if the outpoint was never seen.
  const std::optional<AddressId>* find(const Outpoint& outpoint) const;
  std::size_t size() const { return index_.size(); }

 private:
  std::unordered_map<Outpoint, std::optional<AddressId>, OutpointHash> index_;
};

struct ResolvedOutput {
  Satoshi value = 0;
  std::optional<AddressId> address;

  bool operator==(const ResolvedOutput&) const = default;
};

/// A transaction with inputs mapped to the addresses of the outputs they
/// spend. This is the unit consumed by clustering, reuse statistics and the
/// user graph.
struct ResolvedTransaction {
  Timestamp timestamp = 0;
  bool is_coinbase = false;
  /// Addresses of resolved inputs, in input order (may repeat).
  std::vector<AddressId> input_addresses;
  /// Inputs whose outpoint was not found in the index.
  std::uint32_t unresolved_inputs = 0;
  std::vector<ResolvedOutput> outputs;

  bool operator==(const ResolvedTransaction&) const = default;
};

ResolvedTransaction resolve_transaction(const RawTransaction& tx, const OutpointIndex& index,
                                        const AddressBook& book);

struct TransactionSet {
  AddressBook addresses;
  std::vector<ResolvedTransaction> transactions;
  std::uint64_t unresolved_inputs = 0;
  std::uint64_t block_count = 0;
  std::vector<ScanIssue> issues;
};

/// Two passes over in-memory blocks: index all outputs, then resolve inputs.
TransactionSet resolve_blocks(std::span<const Block> blocks);

/// Same two passes streamed over the raw block files in `directory`; only
/// one block is held in memory at a time.
TransactionSet load_block_directory(const std::filesystem::path& directory);

}  // namespace chainscope
