#include "chainscope/ledger.hpp"

namespace chainscope {

AddressId AddressBook::intern(const Address& address) {
  const auto [it, inserted] = ids_.try_emplace(address.hash160, static_cast<AddressId>(addresses_.size()));
  if (inserted) addresses_.push_back(address);
  return it->second;
}

std::optional<AddressId> AddressBook::find(const Address& address) const {
  const auto it = ids_.find(address.hash160);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void OutpointIndex::add(const RawTransaction& tx, AddressBook& book) {
  for (std::uint32_t vout = 0; vout < tx.outputs.size(); ++vout) {
    const auto& out = tx.outputs[vout];
    std::optional<AddressId> id;
    if (out.address) id = book.intern(*out.address);
    index_.insert_or_assign(Outpoint{tx.txid, vout}, id);
  }
}

const std::optional<AddressId>* OutpointIndex::find(const Outpoint& outpoint) const {
  const auto it = index_.find(outpoint);
  return it == index_.end() ? nullptr : &it->second;
}

ResolvedTransaction resolve_transaction(const RawTransaction& tx, const OutpointIndex& index,
                                        const AddressBook& book) {
  ResolvedTransaction out;
  out.timestamp = tx.timestamp;
  out.is_coinbase = tx.is_coinbase;
  if (!tx.is_coinbase) {
    for (const auto& in : tx.inputs) {
      const auto* hit = index.find(Outpoint{in.prev_txid, in.prev_vout});
      if (hit == nullptr) {
        ++out.unresolved_inputs;
      } else if (hit->has_value()) {
        out.input_addresses.push_back(**hit);
      }
    }
  }
  for (const auto& o : tx.outputs) {
    ResolvedOutput r{o.value, std::nullopt};
    if (o.address) r.address = book.find(*o.address);
    out.outputs.push_back(r);
  }
  return out;
}

TransactionSet resolve_blocks(std::span<const Block> blocks) {
  TransactionSet set;
  OutpointIndex index;
  for (const auto& block : blocks) {
    for (const auto& tx : block.transactions) index.add(tx, set.addresses);
  }
  for (const auto& block : blocks) {
    ++set.block_count;
    for (const auto& tx : block.transactions) {
      auto resolved = resolve_transaction(tx, index, set.addresses);
      set.unresolved_inputs += resolved.unresolved_inputs;
      set.transactions.push_back(std::move(resolved));
    }
  }
  return set;
}

TransactionSet load_block_directory(const std::filesystem::path& directory) {
  TransactionSet set;
  OutpointIndex index;
  const auto files = list_block_files(directory);
  {
    BlockScanner scanner(files);
    while (auto block = scanner.next()) {
      for (const auto& tx : block->transactions) index.add(tx, set.addresses);
    }
    set.issues = scanner.issues();
  }
  BlockScanner scanner(files);
  while (auto block = scanner.next()) {
    ++set.block_count;
    for (const auto& tx : block->transactions) {
      auto resolved = resolve_transaction(tx, index, set.addresses);
      set.unresolved_inputs += resolved.unresolved_inputs;
      set.transactions.push_back(std::move(resolved));
    }
  }
  return set;
}

}  // namespace chainscope
