#pragma once

// Independent wire-format writer used as the oracle for the block parser.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "chainscope/blockparse.hpp"
#include "chainscope/crypto.hpp"

namespace testsupport {

using chainscope::Bytes;

inline void put_le(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_varint(Bytes& out, std::uint64_t v) {
  if (v < 0xFD) {
    out.push_back(static_cast<std::uint8_t>(v));
  } else if (v <= 0xFFFF) {
    out.push_back(0xFD);
    put_le(out, v, 2);
  } else if (v <= 0xFFFFFFFFull) {
    out.push_back(0xFE);
    put_le(out, v, 4);
  } else {
    out.push_back(0xFF);
    put_le(out, v, 8);
  }
}

inline void put_bytes(Bytes& out, const std::uint8_t* p, std::size_t n) { out.insert(out.end(), p, p + n); }

inline Bytes serialize(const chainscope::RawTransaction& tx) {
  Bytes out;
  put_le(out, static_cast<std::uint32_t>(tx.version), 4);
  put_varint(out, tx.inputs.size());
  for (const auto& in : tx.inputs) {
    put_bytes(out, in.prev_txid.bytes.data(), 32);
    put_le(out, in.prev_vout, 4);
    put_varint(out, in.script_sig.size());
    put_bytes(out, in.script_sig.data(), in.script_sig.size());
    put_le(out, in.sequence, 4);
  }
  put_varint(out, tx.outputs.size());
  for (const auto& o : tx.outputs) {
    put_le(out, static_cast<std::uint64_t>(o.value), 8);
    put_varint(out, o.script_pubkey.size());
    put_bytes(out, o.script_pubkey.data(), o.script_pubkey.size());
  }
  put_le(out, tx.locktime, 4);
  return out;
}

inline Bytes serialize_header(const chainscope::BlockHeader& h) {
  Bytes out;
  put_le(out, static_cast<std::uint32_t>(h.version), 4);
  put_bytes(out, h.prev_block.bytes.data(), 32);
  put_bytes(out, h.merkle_root.bytes.data(), 32);
  put_le(out, h.time, 4);
  put_le(out, h.bits, 4);
  put_le(out, h.nonce, 4);
  return out;
}

inline Bytes serialize(const chainscope::Block& b) {
  Bytes out = serialize_header(b.header);
  put_varint(out, b.transactions.size());
  for (const auto& tx : b.transactions) {
    const Bytes t = serialize(tx);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

/// magic | LE length | payload
inline Bytes record(const Bytes& payload) {
  Bytes out(chainscope::kBlockMagic.begin(), chainscope::kBlockMagic.end());
  put_le(out, payload.size(), 4);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline void write_bytes(const std::filesystem::path& file, const Bytes& bytes) {
  std::ofstream out(file, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Bytes p2pkh_script(const chainscope::Hash160& h) {
  Bytes s{0x76, 0xA9, 0x14};
  s.insert(s.end(), h.bytes.begin(), h.bytes.end());
  s.push_back(0x88);
  s.push_back(0xAC);
  return s;
}

inline chainscope::Hash160 hash160_of(std::uint64_t k) {
  chainscope::Hash160 h;
  const auto d = chainscope::sha256(chainscope::ByteView(reinterpret_cast<const std::uint8_t*>(&k), sizeof k));
  std::copy_n(d.begin(), 20, h.bytes.begin());
  return h;
}

/// Fills txid and addresses the way the parser derives them.
inline void finalize(chainscope::RawTransaction& tx) {
  const Bytes raw = serialize(tx);
  tx.txid = chainscope::sha256d(raw);
  for (auto& o : tx.outputs) o.address = chainscope::extract_p2pkh_address(o.script_pubkey);
  tx.is_coinbase = tx.inputs.size() == 1 && tx.inputs[0].prev_txid.is_null() &&
                   tx.inputs[0].prev_vout == 0xFFFFFFFFu;
}

inline void finalize(chainscope::Block& b) {
  b.header.hash = chainscope::sha256d(serialize_header(b.header));
  for (auto& tx : b.transactions) {
    finalize(tx);
    tx.timestamp = b.header.time;
  }
}

/// A random transaction; script lengths straddle the varint width changes.
inline chainscope::RawTransaction random_transaction(std::mt19937_64& rng) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  auto random_script = [&]() {
    static constexpr std::size_t kLengths[] = {0, 1, 25, 0xFC, 0xFD, 0x100, 300};
    Bytes s(pick(0, 3) == 0 ? kLengths[pick(0, 6)] : pick(0, 80));
    for (auto& b : s) b = static_cast<std::uint8_t>(pick(0, 255));
    return s;
  };
  chainscope::RawTransaction tx;
  tx.version = static_cast<std::int32_t>(pick(1, 2));
  const auto n_in = pick(1, 4);
  for (std::uint64_t i = 0; i < n_in; ++i) {
    chainscope::TxInput in;
    for (auto& b : in.prev_txid.bytes) b = static_cast<std::uint8_t>(pick(0, 255));
    in.prev_vout = static_cast<std::uint32_t>(pick(0, 20));
    in.script_sig = random_script();
    in.sequence = static_cast<std::uint32_t>(pick(0, 0xFFFFFFFFull));
    tx.inputs.push_back(std::move(in));
  }
  const auto n_out = pick(0, 4) == 0 ? pick(0, 300) : pick(1, 4);
  for (std::uint64_t i = 0; i < n_out; ++i) {
    chainscope::TxOutput o;
    o.value = static_cast<chainscope::Satoshi>(pick(0, 21'000'000ull * 100'000'000ull));
    o.script_pubkey = pick(0, 1) ? p2pkh_script(hash160_of(rng())) : random_script();
    tx.outputs.push_back(std::move(o));
  }
  tx.locktime = static_cast<std::uint32_t>(pick(0, 0xFFFFFFFFull));
  finalize(tx);
  return tx;
}

// Block 0 of the main chain, 285 bytes.
inline constexpr const char* kGenesisBlockHex =
    "0100000000000000000000000000000000000000000000000000000000000000000000003ba3edfd7a7b12b27ac72c3e"
    "67768f617fc81bc3888a51323a9fb8aa4b1e5e4a29ab5f49ffff001d1dac2b7c0101000000010000000000000000000000"
    "000000000000000000000000000000000000000000ffffffff4d04ffff001d0104455468652054696d65732030332f4a61"
    "6e2f32303039204368616e63656c6c6f72206f6e206272696e6b206f66207365636f6e64206261696c6f757420666f72"
    "2062616e6b73ffffffff0100f2052a01000000434104678afdb0fe5548271967f1a67130b7105cd6a828e03909a67962"
    "e0ea1f61deb649f6bc3f4cef38c4f35504e51ec112de5c384df7ba0b8d578a4c702b6bf11d5fac00000000";

}  // namespace testsupport
