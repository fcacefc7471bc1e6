#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "chainscope/bytes.hpp"

namespace chainscope {

inline constexpr std::array<std::uint8_t, 4> kBlockMagic{0xF9, 0xBE, 0xB4, 0xD9};
inline constexpr std::size_t kBlockHeaderSize = 80;
inline constexpr std::uint8_t kAddressVersion = 0x00;

/// Pay-to-public-key-hash destination.
struct Address {
  Hash160 hash160;

  auto operator<=>(const Address&) const = default;

  /// Base58Check with version byte 0x00.
  std::string encoded() const;
  /// Inverse of encoded(); empty on bad checksum, version, or length.
  static std::optional<Address> from_encoded(std::string_view text);
};

/// Returns the address iff `script` is exactly
/// OP_DUP OP_HASH160 <20 bytes> OP_EQUALVERIFY OP_CHECKSIG.
std::optional<Address> extract_p2pkh_address(ByteView script);

struct VarInt {
  std::uint64_t value = 0;
  std::size_t consumed = 0;
};

/// Decodes a CompactSize integer. `base_offset` is added to reported offsets.
VarInt parse_varint(ByteView bytes, std::size_t base_offset = 0);

struct TxInput {
  Hash256 prev_txid;
  std::uint32_t prev_vout = 0;
  Bytes script_sig;
  std::uint32_t sequence = 0;

  bool operator==(const TxInput&) const = default;
};

struct TxOutput {
  Satoshi value = 0;
  Bytes script_pubkey;
  std::optional<Address> address;

  bool operator==(const TxOutput&) const = default;
};

struct RawTransaction {
  Hash256 txid;
  std::int32_t version = 1;
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;
  std::uint32_t locktime = 0;
  bool is_coinbase = false;
  /// Header time of the enclosing block; 0 for a bare transaction.
  Timestamp timestamp = 0;

  bool operator==(const RawTransaction&) const = default;
};

struct ParsedTransaction {
  RawTransaction transaction;
  std::size_t consumed = 0;
};

/// Decodes one transaction starting at its version field. Throws DecodeError
/// on truncation, oversized scripts, negative values or segwit serialization.
ParsedTransaction parse_transaction(ByteView bytes, std::size_t base_offset = 0);

struct BlockHeader {
  std::int32_t version = 0;
  Hash256 prev_block;
  Hash256 merkle_root;
  std::uint32_t time = 0;
  std::uint32_t bits = 0;
  std::uint32_t nonce = 0;
  /// sha256d of the 80 header bytes.
  Hash256 hash;
};

struct Block {
  /// Not derived from the header chain; blocks are keyed by timestamp.
  std::optional<std::uint64_t> height_hint;
  BlockHeader header;
  std::vector<RawTransaction> transactions;

  Timestamp timestamp() const { return header.time; }
};

/// Decodes a block payload (header + transactions). The payload must be
/// consumed exactly.
Block parse_block(ByteView payload, std::size_t base_offset = 0);

struct ScanIssue {
  std::filesystem::path file;
  std::uint64_t offset = 0;
  std::string message;
};

/// Regular files in `directory`, sorted by file name.
std::vector<std::filesystem::path> list_block_files(const std::filesystem::path& directory);

/// Streams blocks out of raw block files one record at a time. Bad magic is
/// recorded as an issue and the scanner resynchronizes on the next magic
/// sequence; undecodable records are recorded and skipped.
class BlockScanner {
 public:
  explicit BlockScanner(const std::filesystem::path& directory);
  explicit BlockScanner(std::vector<std::filesystem::path> files);

  std::optional<Block> next();

  const std::vector<ScanIssue>& issues() const { return issues_; }
  /// Bytes belonging to emitted records (magic + length + payload).
  std::uint64_t record_bytes() const { return record_bytes_; }
  /// Zero bytes skipped between records.
  std::uint64_t padding_bytes() const { return padding_bytes_; }

 private:
  bool open_next_file();
  bool read_exact(std::uint8_t* out, std::size_t n);
  bool sync_to_magic();

  std::vector<std::filesystem::path> files_;
  std::size_t file_index_ = 0;
  std::ifstream in_;
  std::uint64_t offset_ = 0;
  std::vector<ScanIssue> issues_;
  std::uint64_t record_bytes_ = 0;
  std::uint64_t padding_bytes_ = 0;
};

}  // namespace chainscope
