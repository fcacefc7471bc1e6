#include "chainscope/blockparse.hpp"

#include <algorithm>
#include <cstring>

#include "chainscope/crypto.hpp"
#include "chainscope/error.hpp"

namespace chainscope {

namespace {

// Bounds-checked little-endian cursor. Offsets in errors are absolute.
class Reader {
 public:
  Reader(ByteView data, std::size_t base) : data_(data), base_(base) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t absolute() const { return base_ + pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) throw DecodeError(std::string("truncated ") + what, absolute());
  }

  template <typename T>
  T le(const char* what) {
    require(sizeof(T), what);
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::make_unsigned_t<T>>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::uint8_t peek(const char* what) const {
    require(1, what);
    return data_[pos_];
  }

  Hash256 hash(const char* what) {
    require(32, what);
    Hash256 h;
    std::memcpy(h.bytes.data(), data_.data() + pos_, 32);
    pos_ += 32;
    return h;
  }

  std::uint64_t varint() {
    const VarInt v = parse_varint(data_.subspan(pos_), absolute());
    pos_ += v.consumed;
    return v.value;
  }

  Bytes script(const char* what) {
    const std::size_t at = absolute();
    const std::uint64_t len = varint();
    if (len > remaining()) throw DecodeError(std::string(what) + " length exceeds remaining bytes", at);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return out;
  }

  ByteView consumed_view(std::size_t from) const { return data_.subspan(from, pos_ - from); }

 private:
  ByteView data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

bool is_coinbase_input(const TxInput& in) {
  return in.prev_txid.is_null() && in.prev_vout == 0xFFFFFFFFu;
}

}  // namespace

std::string Address::encoded() const {
  std::array<std::uint8_t, 21> payload{};
  payload[0] = kAddressVersion;
  std::copy(hash160.bytes.begin(), hash160.bytes.end(), payload.begin() + 1);
  return base58check_encode(ByteView(payload.data(), payload.size()));
}

std::optional<Address> Address::from_encoded(std::string_view text) {
  const auto payload = base58check_decode(text);
  if (!payload || payload->size() != 21 || (*payload)[0] != kAddressVersion) return std::nullopt;
  Address a;
  std::copy(payload->begin() + 1, payload->end(), a.hash160.bytes.begin());
  return a;
}

std::optional<Address> extract_p2pkh_address(ByteView script) {
  if (script.size() != 25) return std::nullopt;
  if (script[0] != 0x76 || script[1] != 0xA9 || script[2] != 0x14 || script[23] != 0x88 ||
      script[24] != 0xAC) {
    return std::nullopt;
  }
  Address a;
  std::copy(script.begin() + 3, script.begin() + 23, a.hash160.bytes.begin());
  return a;
}

VarInt parse_varint(ByteView bytes, std::size_t base_offset) {
  if (bytes.empty()) throw DecodeError("truncated varint", base_offset);
  const std::uint8_t tag = bytes[0];
  std::size_t width = 0;
  switch (tag) {
    case 0xFD: width = 2; break;
    case 0xFE: width = 4; break;
    case 0xFF: width = 8; break;
    default: return {tag, 1};
  }
  if (bytes.size() < 1 + width) throw DecodeError("truncated varint", base_offset);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[1 + i]) << (8 * i);
  return {v, 1 + width};
}

ParsedTransaction parse_transaction(ByteView bytes, std::size_t base_offset) {
  Reader r(bytes, base_offset);
  RawTransaction tx;
  tx.version = r.le<std::int32_t>("transaction version");

  const std::size_t count_at = r.absolute();
  const std::uint64_t n_inputs = r.varint();
  if (n_inputs == 0) {
    if (r.remaining() > 0 && r.peek("segwit flag") == 0x01) {
      throw DecodeError("segwit serialization is not supported", count_at);
    }
    throw DecodeError("transaction has no inputs", count_at);
  }
  for (std::uint64_t i = 0; i < n_inputs; ++i) {
    TxInput in;
    in.prev_txid = r.hash("input outpoint");
    in.prev_vout = r.le<std::uint32_t>("input outpoint index");
    in.script_sig = r.script("input script");
    in.sequence = r.le<std::uint32_t>("input sequence");
    tx.inputs.push_back(std::move(in));
  }

  const std::uint64_t n_outputs = r.varint();
  for (std::uint64_t i = 0; i < n_outputs; ++i) {
    TxOutput out;
    const std::size_t value_at = r.absolute();
    out.value = r.le<std::int64_t>("output value");
    if (out.value < 0) throw DecodeError("negative output value", value_at);
    out.script_pubkey = r.script("output script");
    out.address = extract_p2pkh_address(out.script_pubkey);
    tx.outputs.push_back(std::move(out));
  }
  tx.locktime = r.le<std::uint32_t>("locktime");

  tx.is_coinbase = tx.inputs.size() == 1 && is_coinbase_input(tx.inputs.front());
  tx.txid = sha256d(r.consumed_view(0));
  return {std::move(tx), r.pos()};
}

Block parse_block(ByteView payload, std::size_t base_offset) {
  Reader r(payload, base_offset);
  r.require(kBlockHeaderSize, "block header");

  Block block;
  block.header.hash = sha256d(payload.first(kBlockHeaderSize));
  block.header.version = r.le<std::int32_t>("block version");
  block.header.prev_block = r.hash("previous block hash");
  block.header.merkle_root = r.hash("merkle root");
  const std::size_t time_at = r.absolute();
  block.header.time = r.le<std::uint32_t>("block time");
  block.header.bits = r.le<std::uint32_t>("block bits");
  block.header.nonce = r.le<std::uint32_t>("block nonce");
  if (block.header.time == 0) throw DecodeError("block timestamp is zero", time_at);

  const std::size_t count_at = r.absolute();
  const std::uint64_t n_tx = r.varint();
  if (n_tx == 0) throw DecodeError("block has no transactions", count_at);

  std::size_t pos = r.pos();
  for (std::uint64_t i = 0; i < n_tx; ++i) {
    auto parsed = parse_transaction(payload.subspan(pos), base_offset + pos);
    parsed.transaction.timestamp = block.header.time;
    if (i == 0 && !parsed.transaction.is_coinbase) {
      throw DecodeError("first transaction is not a coinbase", base_offset + pos);
    }
    pos += parsed.consumed;
    block.transactions.push_back(std::move(parsed.transaction));
  }
  if (pos != payload.size()) {
    throw DecodeError("trailing bytes after last transaction", base_offset + pos);
  }
  return block;
}

std::vector<std::filesystem::path> list_block_files(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw DataError("not a directory: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

BlockScanner::BlockScanner(const std::filesystem::path& directory)
    : BlockScanner(list_block_files(directory)) {}

BlockScanner::BlockScanner(std::vector<std::filesystem::path> files) : files_(std::move(files)) {}

bool BlockScanner::open_next_file() {
  while (file_index_ < files_.size()) {
    in_ = std::ifstream(files_[file_index_++], std::ios::binary);
    offset_ = 0;
    if (in_) return true;
    issues_.push_back({files_[file_index_ - 1], 0, "cannot open file"});
  }
  return false;
}

bool BlockScanner::read_exact(std::uint8_t* out, std::size_t n) {
  in_.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  offset_ += got;
  return got == n;
}

bool BlockScanner::sync_to_magic() {
  std::size_t matched = 0;
  for (int c = in_.get(); c != std::char_traits<char>::eof(); c = in_.get()) {
    ++offset_;
    const auto byte = static_cast<std::uint8_t>(c);
    if (byte == kBlockMagic[matched]) {
      if (++matched == kBlockMagic.size()) return true;
    } else {
      // The magic has no proper border, so a mismatch only restarts on its first byte.
      matched = byte == kBlockMagic[0] ? 1 : 0;
    }
  }
  return false;
}

std::optional<Block> BlockScanner::next() {
  while (true) {
    if (!in_.is_open() && !open_next_file()) return std::nullopt;
    const auto& file = files_[file_index_ - 1];

    const int first = in_.get();
    if (first == std::char_traits<char>::eof()) {
      in_.close();
      continue;
    }
    std::uint64_t start = offset_++;
    if (first == 0) {
      ++padding_bytes_;
      continue;
    }

    std::array<std::uint8_t, 3> rest{};
    const bool magic_ok = static_cast<std::uint8_t>(first) == kBlockMagic[0] &&
                          read_exact(rest.data(), rest.size()) &&
                          std::equal(rest.begin(), rest.end(), kBlockMagic.begin() + 1);
    if (!magic_ok) {
      issues_.push_back({file, start, "bad magic bytes"});
      in_.clear();
      in_.seekg(static_cast<std::streamoff>(start + 1));
      offset_ = start + 1;
      if (!sync_to_magic()) {
        in_.close();
        continue;
      }
      start = offset_ - kBlockMagic.size();
    }

    std::array<std::uint8_t, 4> len_bytes{};
    if (!read_exact(len_bytes.data(), len_bytes.size())) {
      issues_.push_back({file, start, "truncated record length"});
      in_.close();
      continue;
    }
    const std::uint32_t length = static_cast<std::uint32_t>(len_bytes[0]) |
                                 (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                                 (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                                 (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    const auto file_size = std::filesystem::file_size(file);
    if (length > file_size - offset_) {
      issues_.push_back({file, start, "record length exceeds file size"});
      in_.close();
      continue;
    }
    Bytes payload(length);
    if (!read_exact(payload.data(), payload.size())) {
      issues_.push_back({file, start, "truncated record"});
      in_.close();
      continue;
    }
    try {
      Block block = parse_block(payload, start + 8);
      record_bytes_ += 8 + static_cast<std::uint64_t>(length);
      return block;
    } catch (const DecodeError& e) {
      issues_.push_back({file, e.offset(), e.what()});
    }
  }
}

}  // namespace chainscope
