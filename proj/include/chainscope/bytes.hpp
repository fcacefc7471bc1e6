#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainscope {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Integer satoshi (1e-8 BTC). Every value computation uses this unit.
using Satoshi = std::int64_t;
/// Unix seconds.
using Timestamp = std::int64_t;

inline constexpr Satoshi kSatoshiPerBtc = 100'000'000;

std::string to_hex(ByteView bytes);
/// Throws UsageError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Fixed-size digest stored in wire order.
template <std::size_t N>
struct Digest {
  std::array<std::uint8_t, N> bytes{};

  auto operator<=>(const Digest&) const = default;

  bool is_null() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
  }
  ByteView view() const { return ByteView(bytes.data(), N); }
  std::string hex() const { return to_hex(view()); }
};

/// 32-byte double-SHA-256 (txids, block hashes). Displayed byte-reversed.
struct Hash256 : Digest<32> {
  std::string display_hex() const {
    auto reversed = bytes;
    std::reverse(reversed.begin(), reversed.end());
    return to_hex(ByteView(reversed.data(), reversed.size()));
  }
  static Hash256 from_display_hex(std::string_view hex);
};

/// 20-byte RIPEMD-160(SHA-256(pubkey)) payload of a P2PKH address.
struct Hash160 : Digest<20> {};

template <std::size_t N>
struct DigestHash {
  std::size_t operator()(const Digest<N>& d) const noexcept {
    // Digests are uniformly distributed; the leading 8 bytes are a fine hash.
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i) {
      h = (h << 8) | d.bytes[i];
    }
    return h;
  }
};

}  // namespace chainscope
