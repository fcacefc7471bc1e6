#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "chainscope/bytes.hpp"

namespace chainscope {

std::array<std::uint8_t, 32> sha256(ByteView data);
/// SHA-256 applied twice, as used for txids, block hashes and checksums.
Hash256 sha256d(ByteView data);

std::string base58_encode(ByteView data);
std::optional<Bytes> base58_decode(std::string_view text);

/// Base58 of payload || first four bytes of sha256d(payload).
std::string base58check_encode(ByteView payload);
/// Returns the payload (checksum stripped) if the checksum verifies.
std::optional<Bytes> base58check_decode(std::string_view text);

}  // namespace chainscope
