#include "chainscope/crypto.hpp"

#include <openssl/sha.h>

#include <algorithm>

namespace chainscope {

namespace {

constexpr std::string_view kAlphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

}  // namespace

std::array<std::uint8_t, 32> sha256(ByteView data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Hash256 sha256d(ByteView data) {
  const auto first = sha256(data);
  Hash256 h;
  h.bytes = sha256(ByteView(first.data(), first.size()));
  return h;
}

std::string base58_encode(ByteView data) {
  std::size_t zeros = 0;
  while (zeros < data.size() && data[zeros] == 0) ++zeros;

  // Big-endian base-58 digits, built by repeated multiply-add of each byte.
  std::vector<std::uint8_t> digits((data.size() - zeros) * 138 / 100 + 1, 0);
  std::size_t length = 0;
  for (std::size_t i = zeros; i < data.size(); ++i) {
    unsigned carry = data[i];
    std::size_t j = 0;
    for (auto it = digits.rbegin(); (carry != 0 || j < length) && it != digits.rend(); ++it, ++j) {
      carry += 256u * *it;
      *it = static_cast<std::uint8_t>(carry % 58);
      carry /= 58;
    }
    length = j;
  }
  auto it = digits.begin() + static_cast<std::ptrdiff_t>(digits.size() - length);
  while (it != digits.end() && *it == 0) ++it;

  std::string out(zeros, '1');
  for (; it != digits.end(); ++it) out.push_back(kAlphabet[*it]);
  return out;
}

std::optional<Bytes> base58_decode(std::string_view text) {
  std::size_t ones = 0;
  while (ones < text.size() && text[ones] == '1') ++ones;

  std::vector<std::uint8_t> b256((text.size() - ones) * 733 / 1000 + 1, 0);
  std::size_t length = 0;
  for (std::size_t i = ones; i < text.size(); ++i) {
    const auto pos = kAlphabet.find(text[i]);
    if (pos == std::string_view::npos) return std::nullopt;
    unsigned carry = static_cast<unsigned>(pos);
    std::size_t j = 0;
    for (auto it = b256.rbegin(); (carry != 0 || j < length) && it != b256.rend(); ++it, ++j) {
      carry += 58u * *it;
      *it = static_cast<std::uint8_t>(carry % 256);
      carry /= 256;
    }
    length = j;
  }
  auto it = b256.begin() + static_cast<std::ptrdiff_t>(b256.size() - length);
  while (it != b256.end() && *it == 0) ++it;

  Bytes out(ones, 0);
  out.insert(out.end(), it, b256.end());
  return out;
}

std::string base58check_encode(ByteView payload) {
  Bytes buf(payload.begin(), payload.end());
  const Hash256 check = sha256d(payload);
  buf.insert(buf.end(), check.bytes.begin(), check.bytes.begin() + 4);
  return base58_encode(buf);
}

std::optional<Bytes> base58check_decode(std::string_view text) {
  auto raw = base58_decode(text);
  if (!raw || raw->size() < 4) return std::nullopt;
  const std::size_t n = raw->size() - 4;
  const Hash256 check = sha256d(ByteView(raw->data(), n));
  if (!std::equal(check.bytes.begin(), check.bytes.begin() + 4, raw->begin() + static_cast<std::ptrdiff_t>(n))) {
    return std::nullopt;
  }
  raw->resize(n);
  return raw;
}

}  // namespace chainscope
