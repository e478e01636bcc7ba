#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "usid/error.hpp"

namespace usid {

// 128-bit IPv6 address, stored in network byte order.
//
// The textual form is the one used throughout traces and golden files:
// lowercase, every group written with four hex digits, and the longest run
// of two or more zero groups compressed to "::", e.g.
// "fcbb:bbbb:0800:0700:0200:f00d::". The parser additionally accepts
// conventional unpadded spellings ("fd00:0:11::2").
class Ipv6Addr {
 public:
  constexpr Ipv6Addr() = default;

  static Ipv6Addr from_bytes(std::span<const uint8_t, 16> bytes) {
    Ipv6Addr a;
    for (int i = 0; i < 16; ++i) a.b_[i] = bytes[i];
    return a;
  }

  // hi = bytes 0..7, lo = bytes 8..15 (big-endian interpretation).
  static Ipv6Addr from_pair(uint64_t hi, uint64_t lo) {
    Ipv6Addr a;
    for (int i = 0; i < 8; ++i) {
      a.b_[i] = static_cast<uint8_t>(hi >> (56 - 8 * i));
      a.b_[8 + i] = static_cast<uint8_t>(lo >> (56 - 8 * i));
    }
    return a;
  }

  static std::optional<Ipv6Addr> try_parse(std::string_view text) {
    // Split on "::" (at most once), then on ':'.
    std::array<uint16_t, 8> left{}, right{};
    int nleft = 0, nright = 0;
    size_t gap = text.find("::");
    std::string_view lhs = text.substr(0, gap == std::string_view::npos ? text.size() : gap);
    std::string_view rhs = gap == std::string_view::npos ? std::string_view{} : text.substr(gap + 2);
    if (rhs.find("::") != std::string_view::npos) return std::nullopt;
    if (!parse_groups(lhs, left, nleft)) return std::nullopt;
    if (!parse_groups(rhs, right, nright)) return std::nullopt;
    Ipv6Addr a;
    if (gap == std::string_view::npos) {
      if (nleft != 8) return std::nullopt;
      for (int i = 0; i < 8; ++i) a.set_group(i, left[i]);
    } else {
      if (nleft + nright > 7) return std::nullopt;  // "::" covers >= 1 zero group
      for (int i = 0; i < nleft; ++i) a.set_group(i, left[i]);
      for (int i = 0; i < nright; ++i) a.set_group(8 - nright + i, right[i]);
    }
    return a;
  }

  static Ipv6Addr parse(std::string_view text) {
    auto a = try_parse(text);
    if (!a) fail("invalid IPv6 address '" + std::string(text) + "'");
    return *a;
  }

  const std::array<uint8_t, 16>& bytes() const { return b_; }
  uint8_t byte(int i) const { return b_[static_cast<size_t>(i)]; }

  uint64_t hi() const {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | b_[i];
    return v;
  }
  uint64_t lo() const {
    uint64_t v = 0;
    for (int i = 8; i < 16; ++i) v = v << 8 | b_[i];
    return v;
  }

  uint16_t group(int i) const {
    return static_cast<uint16_t>(b_[2 * i] << 8 | b_[2 * i + 1]);
  }

  bool is_zero() const {
    for (uint8_t x : b_)
      if (x != 0) return false;
    return true;
  }

  // Address with all bits past `len` cleared.
  Ipv6Addr masked(int len) const {
    Ipv6Addr out;
    int full = len / 8;
    for (int i = 0; i < full; ++i) out.b_[i] = b_[i];
    if (len % 8 != 0 && full < 16)
      out.b_[full] = static_cast<uint8_t>(b_[full] & (0xff << (8 - len % 8)));
    return out;
  }

  std::string str() const {
    // Compress the longest run of zero groups (leftmost on ties) to "::".
    // A single zero group compresses too: the container notation writes
    // "...:0400::", never "...:0400:0000".
    int best_at = -1, best_len = 0;
    for (int i = 0; i < 8;) {
      if (group(i) != 0) {
        ++i;
        continue;
      }
      int j = i;
      while (j < 8 && group(j) == 0) ++j;
      if (j - i > best_len) {
        best_len = j - i;
        best_at = i;
      }
      i = j;
    }
    if (best_len < 1) best_at = -1;
    std::string out;
    for (int i = 0; i < 8;) {
      if (i == best_at) {
        out += "::";
        i += best_len;
        continue;
      }
      if (!out.empty() && out.back() != ':') out += ':';
      out += group_hex(group(i));
      ++i;
    }
    return out;
  }

  auto operator<=>(const Ipv6Addr&) const = default;

 private:
  static bool parse_groups(std::string_view s, std::array<uint16_t, 8>& out, int& n) {
    n = 0;
    if (s.empty()) return true;
    size_t pos = 0;
    while (true) {
      size_t colon = s.find(':', pos);
      std::string_view tok = s.substr(pos, colon == std::string_view::npos ? s.size() - pos : colon - pos);
      if (tok.empty() || tok.size() > 4 || n == 8) return false;
      uint32_t v = 0;
      for (char c : tok) {
        int d = hex_digit(c);
        if (d < 0) return false;
        v = v << 4 | static_cast<uint32_t>(d);
      }
      out[static_cast<size_t>(n++)] = static_cast<uint16_t>(v);
      if (colon == std::string_view::npos) return true;
      pos = colon + 1;
      if (pos >= s.size()) return false;  // trailing single ':'
    }
  }

  static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  static std::string group_hex(uint16_t g) {
    static const char* digits = "0123456789abcdef";
    std::string s(4, '0');
    for (int i = 3; i >= 0; --i) {
      s[static_cast<size_t>(i)] = digits[g & 0xf];
      g >>= 4;
    }
    return s;
  }

  void set_group(int i, uint16_t v) {
    b_[2 * i] = static_cast<uint8_t>(v >> 8);
    b_[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
  }

  std::array<uint8_t, 16> b_{};
};

// CIDR prefix in normalized form: all bits past `length` are zero.
class Prefix {
 public:
  Prefix() = default;

  Prefix(const Ipv6Addr& addr, int length) : addr_(addr), len_(length) {
    if (length < 0 || length > 128) fail("prefix length out of range");
    if (addr.masked(length) != addr)
      fail("prefix " + addr.str() + "/" + std::to_string(length) + " is not normalized");
  }

  // Masks the address instead of rejecting it.
  static Prefix truncated(const Ipv6Addr& addr, int length) {
    if (length < 0 || length > 128) fail("prefix length out of range");
    return Prefix(addr.masked(length), length);
  }

  static Prefix parse(std::string_view text) {
    size_t slash = text.find('/');
    if (slash == std::string_view::npos) fail("prefix '" + std::string(text) + "' missing '/len'");
    Ipv6Addr a = Ipv6Addr::parse(text.substr(0, slash));
    int len = 0;
    for (char c : text.substr(slash + 1)) {
      if (c < '0' || c > '9') fail("bad prefix length in '" + std::string(text) + "'");
      len = len * 10 + (c - '0');
      if (len > 128) fail("bad prefix length in '" + std::string(text) + "'");
    }
    return Prefix(a, len);
  }

  const Ipv6Addr& addr() const { return addr_; }
  int length() const { return len_; }

  bool contains(const Ipv6Addr& a) const { return a.masked(len_) == addr_; }
  bool contains(const Prefix& p) const {
    return p.len_ >= len_ && contains(p.addr_);
  }

  std::string str() const { return addr_.str() + "/" + std::to_string(len_); }

  auto operator<=>(const Prefix&) const = default;

 private:
  Ipv6Addr addr_{};
  int len_ = 0;
};

}  // namespace usid
