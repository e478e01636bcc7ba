#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usid/address.hpp"
#include "usid/error.hpp"

namespace usid {

// IANA protocol numbers used by the codec.
inline constexpr uint8_t kProtoIpv6 = 41;     // IPv6-in-IPv6
inline constexpr uint8_t kProtoRouting = 43;  // routing extension header
inline constexpr uint8_t kProtoIcmpv6 = 58;
inline constexpr uint8_t kProtoNoNext = 59;
inline constexpr uint8_t kSrhRoutingType = 4;

inline constexpr size_t kIpv6HeaderSize = 40;
inline constexpr size_t kSrhFixedSize = 8;
inline constexpr size_t kSidSize = 16;

// Fixed 40-byte IPv6 header. The version field is implicit (always 6) and
// payload length is derived at serialization time, never stored.
struct Ipv6Header {
  uint8_t traffic_class = 0;
  uint32_t flow_label = 0;  // 20 bits
  uint8_t next_header = kProtoNoNext;
  uint8_t hop_limit = 64;
  Ipv6Addr src;
  Ipv6Addr dst;

  bool operator==(const Ipv6Header&) const = default;
};

// Segment Routing Header, RFC 8754. `segments` is kept in wire order:
// index 0 is the final segment of the path. hdr-ext-len, routing type and
// last-entry are derived from the segment count.
struct SegmentRoutingHeader {
  uint8_t next_header = kProtoNoNext;
  uint8_t segments_left = 0;
  uint8_t flags = 0;
  uint16_t tag = 0;
  std::vector<Ipv6Addr> segments;

  uint8_t last_entry() const { return static_cast<uint8_t>(segments.size() - 1); }
  size_t size_bytes() const { return kSrhFixedSize + kSidSize * segments.size(); }

  bool operator==(const SegmentRoutingHeader&) const = default;
};

// Outer IPv6 packet with an optional SRH and an opaque inner payload.
struct Packet {
  Ipv6Header outer;
  std::optional<SegmentRoutingHeader> srh;
  std::vector<uint8_t> payload;

  // Value the payload-length field takes on the wire.
  size_t payload_length() const {
    return (srh ? srh->size_bytes() : 0) + payload.size();
  }

  bool operator==(const Packet&) const = default;
};

inline std::vector<uint8_t> serialize_packet(const Packet& p) {
  if (p.srh) {
    if (p.srh->segments.empty()) fail("SRH must carry at least one segment");
    if (p.srh->segments.size() > 127) fail("segment list too long for hdr-ext-len");
    if (p.srh->segments_left > p.srh->segments.size())
      fail("segments-left exceeds segment count");
    if (p.outer.next_header != kProtoRouting)
      fail("outer next-header must signal the routing header when an SRH is present");
  }
  size_t plen = p.payload_length();
  if (plen > 0xffff) fail("payload too long for IPv6 payload-length field");

  std::vector<uint8_t> out;
  out.reserve(kIpv6HeaderSize + plen);
  out.push_back(static_cast<uint8_t>(0x60 | (p.outer.traffic_class >> 4)));
  out.push_back(static_cast<uint8_t>((p.outer.traffic_class & 0x0f) << 4 |
                                     ((p.outer.flow_label >> 16) & 0x0f)));
  out.push_back(static_cast<uint8_t>(p.outer.flow_label >> 8));
  out.push_back(static_cast<uint8_t>(p.outer.flow_label));
  out.push_back(static_cast<uint8_t>(plen >> 8));
  out.push_back(static_cast<uint8_t>(plen));
  out.push_back(p.outer.next_header);
  out.push_back(p.outer.hop_limit);
  out.insert(out.end(), p.outer.src.bytes().begin(), p.outer.src.bytes().end());
  out.insert(out.end(), p.outer.dst.bytes().begin(), p.outer.dst.bytes().end());

  if (p.srh) {
    const auto& h = *p.srh;
    out.push_back(h.next_header);
    out.push_back(static_cast<uint8_t>(2 * h.segments.size()));
    out.push_back(kSrhRoutingType);
    out.push_back(h.segments_left);
    out.push_back(h.last_entry());
    out.push_back(h.flags);
    out.push_back(static_cast<uint8_t>(h.tag >> 8));
    out.push_back(static_cast<uint8_t>(h.tag));
    for (const auto& sid : h.segments)
      out.insert(out.end(), sid.bytes().begin(), sid.bytes().end());
  }
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

inline Packet parse_packet(std::span<const uint8_t> bytes) {
  if (bytes.size() < kIpv6HeaderSize) fail("truncated IPv6 header");
  if (bytes[0] >> 4 != 6) fail("not an IPv6 packet (version != 6)");

  Packet p;
  p.outer.traffic_class = static_cast<uint8_t>((bytes[0] & 0x0f) << 4 | bytes[1] >> 4);
  p.outer.flow_label = static_cast<uint32_t>(bytes[1] & 0x0f) << 16 |
                       static_cast<uint32_t>(bytes[2]) << 8 | bytes[3];
  size_t plen = static_cast<size_t>(bytes[4]) << 8 | bytes[5];
  p.outer.next_header = bytes[6];
  p.outer.hop_limit = bytes[7];
  p.outer.src = Ipv6Addr::from_bytes(bytes.subspan<8, 16>());
  p.outer.dst = Ipv6Addr::from_bytes(bytes.subspan<24, 16>());

  if (bytes.size() != kIpv6HeaderSize + plen)
    fail("payload-length field inconsistent with packet size");
  std::span<const uint8_t> rest = bytes.subspan(kIpv6HeaderSize);

  if (p.outer.next_header == kProtoRouting) {
    if (rest.size() < kSrhFixedSize) fail("truncated SRH");
    uint8_t hdr_ext_len = rest[1];
    if (rest[2] != kSrhRoutingType) fail("unexpected routing type (want SRH, type 4)");
    if (hdr_ext_len % 2 != 0) fail("SRH hdr-ext-len must be a whole number of SIDs");
    size_t n = hdr_ext_len / 2;
    if (n == 0) fail("SRH without segments");
    size_t srh_size = kSrhFixedSize + kSidSize * n;
    if (rest.size() < srh_size) fail("SRH hdr-ext-len inconsistent with remaining bytes");
    SegmentRoutingHeader h;
    h.next_header = rest[0];
    h.segments_left = rest[3];
    uint8_t last_entry = rest[4];
    h.flags = rest[5];
    h.tag = static_cast<uint16_t>(rest[6] << 8 | rest[7]);
    if (last_entry != n - 1) fail("SRH last-entry inconsistent with hdr-ext-len");
    if (h.segments_left > n) fail("SRH segments-left out of range");
    h.segments.reserve(n);
    for (size_t i = 0; i < n; ++i)
      h.segments.push_back(
          Ipv6Addr::from_bytes(rest.subspan(kSrhFixedSize + kSidSize * i).subspan<0, 16>()));
    p.srh = std::move(h);
    rest = rest.subspan(srh_size);
  }
  p.payload.assign(rest.begin(), rest.end());
  return p;
}

// Trace hex-dump form for packet bytes: two lowercase hex digits per byte,
// space separated, 16 bytes per line.
inline std::string hex_dump(std::span<const uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (size_t i = 0; i < bytes.size(); ++i) {
    out += digits[bytes[i] >> 4];
    out += digits[bytes[i] & 0xf];
    if (i + 1 == bytes.size() || (i + 1) % 16 == 0)
      out += '\n';
    else
      out += ' ';
  }
  return out;
}

}  // namespace usid
