#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "usid/packet.hpp"

using namespace usid;

namespace {

Packet minimal_packet() {
  Packet p;
  p.outer.next_header = 253;  // experimental payload code
  p.outer.hop_limit = 64;
  p.outer.src = Ipv6Addr::parse("fd00:0000:0011::0002");
  p.outer.dst = Ipv6Addr::parse("fd00:0000:0031::0002");
  return p;
}

}  // namespace

TEST_CASE("minimal header parses and serializes to exactly 40 bytes") {
  Packet p = minimal_packet();
  auto bytes = serialize_packet(p);
  CHECK(bytes.size() == 40);
  Packet q = parse_packet(bytes);
  CHECK(q == p);
  CHECK(!q.srh.has_value());
}

TEST_CASE("one-SID SRH parses per the byte-offset layout") {
  // Hand-assembled against the SRH field layout: offsets are independent of
  // the codec under test.
  Ipv6Addr src = Ipv6Addr::parse("fcbb:bbbb:0100::");
  Ipv6Addr dst = Ipv6Addr::parse("fcbb:bbbb:0800:0700::");
  Ipv6Addr sid = Ipv6Addr::parse("fcbb:bbbb:0300:f00d::");

  std::vector<uint8_t> bytes;
  bytes.push_back(0x60);  //  0: version 6, tc high nibble
  bytes.push_back(0x00);  //  1: tc low nibble, flow high bits
  bytes.push_back(0x00);  //  2: flow
  bytes.push_back(0x00);  //  3: flow
  bytes.push_back(0x00);  //  4: payload length hi (8+16 = 24)
  bytes.push_back(24);    //  5: payload length lo
  bytes.push_back(43);    //  6: next header = routing
  bytes.push_back(63);    //  7: hop limit
  bytes.insert(bytes.end(), src.bytes().begin(), src.bytes().end());  //  8..23
  bytes.insert(bytes.end(), dst.bytes().begin(), dst.bytes().end());  // 24..39
  bytes.push_back(41);  // 40: SRH next header = IPv6
  bytes.push_back(2);   // 41: hdr-ext-len, two 8-byte units per SID
  bytes.push_back(4);   // 42: routing type
  bytes.push_back(1);   // 43: segments left
  bytes.push_back(0);   // 44: last entry
  bytes.push_back(0);   // 45: flags
  bytes.push_back(0);   // 46: tag hi
  bytes.push_back(0);   // 47: tag lo
  bytes.insert(bytes.end(), sid.bytes().begin(), sid.bytes().end());  // 48..63

  Packet p = parse_packet(bytes);
  REQUIRE(p.srh.has_value());
  CHECK(p.srh->segments.size() == 1);
  CHECK(p.srh->segments[0] == sid);
  CHECK(p.srh->segments_left == 1);
  CHECK(p.srh->next_header == 41);
  CHECK(p.outer.hop_limit == 63);
  CHECK(p.outer.src == src);
  CHECK(p.outer.dst == dst);
  CHECK(p.payload.empty());
  CHECK(serialize_packet(p) == bytes);
}

TEST_CASE("SRH claiming more SIDs than present is a truncation error") {
  Packet p = minimal_packet();
  auto bytes = serialize_packet(p);
  bytes[6] = 43;  // claim a routing header
  // append an 8-byte SRH stub claiming one SID (hdr-ext-len = 2)
  std::vector<uint8_t> srh{41, 2, 4, 1, 0, 0, 0, 0};
  bytes.insert(bytes.end(), srh.begin(), srh.end());
  bytes[5] = 8;  // payload length covers only the stub
  CHECK_THROWS_WITH_AS(parse_packet(bytes), doctest::Contains("inconsistent"), Error);
}

TEST_CASE("parse rejects the documented malformations") {
  Packet p = minimal_packet();
  auto good = serialize_packet(p);

  SUBCASE("truncated header") {
    good.resize(20);
    CHECK_THROWS_WITH_AS(parse_packet(good), doctest::Contains("truncated"), Error);
  }
  SUBCASE("wrong version") {
    good[0] = 0x40;
    CHECK_THROWS_AS(parse_packet(good), Error);
  }
  SUBCASE("payload length mismatch") {
    good.push_back(0xab);
    CHECK_THROWS_AS(parse_packet(good), Error);
  }
  SUBCASE("routing type other than SRH") {
    Packet q = minimal_packet();
    SegmentRoutingHeader h;
    h.next_header = 253;
    h.segments_left = 1;
    h.segments.push_back(Ipv6Addr::parse("fcbb:bbbb:0100::"));
    q.srh = h;
    q.outer.next_header = kProtoRouting;
    auto bytes = serialize_packet(q);
    bytes[42] = 3;  // RPL source routing, not ours
    CHECK_THROWS_WITH_AS(parse_packet(bytes), doctest::Contains("routing type"), Error);
  }
}

TEST_CASE("two-SID SRH serializes to 40 + 8 + 32 bytes before payload") {
  Packet p = minimal_packet();
  p.outer.next_header = kProtoRouting;
  SegmentRoutingHeader h;
  h.next_header = 253;
  h.segments_left = 2;
  h.segments = {Ipv6Addr::parse("fcbb:bbbb:0300:f00d::"), Ipv6Addr::parse("fcbb:bbbb:0700::")};
  p.srh = h;
  p.payload = {1, 2, 3};
  auto bytes = serialize_packet(p);
  CHECK(bytes.size() == 40 + 8 + 32 + 3);
  CHECK(p.srh->size_bytes() == 8 + 16 * 2);
  CHECK(p.payload_length() == 8 + 32 + 3);
}

TEST_CASE("serialize enforces structural limits") {
  Packet p = minimal_packet();
  SegmentRoutingHeader h;
  h.next_header = 253;
  h.segments.assign(128, Ipv6Addr::parse("fcbb:bbbb:0100::"));
  p.srh = h;
  p.outer.next_header = kProtoRouting;
  CHECK_THROWS_WITH_AS(serialize_packet(p), doctest::Contains("too long"), Error);

  p.srh->segments.resize(2);
  p.srh->segments_left = 3;
  CHECK_THROWS_AS(serialize_packet(p), Error);

  p.srh->segments_left = 1;
  p.outer.next_header = 17;  // SRH present but not signalled
  CHECK_THROWS_AS(serialize_packet(p), Error);
}

TEST_CASE("codec round-trips randomized packets") {
  std::mt19937_64 rng(0x5eed);
  auto rand_addr = [&] { return Ipv6Addr::from_pair(rng(), rng()); };

  for (int i = 0; i < 10000; ++i) {
    Packet p;
    p.outer.traffic_class = static_cast<uint8_t>(rng());
    p.outer.flow_label = static_cast<uint32_t>(rng()) & 0xfffff;
    p.outer.hop_limit = static_cast<uint8_t>(rng());
    p.outer.src = rand_addr();
    p.outer.dst = rand_addr();

    // cycle through SRH shapes: none, 1 SID, 5 SIDs, then random 1..8
    size_t n_sids;
    switch (i % 4) {
      case 0: n_sids = 0; break;
      case 1: n_sids = 1; break;
      case 2: n_sids = 5; break;
      default: n_sids = 1 + rng() % 8; break;
    }
    if (n_sids == 0) {
      p.outer.next_header = static_cast<uint8_t>(rng());
      if (p.outer.next_header == kProtoRouting) p.outer.next_header = 253;
    } else {
      p.outer.next_header = kProtoRouting;
      SegmentRoutingHeader h;
      h.next_header = 253;
      h.flags = static_cast<uint8_t>(rng());
      h.tag = static_cast<uint16_t>(rng());
      for (size_t k = 0; k < n_sids; ++k) h.segments.push_back(rand_addr());
      h.segments_left = static_cast<uint8_t>(rng() % (n_sids + 1));
      p.srh = std::move(h);
    }
    size_t payload_len = rng() % 64;
    p.payload.resize(payload_len);
    for (auto& b : p.payload) b = static_cast<uint8_t>(rng());

    auto bytes = serialize_packet(p);
    Packet q = parse_packet(bytes);
    CHECK(q == p);
    CHECK(serialize_packet(q) == bytes);
    if (p.srh) CHECK(p.srh->size_bytes() == 8 + 16 * p.srh->segments.size());
  }
}

TEST_CASE("hex dump prints 16 space-separated bytes per line") {
  std::vector<uint8_t> data(18);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i);
  CHECK(hex_dump(data) ==
        "00 01 02 03 04 05 06 07 08 09 0a 0b 0c 0d 0e 0f\n"
        "10 11\n");
  CHECK(hex_dump(std::vector<uint8_t>{}) == "");
}
