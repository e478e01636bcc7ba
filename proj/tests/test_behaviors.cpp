#include <doctest.h>

#include <random>
#include <vector>

#include "usid/behaviors.hpp"

using namespace usid;

namespace {

UsidScheme demo_scheme() { return UsidScheme::defaults(); }

Packet inner_packet() {
  Packet p;
  p.outer.next_header = kProtoIcmpv6;
  p.outer.hop_limit = 64;
  p.outer.src = Ipv6Addr::parse("fd00:0000:0011::0002");
  p.outer.dst = Ipv6Addr::parse("fd00:0000:0031::0002");
  p.payload = {0x80, 0, 0, 0, 1, 2, 3, 4};
  return p;
}

// Encapsulated packet as it arrives at V4 in the demo: one container left in
// the SRH, segments-left 1.
Packet at_v4() {
  Packet p;
  p.outer.next_header = kProtoRouting;
  p.outer.hop_limit = 60;
  p.outer.src = Ipv6Addr::parse("fcbb:bbbb:0100::");
  p.outer.dst = Ipv6Addr::parse("fcbb:bbbb:0400::");
  SegmentRoutingHeader h;
  h.next_header = kProtoIpv6;
  h.segments_left = 1;
  h.segments = {Ipv6Addr::parse("fcbb:bbbb:0300:f00d::")};
  p.srh = h;
  p.payload = serialize_packet(inner_packet());
  return p;
}

BehaviorParams un_params() {
  BehaviorParams params;
  params.scheme = demo_scheme();
  return params;
}

}  // namespace

TEST_CASE("End copies the next segment into the destination address") {
  Packet p = at_v4();
  BehaviorOutcome o = end_behavior(p);
  auto c = std::get<ContinueOutcome>(o);
  CHECK(c.packet.outer.dst.str() == "fcbb:bbbb:0300:f00d::");
  CHECK(c.packet.srh->segments_left == 0);
  CHECK(c.packet.outer.hop_limit == 59);
  CHECK(c.table == kDefaultTable);
}

TEST_CASE("End error paths") {
  Packet p = at_v4();
  p.srh->segments_left = 0;
  CHECK(std::get<DropOutcome>(end_behavior(p)).reason == reason::kNoSegmentsLeft);

  p = at_v4();
  p.srh.reset();
  p.outer.next_header = kProtoIpv6;
  CHECK(std::get<DropOutcome>(end_behavior(p)).reason == reason::kMissingSrh);

  p = at_v4();
  p.outer.hop_limit = 0;
  CHECK(std::get<DropOutcome>(end_behavior(p)).reason == reason::kHopLimitExhausted);
}

TEST_CASE("End with hop limit one still continues; the next node drops") {
  Packet p = at_v4();
  p.outer.hop_limit = 1;
  auto c = std::get<ContinueOutcome>(end_behavior(p));
  CHECK(c.packet.outer.hop_limit == 0);
}

TEST_CASE("uN shifts while the container holds more uSIDs") {
  Packet p = at_v4();
  p.outer.dst = Ipv6Addr::parse("fcbb:bbbb:0800:0700:0200:f00d::");
  auto c = std::get<ContinueOutcome>(un_behavior(p, un_params()));
  CHECK(c.packet.outer.dst.str() == "fcbb:bbbb:0700:0200:f00d::");
  CHECK(c.packet.outer.hop_limit == 59);
  CHECK(c.packet.srh->segments_left == 1);  // SRH untouched by the shift
}

TEST_CASE("uN falls back to End semantics at the end of the container") {
  Packet p = at_v4();  // dst fcbb:bbbb:0400::, next uSID is zero
  auto c = std::get<ContinueOutcome>(un_behavior(p, un_params()));
  CHECK(c.packet.outer.dst.str() == "fcbb:bbbb:0300:f00d::");
  CHECK(c.packet.srh->segments_left == 0);
  CHECK(c.packet.outer.hop_limit == 59);  // single decrement, not two
}

TEST_CASE("uN drops an exhausted micro-program") {
  Packet p = at_v4();
  p.srh.reset();
  p.outer.next_header = kProtoIpv6;
  CHECK(std::get<DropOutcome>(un_behavior(p, un_params())).reason ==
        reason::kMicroProgramExhausted);

  p = at_v4();
  p.srh->segments_left = 0;
  CHECK(std::get<DropOutcome>(un_behavior(p, un_params())).reason ==
        reason::kMicroProgramExhausted);

  p = at_v4();
  p.outer.dst = Ipv6Addr::parse("fd00::1");
  CHECK(std::get<DropOutcome>(un_behavior(p, un_params())).reason == reason::kOutsideBlock);
}

TEST_CASE("uA cross-connects through the configured adjacency") {
  BehaviorParams params = un_params();
  params.adjacency = Adjacency{Ipv6Addr::parse("fcbb:bbbb:0700::"), "r8-r7"};

  Packet p = at_v4();
  p.outer.dst = Ipv6Addr::parse("fcbb:bbbb:0800:0700::");
  auto x = std::get<CrossConnectOutcome>(ua_behavior(p, params));
  CHECK(x.packet.outer.dst.str() == "fcbb:bbbb:0700::");
  CHECK(x.adjacency.link == "r8-r7");
  CHECK(x.packet.outer.hop_limit == 59);

  // exhausted container: End.X semantics through the same adjacency
  p = at_v4();
  auto e = std::get<CrossConnectOutcome>(ua_behavior(p, params));
  CHECK(e.packet.outer.dst.str() == "fcbb:bbbb:0300:f00d::");
  CHECK(e.packet.srh->segments_left == 0);

  p = at_v4();
  CHECK(std::get<DropOutcome>(ua_behavior(p, un_params())).reason ==
        reason::kMissingAdjacency);
}

TEST_CASE("End.DT6 delivers the inner packet to the configured table") {
  BehaviorParams params;
  params.table = 254;
  Packet p = at_v4();
  p.srh->segments_left = 0;
  auto d = std::get<DeliverOutcome>(end_dt6_behavior(p, params));
  CHECK(d.table == 254);
  Packet inner = parse_packet(d.inner);
  CHECK(inner == inner_packet());
}

TEST_CASE("End.DT6 rejects payloads that are not IPv6 packets") {
  BehaviorParams params;
  params.table = 254;
  Packet p = at_v4();
  p.payload = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(std::get<DropOutcome>(end_dt6_behavior(p, params)).reason == reason::kInnerNotIpv6);
  p = at_v4();
  CHECK(std::get<DropOutcome>(end_dt6_behavior(p, BehaviorParams{})).reason ==
        reason::kMissingTable);
}

TEST_CASE("encapsulation layouts per container count") {
  Ipv6Addr src = Ipv6Addr::parse("fcbb:bbbb:0100::");
  auto inner = serialize_packet(inner_packet());

  SUBCASE("one container: plain IPv6-in-IPv6, 40 byte overhead") {
    std::vector<Ipv6Addr> cs{Ipv6Addr::parse("fcbb:bbbb:0300:f00d::")};
    Packet p = h_encap_red(inner, cs, src, 64);
    CHECK(!p.srh.has_value());
    CHECK(p.outer.next_header == kProtoIpv6);
    CHECK(p.outer.dst == cs[0]);
    CHECK(serialize_packet(p).size() == 40 + inner.size());
  }
  SUBCASE("two containers: the demo request, 64 byte overhead") {
    std::vector<Ipv6Addr> cs{Ipv6Addr::parse("fcbb:bbbb:0200:0700:0600:0500:0400::"),
                             Ipv6Addr::parse("fcbb:bbbb:0300:f00d::")};
    Packet p = h_encap_red(inner, cs, src, 64);
    CHECK(p.outer.dst == cs[0]);
    REQUIRE(p.srh.has_value());
    CHECK(p.srh->segments == std::vector<Ipv6Addr>{cs[1]});
    CHECK(p.srh->segments_left == 1);
    CHECK(serialize_packet(p).size() == 40 + 8 + 16 + inner.size());
  }
  SUBCASE("three containers: two SRH entries, 80 byte overhead") {
    std::vector<Ipv6Addr> cs{Ipv6Addr::parse("fcbb:bbbb:0100::"),
                             Ipv6Addr::parse("fcbb:bbbb:0200::"),
                             Ipv6Addr::parse("fcbb:bbbb:0300:f00d::")};
    Packet p = h_encap_red(inner, cs, src, 64);
    REQUIRE(p.srh.has_value());
    CHECK(p.srh->segments == std::vector<Ipv6Addr>{cs[2], cs[1]});  // reverse order
    CHECK(p.srh->segments_left == 2);
    CHECK(serialize_packet(p).size() == 40 + 8 + 2 * 16 + inner.size());
  }
  SUBCASE("empty container list is a caller error") {
    CHECK_THROWS_AS(h_encap_red(inner, std::vector<Ipv6Addr>{}, src, 64), Error);
  }
}

TEST_CASE("walking the SRH from an encap consumes containers in path order") {
  Ipv6Addr src = Ipv6Addr::parse("fcbb:bbbb:0100::");
  std::vector<Ipv6Addr> cs{Ipv6Addr::parse("fcbb:bbbb:0a00::"),
                           Ipv6Addr::parse("fcbb:bbbb:0b00::"),
                           Ipv6Addr::parse("fcbb:bbbb:0c00::")};
  Packet p = h_encap_red(serialize_packet(inner_packet()), cs, src, 64);
  CHECK(p.outer.dst == cs[0]);
  auto c1 = std::get<ContinueOutcome>(end_behavior(p));
  CHECK(c1.packet.outer.dst == cs[1]);
  auto c2 = std::get<ContinueOutcome>(end_behavior(c1.packet));
  CHECK(c2.packet.outer.dst == cs[2]);
  CHECK(c2.packet.srh->segments_left == 0);
}

TEST_CASE("encap then End.DT6 recovers the inner packet bit-exactly") {
  std::mt19937_64 rng(46);
  BehaviorParams dt6;
  dt6.table = 254;
  for (int i = 0; i < 500; ++i) {
    Packet inner;
    inner.outer.next_header = kProtoIcmpv6;
    inner.outer.hop_limit = static_cast<uint8_t>(rng());
    inner.outer.src = Ipv6Addr::from_pair(rng(), rng());
    inner.outer.dst = Ipv6Addr::from_pair(rng(), rng());
    inner.payload.resize(rng() % 128);
    for (auto& b : inner.payload) b = static_cast<uint8_t>(rng());
    auto inner_bytes = serialize_packet(inner);

    std::vector<Ipv6Addr> cs;
    size_t n = 1 + rng() % 4;
    for (size_t k = 0; k < n; ++k) cs.push_back(Ipv6Addr::from_pair(rng(), rng()));

    Packet outer = h_encap_red(inner_bytes, cs, Ipv6Addr::parse("fcbb:bbbb:0100::"), 64);
    if (outer.srh) outer.srh->segments_left = 0;  // as it arrives at the egress
    // through the wire and back
    Packet arrived = parse_packet(serialize_packet(outer));
    auto d = std::get<DeliverOutcome>(end_dt6_behavior(arrived, dt6));
    CHECK(d.inner == inner_bytes);
    CHECK(parse_packet(d.inner) == inner);
  }
}

TEST_CASE("End.X, End.T and End.DX6 compose End with their disposition") {
  BehaviorParams params;
  params.adjacency = Adjacency{Ipv6Addr::parse("fcbb:bbbb:0700::"), "a-b"};
  params.table = 100;

  Packet p = at_v4();
  auto x = std::get<CrossConnectOutcome>(end_x_behavior(p, params));
  CHECK(x.packet.srh->segments_left == 0);
  CHECK(x.packet.outer.dst.str() == "fcbb:bbbb:0300:f00d::");
  CHECK(x.adjacency.link == "a-b");

  p = at_v4();
  auto t = std::get<ContinueOutcome>(end_t_behavior(p, params));
  CHECK(t.table == 100);
  CHECK(t.packet.outer.dst.str() == "fcbb:bbbb:0300:f00d::");

  // End.DX6 requires segments-left zero on arrival
  p = at_v4();
  CHECK(std::get<DropOutcome>(end_dx6_behavior(p, params)).reason == reason::kDx6NotLast);
  p = at_v4();
  p.srh->segments_left = 0;
  auto dx = std::get<CrossConnectOutcome>(end_dx6_behavior(p, params));
  CHECK(dx.packet == inner_packet());
  CHECK(dx.adjacency.link == "a-b");

  p = at_v4();
  p.srh->segments_left = 0;
  CHECK(std::get<DropOutcome>(end_dx6_behavior(p, BehaviorParams{})).reason ==
        reason::kMissingAdjacency);
}

TEST_CASE("exactly one of shift or segments-left consumption per invocation") {
  std::mt19937_64 rng(47);
  UsidScheme s = demo_scheme();
  BehaviorParams params = un_params();
  for (int i = 0; i < 2000; ++i) {
    Packet p = at_v4();
    // randomize the micro-program state
    uint64_t tail = rng();
    p.outer.dst = Ipv6Addr::from_pair(0xfcbbbbbb00000000ull | (rng() & 0xffffffff),
                                      i % 2 ? tail : 0);
    p.srh->segments_left = static_cast<uint8_t>(rng() % 2);
    Ipv6Addr da_before = p.outer.dst;
    int sl_before = p.srh->segments_left;

    BehaviorOutcome o = un_behavior(p, params);
    if (auto* c = std::get_if<ContinueOutcome>(&o)) {
      bool shifted = c->packet.outer.dst == usid_shift(da_before, s) &&
                     c->packet.srh->segments_left == sl_before;
      bool advanced = c->packet.srh->segments_left == sl_before - 1 &&
                      next_usid(da_before, s) == 0;
      CHECK(shifted != advanced);
      CHECK(c->packet.outer.hop_limit == at_v4().outer.hop_limit - 1);
      CHECK(in_block(c->packet.outer.dst, s));  // both branches stay in-block here
    } else {
      CHECK(std::get<DropOutcome>(o).reason == reason::kMicroProgramExhausted);
      CHECK(next_usid(da_before, s) == 0);
      CHECK(sl_before == 0);
    }
  }
}
