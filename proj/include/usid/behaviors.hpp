#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "usid/fib.hpp"
#include "usid/packet.hpp"
#include "usid/scheme.hpp"

namespace usid {

// Drop reasons are part of the trace contract; keep them single tokens.
namespace reason {
inline constexpr const char* kNoRoute = "no-route";
inline constexpr const char* kHopLimitExhausted = "hop-limit-exhausted";
inline constexpr const char* kMissingSrh = "missing-srh";
inline constexpr const char* kNoSegmentsLeft = "no-segments-left";
inline constexpr const char* kMicroProgramExhausted = "micro-program-exhausted";
inline constexpr const char* kOutsideBlock = "da-outside-block";
inline constexpr const char* kMissingAdjacency = "missing-adjacency";
inline constexpr const char* kMissingTable = "missing-table";
inline constexpr const char* kInnerNotIpv6 = "inner-not-ipv6";
inline constexpr const char* kDx6NotLast = "dx6-not-last-segment";
inline constexpr const char* kLookupBound = "local-lookup-bound";
inline constexpr const char* kWrongHost = "wrong-host";
inline constexpr const char* kMissingScheme = "missing-scheme";
}  // namespace reason

// What a behavior did with the packet. Continue re-enters the local FIB
// lookup with the (updated) packet; CrossConnect bypasses routing and sends
// it over a configured adjacency; Deliver hands the decapsulated inner bytes
// to a named table.
struct ContinueOutcome {
  Packet packet;
  int table = kDefaultTable;
};
struct CrossConnectOutcome {
  Packet packet;
  Adjacency adjacency;
};
struct DeliverOutcome {
  std::vector<uint8_t> inner;
  int table = kDefaultTable;
};
struct DropOutcome {
  std::string reason;
};

using BehaviorOutcome =
    std::variant<ContinueOutcome, CrossConnectOutcome, DeliverOutcome, DropOutcome>;

inline bool is_drop(const BehaviorOutcome& o) {
  return std::holds_alternative<DropOutcome>(o);
}

// End: consume one segment. Decrement hop limit and segments-left, copy
// segment-list[segments-left] into the destination address, re-lookup.
inline BehaviorOutcome end_behavior(Packet p) {
  if (!p.srh) return DropOutcome{reason::kMissingSrh};
  if (p.srh->segments_left == 0) return DropOutcome{reason::kNoSegmentsLeft};
  if (p.outer.hop_limit == 0) return DropOutcome{reason::kHopLimitExhausted};
  p.outer.hop_limit -= 1;
  p.srh->segments_left -= 1;
  p.outer.dst = p.srh->segments[p.srh->segments_left];
  return ContinueOutcome{std::move(p), kDefaultTable};
}

// End.X: End, then cross-connect to the configured adjacency.
inline BehaviorOutcome end_x_behavior(Packet p, const BehaviorParams& params) {
  if (!params.adjacency) return DropOutcome{reason::kMissingAdjacency};
  BehaviorOutcome o = end_behavior(std::move(p));
  if (is_drop(o)) return o;
  return CrossConnectOutcome{std::move(std::get<ContinueOutcome>(o).packet), *params.adjacency};
}

// End.T: End, then lookup in a specific table.
inline BehaviorOutcome end_t_behavior(Packet p, const BehaviorParams& params) {
  if (!params.table) return DropOutcome{reason::kMissingTable};
  BehaviorOutcome o = end_behavior(std::move(p));
  if (is_drop(o)) return o;
  return ContinueOutcome{std::move(std::get<ContinueOutcome>(o).packet), *params.table};
}

// End.DT6: decapsulate and hand the inner IPv6 packet to a specific table.
inline BehaviorOutcome end_dt6_behavior(Packet p, const BehaviorParams& params) {
  if (!params.table) return DropOutcome{reason::kMissingTable};
  try {
    (void)parse_packet(p.payload);
  } catch (const Error&) {
    return DropOutcome{reason::kInnerNotIpv6};
  }
  return DeliverOutcome{std::move(p.payload), *params.table};
}

// End.DX6: decapsulate and cross-connect the inner packet. Must be the last
// segment: segments-left has to be zero on arrival.
inline BehaviorOutcome end_dx6_behavior(Packet p, const BehaviorParams& params) {
  if (!params.adjacency) return DropOutcome{reason::kMissingAdjacency};
  if (p.srh && p.srh->segments_left > 0) return DropOutcome{reason::kDx6NotLast};
  Packet inner;
  try {
    inner = parse_packet(p.payload);
  } catch (const Error&) {
    return DropOutcome{reason::kInnerNotIpv6};
  }
  return CrossConnectOutcome{std::move(inner), *params.adjacency};
}

// uN: shift-and-lookup while the container holds more uSIDs, End semantics
// once the next slot is the end-of-container marker.
inline BehaviorOutcome un_behavior(Packet p, const BehaviorParams& params) {
  if (!params.scheme) return DropOutcome{reason::kMissingScheme};
  const UsidScheme& s = *params.scheme;
  if (!in_block(p.outer.dst, s)) return DropOutcome{reason::kOutsideBlock};
  if (next_usid(p.outer.dst, s) != 0) {
    if (p.outer.hop_limit == 0) return DropOutcome{reason::kHopLimitExhausted};
    p.outer.hop_limit -= 1;
    p.outer.dst = usid_shift(p.outer.dst, s);
    return ContinueOutcome{std::move(p), kDefaultTable};
  }
  if (!p.srh || p.srh->segments_left == 0)
    return DropOutcome{reason::kMicroProgramExhausted};
  return end_behavior(std::move(p));
}

// uA: uN with a cross-connect disposition; End.X semantics when exhausted.
inline BehaviorOutcome ua_behavior(Packet p, const BehaviorParams& params) {
  if (!params.scheme) return DropOutcome{reason::kMissingScheme};
  if (!params.adjacency) return DropOutcome{reason::kMissingAdjacency};
  const UsidScheme& s = *params.scheme;
  if (!in_block(p.outer.dst, s)) return DropOutcome{reason::kOutsideBlock};
  if (next_usid(p.outer.dst, s) != 0) {
    if (p.outer.hop_limit == 0) return DropOutcome{reason::kHopLimitExhausted};
    p.outer.hop_limit -= 1;
    p.outer.dst = usid_shift(p.outer.dst, s);
    return CrossConnectOutcome{std::move(p), *params.adjacency};
  }
  if (!p.srh || p.srh->segments_left == 0)
    return DropOutcome{reason::kMicroProgramExhausted};
  return end_x_behavior(std::move(p), params);
}

// Reduced encapsulation: the first container rides in the outer destination
// address; the rest (if any) go into the SRH in reverse order with
// segments-left pointing at the next one. A single-container policy omits
// the SRH entirely.
inline Packet h_encap_red(std::span<const uint8_t> inner, std::span<const Ipv6Addr> containers,
                          const Ipv6Addr& src, uint8_t hop_limit = 64) {
  if (containers.empty()) fail("encapsulation needs at least one container");
  Packet p;
  p.outer.src = src;
  p.outer.dst = containers[0];
  p.outer.hop_limit = hop_limit;
  if (containers.size() == 1) {
    p.outer.next_header = kProtoIpv6;
  } else {
    p.outer.next_header = kProtoRouting;
    SegmentRoutingHeader srh;
    srh.next_header = kProtoIpv6;
    srh.segments.assign(containers.rbegin(), containers.rend() - 1);
    srh.segments_left = static_cast<uint8_t>(containers.size() - 1);
    p.srh = std::move(srh);
  }
  p.payload.assign(inner.begin(), inner.end());
  return p;
}

inline BehaviorOutcome apply_behavior(BehaviorKind kind, Packet p, const BehaviorParams& params) {
  switch (kind) {
    case BehaviorKind::End: return end_behavior(std::move(p));
    case BehaviorKind::EndX: return end_x_behavior(std::move(p), params);
    case BehaviorKind::EndT: return end_t_behavior(std::move(p), params);
    case BehaviorKind::EndDT6:
    case BehaviorKind::UDT: return end_dt6_behavior(std::move(p), params);
    case BehaviorKind::EndDX6:
    case BehaviorKind::UDX: return end_dx6_behavior(std::move(p), params);
    case BehaviorKind::UN: return un_behavior(std::move(p), params);
    case BehaviorKind::UA: return ua_behavior(std::move(p), params);
    case BehaviorKind::HEncapRed: {
      std::vector<uint8_t> inner = serialize_packet(p);
      Packet outer = h_encap_red(inner, params.containers, params.encap_src,
                                 params.encap_hop_limit);
      return ContinueOutcome{std::move(outer), kDefaultTable};
    }
  }
  return DropOutcome{"unknown-behavior"};
}

// Behaviors that account for the per-node hop-limit decrement themselves.
// Everything else leaves the decrement to plain forwarding.
inline bool consumes_hop_limit(BehaviorKind kind) {
  switch (kind) {
    case BehaviorKind::End:
    case BehaviorKind::EndX:
    case BehaviorKind::EndT:
    case BehaviorKind::UN:
    case BehaviorKind::UA: return true;
    default: return false;
  }
}

}  // namespace usid
