#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "usid/behaviors.hpp"
#include "usid/packet.hpp"
#include "usid/topology.hpp"

namespace usid {

enum class EventKind { Received, Behavior, Forwarded, Delivered, Dropped };

// One hop of a packet's life. `arg` carries the behavior name, outgoing
// interface or delivery host; `da` and `segments_left` reflect the packet
// after the event. Rendered lines are stable and golden-file diffable.
struct TraceEvent {
  int seq = 0;
  std::string node;
  EventKind kind = EventKind::Received;
  std::string arg;
  Ipv6Addr da;
  std::optional<int> segments_left;
  std::string reason;  // Dropped only; kept last on the line so it may contain spaces

  std::string line() const {
    std::string out = std::to_string(seq) + " " + node + " ";
    switch (kind) {
      case EventKind::Received: out += "received"; break;
      case EventKind::Behavior: out += "behavior:" + arg; break;
      case EventKind::Forwarded: out += "forwarded:" + arg; break;
      case EventKind::Delivered: out += "delivered:" + arg; break;
      case EventKind::Dropped: out += "dropped"; break;
    }
    out += " da=" + da.str();
    if (segments_left) out += " sl=" + std::to_string(*segments_left);
    if (kind == EventKind::Dropped) out += " reason=" + reason;
    return out;
  }
};

struct Trace {
  std::vector<TraceEvent> events;

  std::string render() const {
    std::string out;
    for (const auto& e : events) {
      out += e.line();
      out += '\n';
    }
    return out;
  }

  bool delivered() const {
    return !events.empty() && events.back().kind == EventKind::Delivered;
  }
  bool dropped() const {
    return !events.empty() && events.back().kind == EventKind::Dropped;
  }

  // Nodes that applied a behavior, in order; the encap events at the ingress
  // are excluded so the list matches the compiled node path.
  std::vector<std::string> behavior_nodes() const {
    std::vector<std::string> out;
    for (const auto& e : events)
      if (e.kind == EventKind::Behavior && e.arg != behavior_name(BehaviorKind::HEncapRed))
        out.push_back(e.node);
    return out;
  }
};

struct VisitResult {
  std::optional<std::string> next_node;  // empty: delivered or dropped
};

// One node visit: FIB lookups and behavior applications chain locally until
// the packet leaves on a link, is delivered, or is dropped. Hop limit is
// spent once per visit — by the behavior when it semantically owns the hop
// (End/uN/...), otherwise by plain forwarding.
inline VisitResult step(const Topology& topo, const std::string& node_name, Packet& pkt,
                        Trace& trace) {
  const Node& node = topo.node(node_name);

  auto emit = [&](EventKind kind, const std::string& arg, const std::string& why = "") {
    TraceEvent ev;
    ev.seq = static_cast<int>(trace.events.size());
    ev.node = node_name;
    ev.kind = kind;
    ev.arg = arg;
    ev.da = pkt.outer.dst;
    if (pkt.srh) ev.segments_left = pkt.srh->segments_left;
    ev.reason = why;
    trace.events.push_back(std::move(ev));
  };

  emit(EventKind::Received, "");

  bool hl_consumed = false;
  int table = topo.default_table;
  int lookups = 0;

  // Transmits the packet out `ifname`; names the peer node to visit next,
  // or terminates the walk (delivered to a host, or dropped).
  auto transmit = [&](const std::string& ifname) -> VisitResult {
    if (!hl_consumed) {
      if (pkt.outer.hop_limit == 0) {
        emit(EventKind::Dropped, "", reason::kHopLimitExhausted);
        return {};
      }
      pkt.outer.hop_limit -= 1;
      hl_consumed = true;
    }
    auto at = node.links.find(ifname);
    if (at == node.links.end()) {
      emit(EventKind::Dropped, "", "unknown-link");
      return {};
    }
    emit(EventKind::Forwarded, ifname);
    if (at->second.peer_kind == Attachment::Peer::Host) {
      const Host& h = topo.host(at->second.peer);
      if (pkt.outer.dst == h.addr) {
        emit(EventKind::Delivered, h.name);
        return {};
      }
      emit(EventKind::Dropped, "", reason::kWrongHost);
      return {};
    }
    return {at->second.peer};
  };

  while (true) {
    if (lookups > topo.max_local_lookups) {
      emit(EventKind::Dropped, "", reason::kLookupBound);
      return {};
    }
    ++lookups;

    const FibTable* t = node.fib.find_table(table);
    if (!t) {
      emit(EventKind::Dropped, "", reason::kMissingTable);
      return {};
    }
    const FibEntry* entry = t->lookup(pkt.outer.dst);
    if (!entry) {
      emit(EventKind::Dropped, "", reason::kNoRoute);
      return {};
    }

    if (const auto* fwd = std::get_if<ForwardAction>(&entry->action)) {
      return transmit(fwd->link);
    }
    if (std::get_if<LocalDeliverAction>(&entry->action)) {
      emit(EventKind::Delivered, node_name);
      return {};
    }

    const auto& act = std::get<BehaviorAction>(entry->action);
    BehaviorOutcome outcome = apply_behavior(act.kind, pkt, act.params);

    if (const auto* drop = std::get_if<DropOutcome>(&outcome)) {
      emit(EventKind::Dropped, "", drop->reason);
      return {};
    }
    if (auto* cont = std::get_if<ContinueOutcome>(&outcome)) {
      pkt = std::move(cont->packet);
      emit(EventKind::Behavior, std::string(behavior_name(act.kind)));
      table = cont->table;
      hl_consumed = consumes_hop_limit(act.kind);
      continue;
    }
    if (auto* xc = std::get_if<CrossConnectOutcome>(&outcome)) {
      pkt = std::move(xc->packet);
      emit(EventKind::Behavior, std::string(behavior_name(act.kind)));
      hl_consumed = consumes_hop_limit(act.kind);
      return transmit(xc->adjacency.link);
    }
    auto& del = std::get<DeliverOutcome>(outcome);
    try {
      pkt = parse_packet(del.inner);
    } catch (const Error&) {
      emit(EventKind::Dropped, "", reason::kInnerNotIpv6);
      return {};
    }
    emit(EventKind::Behavior, std::string(behavior_name(act.kind)));
    table = del.table;
    hl_consumed = false;  // the inner packet has its own hop budget
  }
}

// Forwards the packet hop by hop from the host's attachment node until it is
// delivered or dropped. Deterministic: identical topology and packet yield
// an identical trace.
inline Trace inject(const Topology& topo, const std::string& from_host, Packet pkt) {
  Trace trace;
  std::string at = topo.host(from_host).node;
  while (true) {
    VisitResult r = step(topo, at, pkt, trace);
    if (!r.next_node) return trace;
    at = *r.next_node;
  }
}

inline constexpr std::string_view kEchoPayload = "usid-echo-sample";

// Plain IPv6 packet as an end host would emit it.
inline Packet make_host_packet(const Host& src, const Host& dst,
                               std::string_view payload = kEchoPayload) {
  Packet p;
  p.outer.next_header = kProtoIcmpv6;
  p.outer.hop_limit = 64;
  p.outer.src = src.addr;
  p.outer.dst = dst.addr;
  p.payload.assign(payload.begin(), payload.end());
  return p;
}

}  // namespace usid
