#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "usid/address.hpp"
#include "usid/error.hpp"
#include "usid/fib.hpp"
#include "usid/scheme.hpp"

namespace usid {

struct Host {
  std::string name;
  std::string node;    // attachment node
  Ipv6Addr addr;
  std::string ifname;  // node-side interface of the attachment
};

struct Attachment {
  enum class Peer { Node, Host };
  Peer peer_kind = Peer::Node;
  std::string peer;
};

struct Node {
  std::string name;
  std::string kind = "linux";  // informational label; every kind runs the same engine
  std::optional<Prefix> locator;
  bool provision_un = true;
  std::map<std::string, Attachment> links;  // ifname -> far end
  Fib fib;
};

struct Link {
  std::string a, b;
  std::string a_if, b_if;
};

struct Topology {
  UsidScheme scheme = UsidScheme::defaults();
  int default_table = kDefaultTable;
  int max_local_lookups = 4;
  uint8_t encap_hop_limit = 64;
  std::map<std::string, Node> nodes;
  std::map<std::string, Host> hosts;
  std::vector<Link> links;

  Node& node(const std::string& name) {
    auto it = nodes.find(name);
    if (it == nodes.end()) fail("unknown node '" + name + "'");
    return it->second;
  }
  const Node& node(const std::string& name) const {
    auto it = nodes.find(name);
    if (it == nodes.end()) fail("unknown node '" + name + "'");
    return it->second;
  }
  const Host& host(const std::string& name) const {
    auto it = hosts.find(name);
    if (it == hosts.end()) fail("unknown host '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline bool identifier_ok(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '#') break;
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline uint64_t parse_usid_value(const std::string& text) {
  std::string t = text;
  if (t.rfind("0x", 0) == 0) t = t.substr(2);
  if (t.empty() || t.size() > 16) fail("bad uSID value '" + text + "'");
  uint64_t v = 0;
  for (char c : t) {
    int d = (c >= '0' && c <= '9')   ? c - '0'
            : (c >= 'a' && c <= 'f') ? c - 'a' + 10
            : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                     : -1;
    if (d < 0) fail("bad uSID value '" + text + "'");
    v = v << 4 | static_cast<uint64_t>(d);
  }
  return v;
}

inline std::optional<BehaviorKind> behavior_token(const std::string& tok) {
  if (tok == "un") return BehaviorKind::UN;
  if (tok == "ua") return BehaviorKind::UA;
  if (tok == "end") return BehaviorKind::End;
  if (tok == "end.x") return BehaviorKind::EndX;
  if (tok == "end.t") return BehaviorKind::EndT;
  if (tok == "end.dt6") return BehaviorKind::EndDT6;
  if (tok == "end.dx6") return BehaviorKind::EndDX6;
  if (tok == "udt") return BehaviorKind::UDT;
  if (tok == "udx") return BehaviorKind::UDX;
  return std::nullopt;
}

}  // namespace detail

// Installs one rule line into a node's FIB. Grammar:
//   route <table-id> <prefix> via <next-hop-addr> dev <link-name>
//   behavior <table-id> <prefix> <un|ua|end|end.x|end.t|end.dt6|end.dx6|udt|udx>
//            [table <id>] [nh <addr> dev <link>]
// '#' starts a comment; blank lines are ignored (caller skips empty token lists).
inline void install_rule_line(Topology& topo, const std::string& node_name,
                              const std::string& line) {
  using detail::tokenize;
  std::vector<std::string> tok = tokenize(line);
  if (tok.empty()) return;
  Node& node = topo.node(node_name);
  auto bad = [&](const std::string& why) {
    fail("rule '" + line + "' on node '" + node_name + "': " + why);
  };

  if (tok[0] == "route") {
    if (tok.size() != 7 || tok[3] != "via" || tok[5] != "dev") bad("expected: route <table> <prefix> via <addr> dev <link>");
    int table = std::stoi(tok[1]);
    Prefix prefix = Prefix::parse(tok[2]);
    Ipv6Addr nh = Ipv6Addr::parse(tok[4]);
    const std::string& link = tok[6];
    if (!node.links.count(link)) bad("no link '" + link + "' on this node");
    node.fib.insert(table, FibEntry{prefix, ForwardAction{nh, link}});
    return;
  }

  if (tok[0] == "behavior") {
    if (tok.size() < 4) bad("expected: behavior <table> <prefix> <kind> ...");
    int table = std::stoi(tok[1]);
    Prefix prefix = Prefix::parse(tok[2]);
    auto kind = detail::behavior_token(tok[3]);
    if (!kind) bad("unknown behavior '" + tok[3] + "'");
    BehaviorParams params;
    size_t i = 4;
    while (i < tok.size()) {
      if (tok[i] == "table" && i + 1 < tok.size()) {
        params.table = std::stoi(tok[i + 1]);
        i += 2;
      } else if (tok[i] == "nh" && i + 3 < tok.size() && tok[i + 2] == "dev") {
        Adjacency adj{Ipv6Addr::parse(tok[i + 1]), tok[i + 3]};
        if (!node.links.count(adj.link)) bad("no link '" + adj.link + "' on this node");
        params.adjacency = std::move(adj);
        i += 4;
      } else {
        bad("unexpected token '" + tok[i] + "'");
      }
    }
    switch (*kind) {
      case BehaviorKind::UN:
      case BehaviorKind::UA:
        params.scheme = topo.scheme;
        break;
      default:
        break;
    }
    bool needs_table = *kind == BehaviorKind::EndT || *kind == BehaviorKind::EndDT6 ||
                       *kind == BehaviorKind::UDT;
    bool needs_adj = *kind == BehaviorKind::EndX || *kind == BehaviorKind::EndDX6 ||
                     *kind == BehaviorKind::UA || *kind == BehaviorKind::UDX;
    if (needs_table && !params.table) bad("behavior requires 'table <id>'");
    if (needs_adj && !params.adjacency) bad("behavior requires 'nh <addr> dev <link>'");
    node.fib.insert(table, FibEntry{prefix, BehaviorAction{*kind, std::move(params)}});
    return;
  }

  bad("unknown rule keyword '" + tok[0] + "'");
}

// Shortest-path underlay routes toward every SR node's locator, computed by
// breadth-first search with lexicographic neighbor order. Explicit route
// lines win: a (table, prefix) pair that already exists is left alone.
inline void install_underlay_routes(Topology& topo) {
  // node -> sorted (peer, ifname) adjacency, node peers only
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> adj;
  for (const auto& [name, node] : topo.nodes)
    for (const auto& [ifname, at] : node.links)
      if (at.peer_kind == Attachment::Peer::Node)
        adj[name].push_back({at.peer, ifname});
  for (auto& [name, v] : adj) std::sort(v.begin(), v.end());

  for (const auto& [dst_name, dst_node] : topo.nodes) {
    if (!dst_node.locator) continue;
    std::map<std::string, std::pair<std::string, std::string>> via;  // node -> (parent, ifname)
    std::deque<std::string> queue{dst_name};
    std::set<std::string> seen{dst_name};
    while (!queue.empty()) {
      std::string cur = queue.front();
      queue.pop_front();
      for (const auto& [peer, ifname] : adj[cur]) {
        if (seen.count(peer)) continue;
        seen.insert(peer);
        // `peer` reaches dst through `cur`; record peer's own interface.
        for (const auto& [peer_if, peer_at] : topo.nodes.at(peer).links) {
          if (peer_at.peer_kind == Attachment::Peer::Node && peer_at.peer == cur) {
            via[peer] = {cur, peer_if};
            break;
          }
        }
        queue.push_back(peer);
      }
    }
    for (const auto& [name, hop] : via) {
      Node& n = topo.nodes.at(name);
      FibTable& t = n.fib.table(topo.default_table);
      if (t.find(*dst_node.locator)) continue;  // explicit entry wins
      t.insert(FibEntry{*dst_node.locator,
                        ForwardAction{dst_node.locator->addr(), hop.second}});
    }
  }
}

inline Topology load_topology(const nlohmann::json& doc, const std::string& origin = "config") {
  auto ctx_fail = [&](const std::string& msg) { fail(origin + ": " + msg); };
  if (!doc.is_object() || doc.empty()) ctx_fail("empty or non-object topology document");

  Topology topo;

  // scheme
  if (doc.contains("scheme")) {
    const auto& s = doc.at("scheme");
    UsidScheme scheme;
    scheme.block = Prefix::parse(s.value("block", "fcbb:bbbb::/32"));
    scheme.nf_bits = s.value("nf_bits", 16);
    scheme.arg_bits = s.value("arg_bits", 0);
    if (s.contains("terminator")) {
      if (s.at("terminator").is_number())
        scheme.terminator = s.at("terminator").get<uint64_t>();
      else
        scheme.terminator = detail::parse_usid_value(s.at("terminator").get<std::string>());
    }
    std::string enc = s.value("dt6_encoding", "terminator");
    if (enc == "terminator")
      scheme.dt6_encoding = Dt6Encoding::TerminatorUsid;
    else if (enc == "node-flag-bit")
      scheme.dt6_encoding = Dt6Encoding::NodeFlagBit;
    else
      ctx_fail("unknown dt6_encoding '" + enc + "'");
    scheme.validate();
    topo.scheme = scheme;
  }

  if (doc.contains("defaults")) {
    const auto& d = doc.at("defaults");
    topo.default_table = d.value("table", kDefaultTable);
    topo.max_local_lookups = d.value("max_local_lookups", 4);
    topo.encap_hop_limit = static_cast<uint8_t>(d.value("encap_hop_limit", 64));
  }

  // nodes
  std::set<Prefix> locators_seen;
  for (const auto& jn : doc.value("nodes", nlohmann::json::array())) {
    Node n;
    n.name = jn.at("name").get<std::string>();
    if (!detail::identifier_ok(n.name)) ctx_fail("bad node name '" + n.name + "'");
    if (topo.nodes.count(n.name)) ctx_fail("duplicate node '" + n.name + "'");
    n.kind = jn.value("kind", "linux");
    n.provision_un = jn.value("provision_un", true);
    if (jn.contains("locator")) {
      Prefix loc = Prefix::parse(jn.at("locator").get<std::string>());
      if (!locators_seen.insert(loc).second)
        ctx_fail("duplicate locator " + loc.str() + " on node '" + n.name + "'");
      n.locator = loc;
    }
    topo.nodes.emplace(n.name, std::move(n));
  }

  // links
  size_t link_idx = 0;
  for (const auto& jl : doc.value("links", nlohmann::json::array())) {
    ++link_idx;
    Link l;
    l.a = jl.at("a").get<std::string>();
    l.b = jl.at("b").get<std::string>();
    if (!topo.nodes.count(l.a))
      ctx_fail("link " + std::to_string(link_idx) + ": unknown node '" + l.a + "'");
    if (!topo.nodes.count(l.b))
      ctx_fail("link " + std::to_string(link_idx) + ": unknown node '" + l.b + "'");
    if (l.a == l.b) ctx_fail("link " + std::to_string(link_idx) + ": both ends on '" + l.a + "'");
    l.a_if = jl.value("a_if", l.a + "-" + l.b);
    l.b_if = jl.value("b_if", l.b + "-" + l.a);
    if (!detail::identifier_ok(l.a_if) || !detail::identifier_ok(l.b_if))
      ctx_fail("link " + std::to_string(link_idx) + ": bad interface name");
    Node& na = topo.nodes.at(l.a);
    Node& nb = topo.nodes.at(l.b);
    if (na.links.count(l.a_if) || nb.links.count(l.b_if))
      ctx_fail("link " + std::to_string(link_idx) + ": interface name already in use");
    na.links[l.a_if] = Attachment{Attachment::Peer::Node, l.b};
    nb.links[l.b_if] = Attachment{Attachment::Peer::Node, l.a};
    topo.links.push_back(std::move(l));
  }

  // hosts: attachment interface plus a /64 delivery route on the node
  std::set<Ipv6Addr> host_addrs;
  for (const auto& jh : doc.value("hosts", nlohmann::json::array())) {
    Host h;
    h.name = jh.at("name").get<std::string>();
    if (!detail::identifier_ok(h.name)) ctx_fail("bad host name '" + h.name + "'");
    if (topo.hosts.count(h.name) || topo.nodes.count(h.name))
      ctx_fail("duplicate name '" + h.name + "'");
    h.node = jh.at("node").get<std::string>();
    if (!topo.nodes.count(h.node))
      ctx_fail("host '" + h.name + "': unknown node '" + h.node + "'");
    h.addr = Ipv6Addr::parse(jh.at("address").get<std::string>());
    if (!host_addrs.insert(h.addr).second)
      ctx_fail("host '" + h.name + "': duplicate address " + h.addr.str());
    h.ifname = h.node + "-" + h.name;
    Node& n = topo.nodes.at(h.node);
    if (n.links.count(h.ifname)) ctx_fail("host '" + h.name + "': interface name already in use");
    n.links[h.ifname] = Attachment{Attachment::Peer::Host, h.name};
    try {
      n.fib.insert(topo.default_table,
                   FibEntry{Prefix::truncated(h.addr, 64), ForwardAction{h.addr, h.ifname}});
    } catch (const Error& e) {
      ctx_fail("host '" + h.name + "': " + e.what());
    }
    topo.hosts.emplace(h.name, std::move(h));
  }

  // uN provisioning: the /48-style shift entry plus the /64-style End entry
  for (auto& [name, n] : topo.nodes) {
    if (!n.locator || !n.provision_un) continue;
    if (active_usid(n.locator->addr(), topo.scheme) == 0)
      ctx_fail("node '" + name + "': locator has an all-zero uSID");
    provision_un_node(n.fib, topo.scheme, *n.locator, topo.default_table);
  }

  // explicit rule lines
  for (const auto& jr : doc.value("routes", nlohmann::json::array())) {
    std::string node_name = jr.at("node").get<std::string>();
    if (!topo.nodes.count(node_name)) ctx_fail("routes: unknown node '" + node_name + "'");
    size_t line_no = 0;
    for (const auto& jl : jr.at("lines")) {
      ++line_no;
      try {
        install_rule_line(topo, node_name, jl.get<std::string>());
      } catch (const Error& e) {
        ctx_fail("routes[" + node_name + "] line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  if (doc.value("auto_underlay_routes", false)) install_underlay_routes(topo);

  return topo;
}

inline Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open topology file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": " + e.what());
  }
  try {
    return load_topology(doc, path);
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": " + e.what());
  }
}

}  // namespace usid
