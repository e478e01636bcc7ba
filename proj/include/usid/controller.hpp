#pragma once

#include <map>
#include <string>
#include <vector>

#include "usid/fib.hpp"
#include "usid/scheme.hpp"
#include "usid/topology.hpp"

namespace usid {

// An installed steering rule: traffic from src host to dst host is
// encapsulated at the ingress with the compiled container list.
struct Policy {
  int id = 0;
  int pair_id = 0;  // shared by the two halves of a symmetric policy
  std::string src_host;
  std::string dst_host;
  Prefix src_prefix;  // /64 of the source host
  Prefix dst_prefix;  // /64 the encap rule matches on
  std::vector<std::string> node_path;
  std::vector<Ipv6Addr> containers;
  std::string ingress;
  std::string egress;
  bool symmetric = false;
};

inline std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out;
}

inline std::string policy_header(const Policy& p) {
  return "policy id=" + std::to_string(p.id) + " pair=" + std::to_string(p.pair_id) +
         " src=" + p.src_host + " dst=" + p.dst_host + " ingress=" + p.ingress +
         " egress=" + p.egress + " symmetric=" + (p.symmetric ? "yes" : "no") +
         " path=" + join_names(p.node_path);
}

// Header line plus one indented line per container.
inline std::string policy_block(const Policy& p) {
  std::string out = policy_header(p) + "\n";
  for (const auto& c : p.containers) out += "  " + c.str() + "\n";
  return out;
}

// Control plane: compiles host-to-host paths into uSID encap rules and
// manages them in the ingress FIBs. Single writer; reads may not overlap
// mutations.
class Controller {
 public:
  explicit Controller(Topology& topo) : topo_(topo) {}

  // Installs a policy steering src->dst through `path` (SR node names; the
  // last one must serve the destination host). With `symmetric`, the reverse
  // policy over the reversed path is installed as well. Returns the stored
  // policies, forward first.
  std::vector<const Policy*> create_policy(const std::string& src_host,
                                           const std::string& dst_host,
                                           std::vector<std::string> path, bool symmetric) {
    const Host& src = topo_.host(src_host);
    const Host& dst = topo_.host(dst_host);
    if (src.node == dst.node)
      fail("hosts " + src_host + " and " + dst_host + " share node '" + src.node +
           "'; there is no path to steer");
    // Operators often list the ingress itself as the first hop; it encapsulates
    // rather than matching its own uSID, so strip it if present.
    if (!path.empty() && path.front() == src.node) path.erase(path.begin());
    if (path.empty()) fail("node path must name at least one node past the ingress");

    for (const auto& [key, p] : policies_) {
      if (p.src_host == src_host && p.dst_host == dst_host)
        fail("policy for " + src_host + " -> " + dst_host + " already exists (id " +
             std::to_string(p.id) + ")");
      if (symmetric && p.src_host == dst_host && p.dst_host == src_host)
        fail("policy for " + dst_host + " -> " + src_host + " already exists (id " +
             std::to_string(p.id) + ")");
    }

    Policy fwd = build(src, dst, path, symmetric);
    if (!symmetric) {
      fwd.id = fwd.pair_id = next_id_;
      install(fwd);
      next_id_ += 1;
      auto [it, ok] = policies_.emplace(fwd.id, std::move(fwd));
      return {&it->second};
    }

    std::vector<std::string> reverse_path;
    for (size_t i = path.size() - 1; i-- > 0;) reverse_path.push_back(path[i]);
    reverse_path.push_back(src.node);
    Policy rev = build(dst, src, reverse_path, symmetric);

    fwd.id = next_id_;
    rev.id = next_id_ + 1;
    fwd.pair_id = rev.pair_id = fwd.id;
    install(fwd);
    try {
      install(rev);
    } catch (...) {
      uninstall(fwd);
      throw;
    }
    next_id_ += 2;
    auto [fit, fok] = policies_.emplace(fwd.id, std::move(fwd));
    auto [rit, rok] = policies_.emplace(rev.id, std::move(rev));
    return {&fit->second, &rit->second};
  }

  std::vector<const Policy*> list_policies() const {
    std::vector<const Policy*> out;
    for (const auto& [id, p] : policies_) out.push_back(&p);
    return out;
  }

  const Policy& dump_policy(const std::string& src_host, const std::string& dst_host) const {
    for (const auto& [id, p] : policies_)
      if (p.src_host == src_host && p.dst_host == dst_host) return p;
    fail("no policy for " + src_host + " -> " + dst_host);
  }

  // Removes the policy (and its symmetric twin, if any); returns removed ids.
  std::vector<int> remove_policy(int id) {
    auto it = policies_.find(id);
    if (it == policies_.end()) fail("no policy with id " + std::to_string(id));
    return remove_pair(it->second.pair_id);
  }

  std::vector<int> remove_policy(const std::string& src_host, const std::string& dst_host) {
    for (const auto& [id, p] : policies_)
      if (p.src_host == src_host && p.dst_host == dst_host) return remove_pair(p.pair_id);
    fail("no policy for " + src_host + " -> " + dst_host);
  }

 private:
  Policy build(const Host& src, const Host& dst, const std::vector<std::string>& path,
               bool symmetric) const {
    const UsidScheme& scheme = topo_.scheme;
    std::vector<uint64_t> usids;
    usids.reserve(path.size());
    for (const auto& name : path) {
      const Node& n = topo_.node(name);
      if (!n.locator) fail("node '" + name + "' has no uSID locator");
      if (n.locator->length() != scheme.block_bits() + scheme.nf_bits)
        fail("node '" + name + "' locator length unsuitable for the scheme");
      usids.push_back(active_usid(n.locator->addr(), scheme));
    }
    if (dst.node != path.back())
      fail("path ends at '" + path.back() + "' but host " + dst.name + " is served by '" +
           dst.node + "'");
    const Node& ingress = topo_.node(src.node);
    if (!ingress.locator) fail("ingress node '" + src.node + "' has no locator for the encap source");

    Policy p;
    p.src_host = src.name;
    p.dst_host = dst.name;
    p.src_prefix = Prefix::truncated(src.addr, 64);
    p.dst_prefix = Prefix::truncated(dst.addr, 64);
    p.node_path = path;
    p.containers = compile_path(usids, /*want_dt6=*/true, scheme);
    p.ingress = src.node;
    p.egress = path.back();
    p.symmetric = symmetric;
    return p;
  }

  void install(const Policy& p) {
    BehaviorParams params;
    params.containers = p.containers;
    params.encap_src = topo_.node(p.ingress).locator->addr();
    params.encap_hop_limit = topo_.encap_hop_limit;
    try {
      topo_.node(p.ingress).fib.insert(
          topo_.default_table,
          FibEntry{p.dst_prefix, BehaviorAction{BehaviorKind::HEncapRed, std::move(params)}});
    } catch (const Error& e) {
      fail("cannot install encap rule at '" + p.ingress + "': " + e.what());
    }
  }

  void uninstall(const Policy& p) {
    topo_.node(p.ingress).fib.table(topo_.default_table).remove(p.dst_prefix);
  }

  std::vector<int> remove_pair(int pair_id) {
    std::vector<int> removed;
    for (auto it = policies_.begin(); it != policies_.end();) {
      if (it->second.pair_id == pair_id) {
        uninstall(it->second);
        removed.push_back(it->first);
        it = policies_.erase(it);
      } else {
        ++it;
      }
    }
    return removed;
  }

  Topology& topo_;
  std::map<int, Policy> policies_;
  int next_id_ = 1;
};

}  // namespace usid
