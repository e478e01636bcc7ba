#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "usid/address.hpp"
#include "usid/error.hpp"
#include "usid/scheme.hpp"

namespace usid {

inline constexpr int kDefaultTable = 254;

enum class BehaviorKind {
  End,
  EndX,
  EndT,
  EndDT6,
  EndDX6,
  UN,
  UA,
  UDT,
  UDX,
  HEncapRed,  // headend policy encapsulation installed by the controller
};

inline std::string_view behavior_name(BehaviorKind k) {
  switch (k) {
    case BehaviorKind::End: return "End";
    case BehaviorKind::EndX: return "End.X";
    case BehaviorKind::EndT: return "End.T";
    case BehaviorKind::EndDT6: return "End.DT6";
    case BehaviorKind::EndDX6: return "End.DX6";
    case BehaviorKind::UN: return "uN";
    case BehaviorKind::UA: return "uA";
    case BehaviorKind::UDT: return "uDT";
    case BehaviorKind::UDX: return "uDX";
    case BehaviorKind::HEncapRed: return "H.Encap.Red";
  }
  return "?";
}

// Micro SID behaviors and their plain SRv6 equivalents.
inline BehaviorKind plain_equivalent(BehaviorKind k) {
  switch (k) {
    case BehaviorKind::UN: return BehaviorKind::End;
    case BehaviorKind::UA: return BehaviorKind::EndX;
    case BehaviorKind::UDT: return BehaviorKind::EndDT6;
    case BehaviorKind::UDX: return BehaviorKind::EndDX6;
    default: return k;
  }
}

struct Adjacency {
  Ipv6Addr next_hop;
  std::string link;

  bool operator==(const Adjacency&) const = default;
};

struct BehaviorParams {
  std::optional<int> table;                // End.T / End.DT6 / uDT
  std::optional<Adjacency> adjacency;      // End.X / End.DX6 / uA / uDX
  std::optional<UsidScheme> scheme;        // uN / uA
  std::vector<Ipv6Addr> containers;        // H.Encap.Red
  Ipv6Addr encap_src;
  uint8_t encap_hop_limit = 64;

  bool operator==(const BehaviorParams&) const = default;
};

struct ForwardAction {
  Ipv6Addr next_hop;
  std::string link;

  bool operator==(const ForwardAction&) const = default;
};

struct LocalDeliverAction {
  bool operator==(const LocalDeliverAction&) const = default;
};

struct BehaviorAction {
  BehaviorKind kind;
  BehaviorParams params;

  bool operator==(const BehaviorAction&) const = default;
};

using FibAction = std::variant<ForwardAction, LocalDeliverAction, BehaviorAction>;

struct FibEntry {
  Prefix prefix;
  FibAction action;

  bool operator==(const FibEntry&) const = default;
};

// One routing table with longest-prefix-match lookup. Entries are bucketed
// by prefix length; a lookup scans lengths from most to least specific and
// the one-entry-per-prefix rule makes the winner unique.
class FibTable {
 public:
  void insert(FibEntry entry, bool replace = false) {
    auto& bucket = by_len_[entry.prefix.length()];
    auto [it, inserted] = bucket.try_emplace(entry.prefix.addr(), entry);
    if (!inserted) {
      if (!replace)
        fail("duplicate entry for prefix " + entry.prefix.str());
      it->second = std::move(entry);
    }
  }

  bool remove(const Prefix& p) {
    auto it = by_len_.find(p.length());
    if (it == by_len_.end()) return false;
    bool erased = it->second.erase(p.addr()) > 0;
    if (it->second.empty()) by_len_.erase(it);
    return erased;
  }

  const FibEntry* lookup(const Ipv6Addr& addr) const {
    for (auto it = by_len_.rbegin(); it != by_len_.rend(); ++it) {
      auto hit = it->second.find(addr.masked(it->first));
      if (hit != it->second.end()) return &hit->second;
    }
    return nullptr;
  }

  // Exact-prefix fetch, no longest-match semantics.
  const FibEntry* find(const Prefix& p) const {
    auto it = by_len_.find(p.length());
    if (it == by_len_.end()) return nullptr;
    auto hit = it->second.find(p.addr());
    return hit == it->second.end() ? nullptr : &hit->second;
  }

  size_t size() const {
    size_t n = 0;
    for (const auto& [len, bucket] : by_len_) n += bucket.size();
    return n;
  }

  std::vector<const FibEntry*> entries() const {
    std::vector<const FibEntry*> out;
    for (const auto& [len, bucket] : by_len_)
      for (const auto& [addr, e] : bucket) out.push_back(&e);
    return out;
  }

 private:
  std::map<int, std::map<Ipv6Addr, FibEntry>> by_len_;
};

// The set of named tables on one node.
class Fib {
 public:
  FibTable& table(int id) { return tables_[id]; }

  const FibTable* find_table(int id) const {
    auto it = tables_.find(id);
    return it == tables_.end() ? nullptr : &it->second;
  }

  void insert(int table_id, FibEntry entry, bool replace = false) {
    tables_[table_id].insert(std::move(entry), replace);
  }

  const FibEntry* lookup(int table_id, const Ipv6Addr& addr) const {
    const FibTable* t = find_table(table_id);
    if (!t) fail("unknown table " + std::to_string(table_id));
    return t->lookup(addr);
  }

  bool has_table(int id) const { return tables_.count(id) > 0; }

  size_t total_entries() const {
    size_t n = 0;
    for (const auto& [id, t] : tables_) n += t.size();
    return n;
  }

 private:
  std::map<int, FibTable> tables_;
};

// uN provisioning installs the two entries of the dual-entry design: the
// /(B+NF) prefix triggers shift-and-lookup and the /(B+2*NF) prefix triggers
// SRH processing (End) once the container is exhausted.
inline void provision_un_node(Fib& fib, const UsidScheme& scheme, const Prefix& locator,
                              int table_id = kDefaultTable) {
  scheme.validate();
  if (scheme.dt6_encoding != Dt6Encoding::TerminatorUsid)
    fail("dt6 encoding 'node-flag-bit' is not supported: its bit layout is unspecified");
  if (locator.length() != scheme.block_bits() + scheme.nf_bits)
    fail("locator " + locator.str() + " inconsistent with scheme (want /" +
         std::to_string(scheme.block_bits() + scheme.nf_bits) + ")");
  if (!scheme.block.contains(locator.addr()))
    fail("locator " + locator.str() + " outside uSID block " + scheme.block.str());
  int end_len = scheme.block_bits() + 2 * scheme.nf_bits;
  if (end_len > 128) fail("scheme leaves no room for the SRH-processing entry");

  BehaviorParams un_params;
  un_params.scheme = scheme;
  fib.insert(table_id,
             FibEntry{locator, BehaviorAction{BehaviorKind::UN, std::move(un_params)}},
             /*replace=*/true);
  fib.insert(table_id,
             FibEntry{Prefix(locator.addr(), end_len),
                      BehaviorAction{BehaviorKind::End, BehaviorParams{}}},
             /*replace=*/true);
}

}  // namespace usid
