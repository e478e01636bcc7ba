#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usid/address.hpp"
#include "usid/error.hpp"

namespace usid {

// How the egress decapsulation behavior is requested inside a container.
// `TerminatorUsid` is the scheme exercised end to end: a reserved uSID value
// (0xf00d by default) occupies the slot after the egress node's uSID.
// `NodeFlagBit` mirrors the alternative /44 numbering in which a bit of the
// node uSID discriminates the behavior; its exact bit layout is not pinned
// down anywhere authoritative, so it is accepted as configuration but
// rejected at provisioning time rather than guessed at.
enum class Dt6Encoding { TerminatorUsid, NodeFlagBit };

// Micro SID scheme parameters: the shared locator block, the per-uSID width,
// and the terminator convention. Widths are byte-aligned.
struct UsidScheme {
  Prefix block;                // e.g. fcbb:bbbb::/32
  int nf_bits = 16;            // width of one uSID
  int arg_bits = 0;            // reserved; carried but never consumed
  uint64_t terminator = 0xf00d;
  Dt6Encoding dt6_encoding = Dt6Encoding::TerminatorUsid;

  int block_bits() const { return block.length(); }

  void validate() const {
    if (block_bits() % 8 != 0 || nf_bits % 8 != 0)
      fail("uSID block and uSID lengths must be divisible by 8");
    if (nf_bits < 8 || nf_bits > 64) fail("uSID length out of range");
    if (block_bits() + nf_bits > 128)
      fail("uSID block too long: no room for a single uSID");
    if (arg_bits < 0 || block_bits() + nf_bits + arg_bits > 128)
      fail("argument length inconsistent with block and uSID lengths");
    if (terminator == 0) fail("terminator uSID may not be the end-of-container value");
    if (nf_bits < 64 && terminator >> nf_bits != 0)
      fail("terminator does not fit in one uSID");
  }

  static UsidScheme defaults() {
    UsidScheme s;
    s.block = Prefix::parse("fcbb:bbbb::/32");
    s.validate();
    return s;
  }

  bool operator==(const UsidScheme&) const = default;
};

// Ordered micro-instructions; values are NF-bit, non-zero.
using MicroProgram = std::vector<uint64_t>;

namespace detail {

// 128-bit big-endian shift/mask helper over (hi, lo) words.
struct U128 {
  uint64_t hi = 0, lo = 0;

  static U128 of(const Ipv6Addr& a) { return {a.hi(), a.lo()}; }
  Ipv6Addr addr() const { return Ipv6Addr::from_pair(hi, lo); }

  U128 shl(int n) const {
    if (n <= 0) return *this;
    if (n >= 128) return {};
    if (n >= 64) return {lo << (n - 64), 0};
    return {hi << n | lo >> (64 - n), lo << n};
  }

  static U128 high_mask(int bits) {
    if (bits <= 0) return {};
    if (bits >= 128) return {~0ull, ~0ull};
    if (bits <= 64) return {bits == 64 ? ~0ull : ~0ull << (64 - bits), 0};
    return {~0ull, ~0ull << (128 - bits)};
  }

  U128 operator&(const U128& o) const { return {hi & o.hi, lo & o.lo}; }
  U128 operator|(const U128& o) const { return {hi | o.hi, lo | o.lo}; }
  U128 operator~() const { return {~hi, ~lo}; }
};

inline uint64_t read_bits(const Ipv6Addr& a, int offset, int width) {
  // Bits [offset, offset+width) of the address, zero-extended past bit 127.
  if (offset >= 128 || width <= 0) return 0;
  U128 shifted = U128::of(a).shl(offset);
  int w = width > 64 ? 64 : width;
  return shifted.hi >> (64 - w);
}

}  // namespace detail

inline bool in_block(const Ipv6Addr& da, const UsidScheme& s) {
  return s.block.contains(da);
}

// Number of uSID slots one 128-bit container offers: floor((128 - B) / NF).
inline int container_capacity(const UsidScheme& s) {
  return (128 - s.block_bits()) / s.nf_bits;
}

// Containers needed for n uSIDs: ceil(n / capacity). This is the length
// formula used by the overhead analysis; the policy compiler additionally
// budgets a slot for the terminator (see compile_path).
inline int usid_list_length(int n_usids, const UsidScheme& s) {
  if (n_usids < 1) fail("uSID list must not be empty");
  int c = container_capacity(s);
  if (c < 1) fail("scheme leaves no room for uSIDs");
  return (n_usids + c - 1) / c;
}

// uSID occupying the active slot, bits [B, B+NF).
inline uint64_t active_usid(const Ipv6Addr& da, const UsidScheme& s) {
  if (!in_block(da, s)) fail("address " + da.str() + " outside uSID block " + s.block.str());
  return detail::read_bits(da, s.block_bits(), s.nf_bits);
}

// uSID that becomes active after one shift, bits [B+NF, B+2*NF).
// Zero means end of container.
inline uint64_t next_usid(const Ipv6Addr& da, const UsidScheme& s) {
  if (!in_block(da, s)) fail("address " + da.str() + " outside uSID block " + s.block.str());
  if (s.block_bits() + 2 * s.nf_bits > 128) return 0;  // no room for a next slot
  return detail::read_bits(da, s.block_bits() + s.nf_bits, s.nf_bits);
}

// Pop the active uSID: keep the block bits, move everything after them left
// by NF bits and zero-fill the tail. Generalizes the mask-and-shift
//   (da & BLOCK_MASK) | ((da << NF) & ~BLOCK_MASK)
// to any byte-aligned (B, NF).
inline Ipv6Addr usid_shift(const Ipv6Addr& da, const UsidScheme& s) {
  using detail::U128;
  if (!in_block(da, s)) fail("address " + da.str() + " outside uSID block " + s.block.str());
  U128 v = U128::of(da);
  U128 block_mask = U128::high_mask(s.block_bits());
  U128 shifted = v.shl(s.nf_bits) & ~block_mask;
  return ((v & block_mask) | shifted).addr();
}

// Pack uSIDs into one container: block bits, the uSIDs in order, zero fill.
inline Ipv6Addr build_container(std::span<const uint64_t> usids, const UsidScheme& s) {
  using detail::U128;
  if (usids.empty()) fail("cannot build a container from an empty micro-program");
  if (static_cast<int>(usids.size()) > container_capacity(s))
    fail("micro-program longer than container capacity");
  U128 v = U128::of(s.block.addr());
  int offset = s.block_bits();
  for (uint64_t u : usids) {
    if (u == 0) fail("micro-program may not contain the end-of-container value");
    if (s.nf_bits < 64 && u >> s.nf_bits != 0) fail("uSID value does not fit in " + std::to_string(s.nf_bits) + " bits");
    U128 slot = U128{u << (64 - s.nf_bits), 0};  // value left-aligned in hi
    // Move the left-aligned value down to its slot offset.
    U128 placed{};
    if (offset < 64) {
      placed.hi = slot.hi >> offset;
      placed.lo = offset == 0 ? 0 : slot.hi << (64 - offset);
    } else {
      placed.lo = slot.hi >> (offset - 64);
    }
    v = v | placed;
    offset += s.nf_bits;
  }
  return v.addr();
}

// Compile a node uSID sequence into containers, greedily packing up to
// `capacity` uSIDs per container. With `want_dt6`, the terminator uSID is
// appended and must share its container with the egress uSID; a container
// holding the terminator alone is never produced — when the node uSIDs fill
// the last container exactly, the egress uSID moves to the next one (the
// 5-plus-2 split for six nodes at capacity six).
inline std::vector<Ipv6Addr> compile_path(std::span<const uint64_t> node_usids,
                                          bool want_dt6, const UsidScheme& s) {
  if (node_usids.empty()) fail("cannot compile an empty node list");
  if (want_dt6 && s.dt6_encoding != Dt6Encoding::TerminatorUsid)
    fail("dt6 encoding 'node-flag-bit' is not supported: its bit layout is unspecified");
  int cap = container_capacity(s);
  std::vector<uint64_t> seq(node_usids.begin(), node_usids.end());
  for (uint64_t u : seq) {
    if (u == 0) fail("node uSID may not be the end-of-container value");
    if (want_dt6 && u == s.terminator) fail("node uSID collides with the terminator uSID");
  }
  size_t n = seq.size();
  if (want_dt6) seq.push_back(s.terminator);

  std::vector<Ipv6Addr> out;
  size_t i = 0;
  while (i < seq.size()) {
    size_t take = std::min<size_t>(static_cast<size_t>(cap), seq.size() - i);
    if (want_dt6 && n % static_cast<size_t>(cap) == 0 && i + take == seq.size() - 1 &&
        take == static_cast<size_t>(cap)) {
      // Last full chunk would strand the terminator; leave the egress uSID
      // for the final container.
      take -= 1;
    }
    out.push_back(build_container(std::span(seq).subspan(i, take), s));
    i += take;
  }
  return out;
}

}  // namespace usid
