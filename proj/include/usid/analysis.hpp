#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "usid/error.hpp"
#include "usid/scheme.hpp"

namespace usid {

// Exact rational for the savings pipeline. No floating point anywhere;
// rounding happens once, at rendering.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  static Rational of(int64_t n, int64_t d) {
    if (d == 0) fail("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Rational{n, d};
  }

  bool operator==(const Rational&) const = default;
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }
};

// Fixed-point rendering with `digits` fractional digits, round half up.
inline std::string render_fixed(const Rational& r, int digits = 4) {
  int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  bool neg = r.num < 0;
  int64_t num = neg ? -r.num : r.num;
  int64_t scaled = (num * scale * 2 + r.den) / (2 * r.den);
  std::string sign = neg && scaled != 0 ? "-" : "";
  if (digits == 0) return sign + std::to_string(scaled);
  std::string frac = std::to_string(scaled % scale);
  if (frac.size() < static_cast<size_t>(digits))
    frac.insert(0, static_cast<size_t>(digits) - frac.size(), '0');
  return sign + std::to_string(scaled / scale) + "." + frac;
}

// Reduced SRv6 encapsulation size: 40 bytes of outer IPv6 header, plus an
// SRH carrying all but the first SID when the list has more than one.
inline int e_srv6_reduced(int sl) {
  if (sl < 1) fail("segment list must not be empty");
  if (sl == 1) return 40;
  return 40 + 8 + (sl - 1) * 16;
}

// uSID encapsulation size: pack the uSIDs into containers, then price the
// container list as a reduced SRv6 encapsulation.
inline int e_usid(int n_usids, const UsidScheme& scheme) {
  return e_srv6_reduced(usid_list_length(n_usids, scheme));
}

// SRm6 Compact Routing Header sizes. The CRH must end on a 64-bit boundary;
// the fixed constants are taken verbatim from the published formulas.
inline int e_crh16(int sl) {
  if (sl < 1) fail("segment list must not be empty");
  if (sl == 1) return 40 + 8;
  return 40 + (4 + sl * 2 + 7) / 8 * 8 + 8;
}

inline int e_crh32(int sl) {
  if (sl < 1) fail("segment list must not be empty");
  if (sl == 1) return 40 + 8;
  return 40 + (4 + sl * 4 + 7) / 8 * 8 + 8;
}

// Encapsulation size saving: ES = 1 - compressed / plain.
inline Rational saving(int e_compressed, int e_plain) {
  if (e_plain <= 0) fail("plain encapsulation size must be positive");
  return Rational::of(e_plain - e_compressed, e_plain);
}

// VPN-with-underlay-optimization scenario: waypoints in three domains plus
// one VPN SID at the egress.
struct Scenario {
  int waypoints_metro_l = 1;
  int waypoints_core = 1;
  int waypoints_metro_r = 1;
  bool vpn_sid = true;

  int total_sids() const {
    return waypoints_metro_l + waypoints_core + waypoints_metro_r + (vpn_sid ? 1 : 0);
  }
};

struct EncapReport {
  int waypoints_per_domain = 0;
  int total_sids = 0;
  int plain_srv6 = 0;
  int usid = 0;
  int crh16 = 0;
  int crh32 = 0;
  Rational saving_usid;
  Rational saving_crh16;
  Rational saving_crh32;
};

inline EncapReport report_for(const Scenario& sc, const UsidScheme& scheme) {
  int sl = sc.total_sids();
  EncapReport r;
  r.total_sids = sl;
  r.plain_srv6 = e_srv6_reduced(sl);
  r.usid = e_usid(sl, scheme);
  r.crh16 = e_crh16(sl);
  r.crh32 = e_crh32(sl);
  r.saving_usid = saving(r.usid, r.plain_srv6);
  r.saving_crh16 = saving(r.crh16, r.plain_srv6);
  r.saving_crh32 = saving(r.crh32, r.plain_srv6);
  return r;
}

// One row per waypoint count t, with t waypoints in each of the three
// domains plus the VPN SID.
inline std::vector<EncapReport> sweep_scenarios(int max_waypoints, const UsidScheme& scheme) {
  if (max_waypoints < 1) fail("sweep needs at least one waypoint per domain");
  std::vector<EncapReport> out;
  out.reserve(static_cast<size_t>(max_waypoints));
  for (int t = 1; t <= max_waypoints; ++t) {
    EncapReport r = report_for(Scenario{t, t, t, true}, scheme);
    r.waypoints_per_domain = t;
    out.push_back(r);
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "waypoints_per_domain,total_sids,e_plain,e_usid,e_crh16,e_crh32,es_usid,es_crh16,es_crh32";

inline std::string render_csv(std::span<const EncapReport> reports) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : reports) {
    out += std::to_string(r.waypoints_per_domain) + ',' + std::to_string(r.total_sids) + ',' +
           std::to_string(r.plain_srv6) + ',' + std::to_string(r.usid) + ',' +
           std::to_string(r.crh16) + ',' + std::to_string(r.crh32) + ',' +
           render_fixed(r.saving_usid) + ',' + render_fixed(r.saving_crh16) + ',' +
           render_fixed(r.saving_crh32) + '\n';
  }
  return out;
}

}  // namespace usid
