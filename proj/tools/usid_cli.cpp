// usid: command-line front end for the Micro SID dataplane toolkit.
//
// Subcommands:
//   analyze   emit the encapsulation-size comparison sweep as CSV
//   simulate  load a topology, run a policy script, inject packets, print traces
//   policy    one-shot policy operations against a freshly loaded topology
//
// Exit codes: 0 success, 1 usage error, 2 configuration/validation error,
// 3 a packet was dropped and --strict was set.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "usid/usid.hpp"

namespace {

struct ScriptError : usid::Error {
  using usid::Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// One controller command, shared by the policy subcommand and script lines:
//   add --src H --dst H --path n1,n2,... [--symmetric]
//   del --id N | del --src H --dst H
//   list
//   dump --src H --dst H
void run_policy_command(usid::Controller& ctl, const std::vector<std::string>& tok,
                        std::ostream& out) {
  if (tok.empty()) return;
  const std::string& cmd = tok[0];

  std::optional<std::string> src, dst, path;
  std::optional<int> id;
  bool symmetric = false;
  for (size_t i = 1; i < tok.size();) {
    auto need_value = [&](const char* flag) -> const std::string& {
      if (i + 1 >= tok.size()) usid::fail(std::string(flag) + " needs a value");
      return tok[i + 1];
    };
    if (tok[i] == "--src") src = need_value("--src"), i += 2;
    else if (tok[i] == "--dst") dst = need_value("--dst"), i += 2;
    else if (tok[i] == "--path") path = need_value("--path"), i += 2;
    else if (tok[i] == "--id") id = std::stoi(need_value("--id")), i += 2;
    else if (tok[i] == "--symmetric") symmetric = true, i += 1;
    else usid::fail("unexpected token '" + tok[i] + "'");
  }

  if (cmd == "add") {
    if (!src || !dst || !path) usid::fail("add needs --src, --dst and --path");
    auto policies = ctl.create_policy(*src, *dst, split(*path, ','), symmetric);
    for (const auto* p : policies) out << usid::policy_block(*p);
    return;
  }
  if (cmd == "del") {
    std::vector<int> removed;
    if (id)
      removed = ctl.remove_policy(*id);
    else if (src && dst)
      removed = ctl.remove_policy(*src, *dst);
    else
      usid::fail("del needs --id or both --src and --dst");
    for (int r : removed) out << "removed policy id=" << r << "\n";
    return;
  }
  if (cmd == "list") {
    for (const auto* p : ctl.list_policies()) out << usid::policy_header(*p) << "\n";
    return;
  }
  if (cmd == "dump") {
    if (!src || !dst) usid::fail("dump needs --src and --dst");
    out << usid::policy_block(ctl.dump_policy(*src, *dst));
    return;
  }
  usid::fail("unknown policy command '" + cmd + "'");
}

void run_script(usid::Controller& ctl, const std::string& path, std::ostream& out) {
  std::ifstream in(path);
  if (!in) usid::fail("cannot open policy script '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = usid::detail::tokenize(line);
    if (tok.empty()) continue;
    try {
      run_policy_command(ctl, tok, out);
    } catch (const usid::Error& e) {
      throw ScriptError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

int cmd_analyze(int max_waypoints, const std::string& block, int nf_bits) {
  usid::UsidScheme scheme;
  scheme.block = usid::Prefix::parse(block);
  scheme.nf_bits = nf_bits;
  scheme.validate();
  auto reports = usid::sweep_scenarios(max_waypoints, scheme);
  std::cout << usid::render_csv(reports);
  return 0;
}

int cmd_simulate(const std::string& topo_path, const std::string& script_path,
                 const std::vector<std::string>& injections, bool strict, bool hex) {
  usid::Topology topo = usid::load_topology_file(topo_path);
  usid::Controller ctl(topo);
  if (!script_path.empty()) run_script(ctl, script_path, std::cout);

  bool any_drop = false;
  for (const auto& target : injections) {
    auto parts = split(target, ':');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
      usid::fail("bad --inject '" + target + "' (want src-host:dst-host)");
    const usid::Host& src = topo.host(parts[0]);
    const usid::Host& dst = topo.host(parts[1]);
    usid::Packet pkt = usid::make_host_packet(src, dst);
    std::cout << "# inject " << src.name << " -> " << dst.name << "\n";
    if (hex) {
      auto bytes = usid::serialize_packet(pkt);
      std::cout << "# tx " << bytes.size() << " bytes\n" << usid::hex_dump(bytes);
    }
    usid::Trace trace = usid::inject(topo, src.name, pkt);
    std::cout << trace.render();
    any_drop = any_drop || trace.dropped();
  }
  return (strict && any_drop) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SRv6 Micro SID dataplane toolkit"};
  app.require_subcommand(1);

  // analyze
  int max_waypoints = 7;
  std::string block = "fcbb:bbbb::/32";
  int nf_bits = 16;
  auto* analyze = app.add_subcommand("analyze", "emit the header-compression sweep as CSV");
  analyze->add_option("--max", max_waypoints, "waypoints per domain, swept 1..max")
      ->check(CLI::Range(1, 64));
  analyze->add_option("--block", block, "uSID locator block prefix");
  analyze->add_option("--nf", nf_bits, "uSID length in bits");

  // simulate
  std::string topo_path, script_path;
  std::vector<std::string> injections;
  bool strict = false, hex = false;
  auto* simulate = app.add_subcommand("simulate", "run policies and packet injections");
  simulate->add_option("--topo", topo_path, "topology file")->required();
  simulate->add_option("--script", script_path, "policy script (one command per line)");
  simulate->add_option("--inject", injections, "src-host:dst-host, repeatable");
  simulate->add_flag("--strict", strict, "exit 3 if any injection is dropped");
  simulate->add_flag("--hex", hex, "hex-dump injected packets");

  // policy
  std::string p_topo, p_src, p_dst, p_path;
  int p_id = -1;
  bool p_symmetric = false;
  auto* policy = app.add_subcommand("policy", "one-shot policy operations");
  policy->require_subcommand(1);
  for (const char* name : {"add", "del", "list", "dump"}) {
    auto* sub = policy->add_subcommand(name);
    sub->add_option("--topo", p_topo, "topology file")->required();
    if (std::string(name) != "list") {
      sub->add_option("--src", p_src, "source host");
      sub->add_option("--dst", p_dst, "destination host");
    }
    if (std::string(name) == "add") {
      sub->add_option("--path", p_path, "comma-separated node names");
      sub->add_flag("--symmetric", p_symmetric, "install the reverse policy too");
    }
    if (std::string(name) == "del") sub->add_option("--id", p_id, "policy id");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(max_waypoints, block, nf_bits);
    if (simulate->parsed()) return cmd_simulate(topo_path, script_path, injections, strict, hex);
    if (policy->parsed()) {
      usid::Topology topo = usid::load_topology_file(p_topo);
      usid::Controller ctl(topo);
      std::vector<std::string> tok{policy->get_subcommands().front()->get_name()};
      if (!p_src.empty()) { tok.push_back("--src"); tok.push_back(p_src); }
      if (!p_dst.empty()) { tok.push_back("--dst"); tok.push_back(p_dst); }
      if (!p_path.empty()) { tok.push_back("--path"); tok.push_back(p_path); }
      if (p_id >= 0) { tok.push_back("--id"); tok.push_back(std::to_string(p_id)); }
      if (p_symmetric) tok.push_back("--symmetric");
      run_policy_command(ctl, tok, std::cout);
      return 0;
    }
  } catch (const usid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
