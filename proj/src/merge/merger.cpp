/*
 * Copyright 2026 The vrcmon Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vrcmon/merge/merger.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/kinds.hpp"
#include "vrcmon/dataflow/validate.hpp"
#include "vrcmon/dataflow/xdf.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <queue>
#include <sstream>

namespace vrcmon::merge {

using dataflow::Actor;
using dataflow::Direction;
using dataflow::Edge;
using dataflow::Endpoint;
using dataflow::PortDecl;

std::string MergedNetwork::config_name(int config_id) const {
  for (const auto &[name, id] : source_ids) {
    if (id == config_id) return name;
  }
  throw Error(Errc::UnknownConfig, "configuration " + std::to_string(config_id));
}

std::size_t MergedNetwork::functional_actor_count() const {
  return static_cast<std::size_t>(std::count_if(
      graph.actors.begin(), graph.actors.end(),
      [](const Actor &a) { return !dataflow::is_sbox(a); }));
}

namespace {

struct Connection {
  Endpoint source;
  Endpoint target;
  int depth;
  std::set<int> configs;
};

/// The multi-configuration network before switching elements are placed.
struct Fold {
  std::vector<Actor> actors;
  std::map<std::string, std::set<int>> actor_configs;
  std::vector<PortDecl> ports;
  std::map<std::string, std::set<int>> port_configs;
  std::vector<Connection> connections;

  void absorb(const DataflowGraph &g, int id) {
    for (const auto &a : g.actors) {
      auto it = std::find_if(actors.begin(), actors.end(),
                             [&](const Actor &x) { return x.name == a.name; });
      if (it == actors.end()) {
        actors.push_back(a);
      } else if (!it->same_function(a)) {
        throw Error(Errc::IdentityConflict,
                    "actor '" + a.name + "' of network '" + g.name +
                        "' matches an existing actor by name but differs in "
                        "kind, parameters, ports or cost");
      }
      actor_configs[a.name].insert(id);
    }
    for (const auto &p : g.ports) {
      auto it = std::find_if(ports.begin(), ports.end(),
                             [&](const PortDecl &x) { return x.name == p.name; });
      if (it == ports.end()) {
        ports.push_back(p);
      } else if (!(*it == p)) {
        throw Error(Errc::IdentityConflict,
                    "port '" + p.name + "' of network '" + g.name +
                        "' differs in direction or width from an earlier network");
      }
      port_configs[p.name].insert(id);
    }
    for (const auto &e : g.edges) {
      auto it = std::find_if(connections.begin(), connections.end(), [&](const Connection &c) {
        return c.source == e.source && c.target == e.target;
      });
      if (it == connections.end()) {
        connections.push_back({e.source, e.target, e.fifo_depth, {id}});
      } else {
        it->depth = std::max(it->depth, e.fifo_depth);
        it->configs.insert(id);
      }
    }
  }
};

template <typename T>
std::size_t index_of(const std::vector<T> &v, const T &x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

} // namespace

MergeResult merge(std::span<const DataflowGraph> graphs) {
  if (graphs.empty()) throw Error(Errc::EmptyInput, "merge needs at least one network");

  MergeResult result;
  auto &net = result.network;
  Fold fold;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto &g = graphs[i];
    if (auto diags = dataflow::validate(g); !diags.empty()) {
      throw Error(Errc::SemanticError,
                  "network '" + g.name + "' is invalid:\n" + dataflow::format(diags));
    }
    const int id = static_cast<int>(i) + 1;
    if (!net.source_ids.emplace(g.name, id).second) {
      throw Error(Errc::SemanticError, "network name '" + g.name + "' given twice");
    }
    fold.absorb(g, id);
  }

  // Distinct consumers of every source and producers of every target, in
  // first-appearance order.
  std::map<Endpoint, std::vector<Endpoint>> consumers;
  std::map<Endpoint, std::vector<Endpoint>> producers;
  std::map<Endpoint, int> source_depth;
  std::map<Endpoint, int> target_depth;
  for (const auto &c : fold.connections) {
    auto &cs = consumers[c.source];
    if (std::find(cs.begin(), cs.end(), c.target) == cs.end()) cs.push_back(c.target);
    auto &ps = producers[c.target];
    if (std::find(ps.begin(), ps.end(), c.source) == ps.end()) ps.push_back(c.source);
    source_depth[c.source] = std::max(source_depth[c.source], c.depth);
    target_depth[c.target] = std::max(target_depth[c.target], c.depth);
  }

  std::map<Endpoint, std::string> demux_of;
  std::map<Endpoint, std::string> mux_of;
  std::vector<Actor> sboxes;
  auto new_sbox = [&](std::int64_t inputs, std::int64_t outputs) {
    std::string name = "SB_" + std::to_string(sboxes.size());
    sboxes.push_back(dataflow::make_actor(
        name, std::string(dataflow::kSboxKind),
        {{"sel", kDontCare}, {"inputs", inputs}, {"outputs", outputs}}));
    net.sbox_list.push_back(name);
    return name;
  };

  std::vector<Edge> edges;
  std::set<Endpoint> demux_fed;
  std::set<Endpoint> mux_drained;
  for (const auto &c : fold.connections) {
    const auto &cs = consumers[c.source];
    const auto &ps = producers[c.target];
    if (cs.size() > 1 && !demux_of.count(c.source)) {
      demux_of[c.source] = new_sbox(1, static_cast<std::int64_t>(cs.size()));
    }
    if (ps.size() > 1 && !mux_of.count(c.target)) {
      mux_of[c.target] = new_sbox(static_cast<std::int64_t>(ps.size()), 1);
    }

    Endpoint from = c.source;
    if (auto it = demux_of.find(c.source); it != demux_of.end()) {
      if (demux_fed.insert(c.source).second) {
        edges.push_back({c.source, {it->second, "in"}, source_depth[c.source]});
      }
      from = {it->second, "o" + std::to_string(index_of(cs, c.target))};
    }
    Endpoint to = c.target;
    std::optional<Edge> drain;
    if (auto it = mux_of.find(c.target); it != mux_of.end()) {
      to = {it->second, "i" + std::to_string(index_of(ps, c.source))};
      if (mux_drained.insert(c.target).second) {
        drain = Edge{{it->second, "out"}, c.target, target_depth[c.target]};
      }
    }
    edges.push_back({from, to, c.depth});
    if (drain) edges.push_back(*drain);
  }

  auto &g = net.graph;
  if (graphs.size() == 1) {
    g.name = graphs[0].name;
  } else {
    for (const auto &in : graphs) g.name += (g.name.empty() ? "" : "_") + in.name;
  }
  g.actors = fold.actors;
  for (auto &s : sboxes) g.actors.push_back(std::move(s));
  g.ports = fold.ports;
  g.edges = std::move(edges);
  net.origins = fold.actor_configs;

  for (const auto &[name, id] : net.source_ids) {
    SelectRow row;
    for (const auto &s : net.sbox_list) row[s] = kDontCare;
    for (const auto &c : fold.connections) {
      if (!c.configs.count(id)) continue;
      if (auto it = demux_of.find(c.source); it != demux_of.end()) {
        row[it->second] = static_cast<int>(index_of(consumers[c.source], c.target));
      }
      if (auto it = mux_of.find(c.target); it != mux_of.end()) {
        row[it->second] = static_cast<int>(index_of(producers[c.target], c.source));
      }
    }
    result.table.rows[id] = std::move(row);
    auto &active = result.table.port_map[id];
    for (const auto &p : fold.ports) {
      if (fold.port_configs[p.name].count(id)) active.push_back(p.name);
    }
  }
  return result;
}

SelectRow select_config(const ConfigTable &table, int config_id) {
  auto it = table.rows.find(config_id);
  if (it == table.rows.end()) {
    throw Error(Errc::UnknownConfig, "configuration " + std::to_string(config_id));
  }
  return it->second;
}

namespace {

/// Follows an edge through switching elements under a select row. Returns
/// the functional target and the narrowest FIFO along the way, or nothing
/// when a multiplexer blocks the path.
std::optional<std::pair<Endpoint, int>> follow(const DataflowGraph &g, const Edge &start,
                                               const SelectRow &row) {
  Endpoint at = start.target;
  int depth = start.fifo_depth;
  for (std::size_t hops = 0; hops <= g.edges.size(); ++hops) {
    const Actor *a = at.is_graph_port() ? nullptr : g.find_actor(at.node);
    if (a == nullptr || !dataflow::is_sbox(*a)) return std::make_pair(at, depth);
    const auto sel_it = row.find(a->name);
    const int sel = sel_it == row.end() ? kDontCare : sel_it->second;
    Endpoint out;
    if (a->out_ports.size() == 1) {
      if (at.port != "i" + std::to_string(sel)) return std::nullopt;
      out = {a->name, "out"};
    } else {
      out = {a->name, "o" + std::to_string(sel)};
    }
    auto next = std::find_if(g.edges.begin(), g.edges.end(),
                             [&](const Edge &e) { return e.source == out; });
    if (next == g.edges.end()) return std::nullopt;
    depth = std::min(depth, next->fifo_depth);
    at = next->target;
  }
  return std::nullopt;
}

bool is_functional_source(const DataflowGraph &g, const Endpoint &e) {
  if (e.is_graph_port()) return true;
  const Actor *a = g.find_actor(e.node);
  return a != nullptr && !dataflow::is_sbox(*a);
}

} // namespace

DataflowGraph extract_config(const MergedNetwork &network, const ConfigTable &table,
                             int config_id) {
  const SelectRow row = select_config(table, config_id);
  const auto &g = network.graph;
  const auto ports_it = table.port_map.find(config_id);
  const std::set<std::string> active_ports =
      ports_it == table.port_map.end()
          ? std::set<std::string>{}
          : std::set<std::string>(ports_it->second.begin(), ports_it->second.end());

  std::vector<Edge> collapsed;
  for (const auto &e : g.edges) {
    if (!is_functional_source(g, e.source)) continue;
    if (auto hit = follow(g, e, row)) collapsed.push_back({e.source, hit->first, hit->second});
  }

  std::set<std::string> active_actors;
  std::queue<std::string> work;
  auto visit = [&](const Endpoint &from) {
    for (const auto &e : collapsed) {
      if (e.source == from && !e.target.is_graph_port() &&
          active_actors.insert(e.target.node).second) {
        work.push(e.target.node);
      }
    }
  };
  for (const auto &p : g.ports) {
    if (p.direction == Direction::In && active_ports.count(p.name)) visit({"", p.name});
  }
  while (!work.empty()) {
    const auto name = work.front();
    work.pop();
    for (const auto &port : g.find_actor(name)->out_ports) visit({name, port});
  }

  DataflowGraph out;
  out.name = network.config_name(config_id);
  for (const auto &a : g.actors) {
    if (active_actors.count(a.name)) out.actors.push_back(a);
  }
  for (const auto &p : g.ports) {
    if (active_ports.count(p.name)) out.ports.push_back(p);
  }
  for (const auto &e : collapsed) {
    const bool src_ok = e.source.is_graph_port() ? active_ports.count(e.source.port) > 0
                                                 : active_actors.count(e.source.node) > 0;
    if (src_ok) out.edges.push_back(e);
  }
  return out;
}

bool structurally_equal(const DataflowGraph &a, const DataflowGraph &b) {
  auto by_name = [](auto x, auto y) { return x.name < y.name; };
  auto actors_a = a.actors, actors_b = b.actors;
  std::sort(actors_a.begin(), actors_a.end(), by_name);
  std::sort(actors_b.begin(), actors_b.end(), by_name);
  auto ports_a = a.ports, ports_b = b.ports;
  std::sort(ports_a.begin(), ports_a.end(), by_name);
  std::sort(ports_b.begin(), ports_b.end(), by_name);
  auto edge_key = [](const Edge &e) { return std::tie(e.source, e.target, e.fifo_depth); };
  auto by_edge = [&](const Edge &x, const Edge &y) { return edge_key(x) < edge_key(y); };
  auto edges_a = a.edges, edges_b = b.edges;
  std::sort(edges_a.begin(), edges_a.end(), by_edge);
  std::sort(edges_b.begin(), edges_b.end(), by_edge);
  return actors_a == actors_b && ports_a == ports_b && edges_a == edges_b;
}

std::string write_ctab(const MergeResult &result) {
  std::ostringstream out;
  for (const auto &[id, row] : result.table.rows) {
    out << "config " << id << " " << result.network.config_name(id) << ":";
    for (const auto &s : result.network.sbox_list) out << " " << s << "=" << row.at(s);
    out << " | ports=";
    const auto &ports = result.table.port_map.at(id);
    for (std::size_t i = 0; i < ports.size(); ++i) out << (i ? "," : "") << ports[i];
    out << "\n";
  }
  return out.str();
}

namespace {

[[noreturn]] void ctab_error(int line_no, const std::string &what) {
  throw Error(Errc::SchemaViolation, "C_TAB line " + std::to_string(line_no) + ": " + what);
}

int parse_int(std::string_view s, int line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    ctab_error(line_no, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

} // namespace

MergeResult load_merged(std::string_view merged_xdf, std::string_view ctab) {
  MergeResult result;
  auto &net = result.network;
  net.graph = dataflow::parse_xdf(merged_xdf);
  for (const auto &a : net.graph.actors) {
    if (dataflow::is_sbox(a)) net.sbox_list.push_back(a.name);
  }

  std::istringstream lines{std::string(ctab)};
  std::string line;
  int line_no = 0;
  bool ports_given = true;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::string body = line;
    std::string ports_part;
    if (auto bar = line.find('|'); bar != std::string::npos) {
      body = line.substr(0, bar);
      ports_part = line.substr(bar + 1);
    } else {
      ports_given = false;
    }
    const auto colon = body.find(':');
    if (colon == std::string::npos) ctab_error(line_no, "missing ':'");
    std::istringstream head(body.substr(0, colon));
    std::string keyword, id_text, name, extra;
    head >> keyword >> id_text >> name;
    if (keyword != "config" || name.empty() || (head >> extra)) {
      ctab_error(line_no, "expected 'config <id> <name>:'");
    }
    const int id = parse_int(id_text, line_no);
    if (!net.source_ids.emplace(name, id).second || result.table.rows.count(id)) {
      ctab_error(line_no, "duplicate configuration");
    }

    SelectRow row;
    std::istringstream selects(body.substr(colon + 1));
    std::string item;
    while (selects >> item) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) ctab_error(line_no, "expected SB=value, got '" + item + "'");
      const auto sbox = item.substr(0, eq);
      if (std::find(net.sbox_list.begin(), net.sbox_list.end(), sbox) == net.sbox_list.end()) {
        ctab_error(line_no, "unknown switching element '" + sbox + "'");
      }
      row[sbox] = parse_int(std::string_view(item).substr(eq + 1), line_no);
    }
    for (const auto &s : net.sbox_list) {
      if (!row.count(s)) ctab_error(line_no, "switching element '" + s + "' missing");
    }
    result.table.rows[id] = std::move(row);

    if (!ports_part.empty()) {
      std::istringstream ps(ports_part);
      std::string token;
      ps >> token;
      if (token.rfind("ports=", 0) != 0) ctab_error(line_no, "expected 'ports=' after '|'");
      std::vector<std::string> listed;
      std::string rest = token.substr(6);
      std::istringstream names(rest);
      std::string p;
      while (std::getline(names, p, ',')) {
        if (p.empty()) continue;
        if (net.graph.find_port(p) == nullptr) ctab_error(line_no, "unknown port '" + p + "'");
        listed.push_back(p);
      }
      result.table.port_map[id] = std::move(listed);
    }
  }
  if (result.table.rows.empty()) throw Error(Errc::SchemaViolation, "C_TAB has no configurations");

  if (!ports_given) {
    // Without an explicit port list a port is active when its configuration
    // routes it to or from a functional actor.
    for (const auto &[id, row] : result.table.rows) {
      std::set<std::string> used;
      for (const auto &e : net.graph.edges) {
        if (!is_functional_source(net.graph, e.source)) continue;
        if (auto hit = follow(net.graph, e, row)) {
          if (e.source.is_graph_port()) used.insert(e.source.port);
          if (hit->first.is_graph_port()) used.insert(hit->first.port);
        }
      }
      auto &active = result.table.port_map[id];
      active.clear();
      for (const auto &p : net.graph.ports) {
        if (used.count(p.name)) active.push_back(p.name);
      }
    }
  }

  for (const auto &[name, id] : net.source_ids) {
    for (const auto &a : extract_config(net, result.table, id).actors) {
      net.origins[a.name].insert(id);
    }
  }
  return result;
}

} // namespace vrcmon::merge
