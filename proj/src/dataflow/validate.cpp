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

#include "vrcmon/dataflow/validate.hpp"

#include "vrcmon/dataflow/kinds.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace vrcmon::dataflow {

std::string_view to_string(Rule rule) {
  switch (rule) {
  case Rule::DuplicateActorName: return "DuplicateActorName";
  case Rule::DuplicatePortName: return "DuplicatePortName";
  case Rule::UnknownActorKind: return "UnknownActorKind";
  case Rule::BadParams: return "BadParams";
  case Rule::BadPortSignature: return "BadPortSignature";
  case Rule::BadFiringCost: return "BadFiringCost";
  case Rule::BadTokenWidth: return "BadTokenWidth";
  case Rule::BadFifoDepth: return "BadFifoDepth";
  case Rule::DanglingEndpoint: return "DanglingEndpoint";
  case Rule::DirectionMismatch: return "DirectionMismatch";
  case Rule::WidthMismatch: return "WidthMismatch";
  case Rule::MultipleProducers: return "MultipleProducers";
  case Rule::MultipleConsumers: return "MultipleConsumers";
  case Rule::UnconnectedPort: return "UnconnectedPort";
  case Rule::EmptyGraph: return "EmptyGraph";
  case Rule::Disconnected: return "Disconnected";
  }
  return "Unknown";
}

namespace {

enum class Role { Source, Target, Missing };

/// Whether an endpoint exists, and if so whether it can drive or receive.
Role classify(const DataflowGraph &g, const Endpoint &e) {
  if (e.is_graph_port()) {
    const PortDecl *p = g.find_port(e.port);
    if (p == nullptr) return Role::Missing;
    return p->direction == Direction::In ? Role::Source : Role::Target;
  }
  const Actor *a = g.find_actor(e.node);
  if (a == nullptr) return Role::Missing;
  if (std::find(a->out_ports.begin(), a->out_ports.end(), e.port) != a->out_ports.end()) {
    return Role::Source;
  }
  if (std::find(a->in_ports.begin(), a->in_ports.end(), e.port) != a->in_ports.end()) {
    return Role::Target;
  }
  return Role::Missing;
}

std::string edge_location(std::size_t i, const Edge &e) {
  return "edge #" + std::to_string(i) + " (" + to_string(e.source) + " -> " +
         to_string(e.target) + ")";
}

} // namespace

std::vector<Diagnostic> validate(const DataflowGraph &g) {
  std::vector<Diagnostic> out;
  auto report = [&](Rule r, std::string loc, std::string msg) {
    out.push_back({r, std::move(loc), std::move(msg)});
  };

  if (g.actors.empty()) {
    report(Rule::EmptyGraph, "graph '" + g.name + "'", "graph has no actors");
  }

  std::set<std::string> seen;
  for (const auto &a : g.actors) {
    const std::string loc = "actor '" + a.name + "'";
    if (!seen.insert(a.name).second) {
      report(Rule::DuplicateActorName, loc, "actor name used more than once");
    }
    if (a.firing_cost < 1) report(Rule::BadFiringCost, loc, "firing cost must be >= 1");
    const KindInfo *info = find_kind(a.kind);
    if (info == nullptr) {
      report(Rule::UnknownActorKind, loc, "unknown kind '" + a.kind + "'");
      continue;
    }
    Params normalized = a.params;
    if (auto err = info->normalize(normalized)) {
      report(Rule::BadParams, loc, *err);
      continue;
    }
    if (normalized != a.params) {
      report(Rule::BadParams, loc, "parameters are not in normalized form");
    }
    const auto sig = info->ports(normalized);
    if (sig.in_ports != a.in_ports || sig.out_ports != a.out_ports) {
      report(Rule::BadPortSignature, loc, "ports do not match class '" + a.kind + "'");
    }
  }

  std::set<std::string> port_names;
  for (const auto &p : g.ports) {
    const std::string loc = "port '" + p.name + "'";
    if (!port_names.insert(p.name).second) {
      report(Rule::DuplicatePortName, loc, "graph port name used more than once");
    }
    if (p.token_width != 8 && p.token_width != 16 && p.token_width != 32) {
      report(Rule::BadTokenWidth, loc,
             "token width " + std::to_string(p.token_width) + " not in {8, 16, 32}");
    }
  }

  std::map<Endpoint, int> drives;
  std::map<Endpoint, int> receives;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge &e = g.edges[i];
    const std::string loc = edge_location(i, e);
    if (e.fifo_depth < 1) report(Rule::BadFifoDepth, loc, "fifo depth must be >= 1");
    const Role src = classify(g, e.source);
    const Role dst = classify(g, e.target);
    if (src == Role::Missing) {
      report(Rule::DanglingEndpoint, loc, "source '" + to_string(e.source) + "' does not exist");
    } else if (src != Role::Source) {
      report(Rule::DirectionMismatch, loc, "source '" + to_string(e.source) + "' cannot drive an edge");
    } else {
      ++drives[e.source];
    }
    if (dst == Role::Missing) {
      report(Rule::DanglingEndpoint, loc, "target '" + to_string(e.target) + "' does not exist");
    } else if (dst != Role::Target) {
      report(Rule::DirectionMismatch, loc, "target '" + to_string(e.target) + "' cannot receive an edge");
    } else {
      ++receives[e.target];
    }
    if (e.source.is_graph_port() && e.target.is_graph_port() && src == Role::Source &&
        dst == Role::Target &&
        g.find_port(e.source.port)->token_width != g.find_port(e.target.port)->token_width) {
      report(Rule::WidthMismatch, loc, "pass-through between ports of different widths");
    }
  }

  auto check_port = [&](const Endpoint &ep, bool is_source, const std::string &loc) {
    const auto &counts = is_source ? drives : receives;
    auto it = counts.find(ep);
    const int n = it == counts.end() ? 0 : it->second;
    if (n == 0) {
      report(Rule::UnconnectedPort, loc, "port '" + to_string(ep) + "' has no edge");
    } else if (n > 1) {
      report(is_source ? Rule::MultipleConsumers : Rule::MultipleProducers, loc,
             "port '" + to_string(ep) + "' carries " + std::to_string(n) + " edges");
    }
  };
  for (const auto &a : g.actors) {
    if (find_kind(a.kind) == nullptr) continue;
    for (const auto &p : a.in_ports) check_port({a.name, p}, false, "actor '" + a.name + "'");
    for (const auto &p : a.out_ports) check_port({a.name, p}, true, "actor '" + a.name + "'");
  }
  for (const auto &p : g.ports) {
    check_port({"", p.name}, p.direction == Direction::In, "port '" + p.name + "'");
  }

  // Reachability from inputs and co-reachability to outputs over valid edges.
  std::map<std::string, std::vector<std::string>> fwd, bwd;
  for (const auto &e : g.edges) {
    if (classify(g, e.source) != Role::Source || classify(g, e.target) != Role::Target) continue;
    const std::string s = e.source.is_graph_port() ? "@" + e.source.port : e.source.node;
    const std::string t = e.target.is_graph_port() ? "@" + e.target.port : e.target.node;
    fwd[s].push_back(t);
    bwd[t].push_back(s);
  }
  auto flood = [](const std::vector<std::string> &seeds,
                  std::map<std::string, std::vector<std::string>> &adj) {
    std::set<std::string> reached(seeds.begin(), seeds.end());
    std::queue<std::string> work;
    for (const auto &s : seeds) work.push(s);
    while (!work.empty()) {
      auto n = work.front();
      work.pop();
      for (const auto &m : adj[n]) {
        if (reached.insert(m).second) work.push(m);
      }
    }
    return reached;
  };
  std::vector<std::string> ins, outs;
  for (const auto &p : g.ports) {
    (p.direction == Direction::In ? ins : outs).push_back("@" + p.name);
  }
  const auto from_inputs = flood(ins, fwd);
  const auto to_outputs = flood(outs, bwd);
  std::set<std::string> flagged;
  for (const auto &a : g.actors) {
    if (!flagged.insert(a.name).second) continue;
    if (!from_inputs.count(a.name)) {
      report(Rule::Disconnected, "actor '" + a.name + "'", "not reachable from any graph input");
    } else if (!to_outputs.count(a.name)) {
      report(Rule::Disconnected, "actor '" + a.name + "'", "does not reach any graph output");
    }
  }
  return out;
}

std::string format(const std::vector<Diagnostic> &diagnostics) {
  std::string text;
  for (const auto &d : diagnostics) {
    text += std::string(to_string(d.rule)) + " @ " + d.location + ": " + d.message + "\n";
  }
  return text;
}

} // namespace vrcmon::dataflow
