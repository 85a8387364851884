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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vrcmon::dataflow {

/// Tokens are 32-bit signed integers inside the network, whatever the width
/// declared on the graph port they enter through.
using Token = std::int32_t;

inline constexpr int kDefaultFifoDepth = 64;

enum class Direction { In, Out };

struct PortDecl {
  std::string name;
  Direction direction = Direction::In;
  int token_width = 32;

  bool operator==(const PortDecl &) const = default;
};

struct Actor {
  std::string name;
  std::string kind;
  std::map<std::string, std::int64_t> params;
  std::vector<std::string> in_ports;
  std::vector<std::string> out_ports;
  int firing_cost = 1;

  bool operator==(const Actor &) const = default;

  /// Same functional element: kind, parameters, port signature and cost.
  bool same_function(const Actor &other) const {
    return kind == other.kind && params == other.params &&
           in_ports == other.in_ports && out_ports == other.out_ports &&
           firing_cost == other.firing_cost;
  }
};

/// One end of an edge. An empty `node` designates a graph port named `port`.
struct Endpoint {
  std::string node;
  std::string port;

  bool is_graph_port() const { return node.empty(); }

  auto operator<=>(const Endpoint &) const = default;
};

std::string to_string(const Endpoint &e);

struct Edge {
  Endpoint source;
  Endpoint target;
  int fifo_depth = kDefaultFifoDepth;

  bool operator==(const Edge &) const = default;
};

struct DataflowGraph {
  std::string name;
  std::vector<Actor> actors;
  std::vector<Edge> edges;
  /// Graph I/O ports in declaration order; direction distinguishes them.
  std::vector<PortDecl> ports;

  bool operator==(const DataflowGraph &) const = default;

  const Actor *find_actor(std::string_view actor_name) const;
  const PortDecl *find_port(std::string_view port_name) const;
  std::vector<PortDecl> input_ports() const;
  std::vector<PortDecl> output_ports() const;
};

} // namespace vrcmon::dataflow
