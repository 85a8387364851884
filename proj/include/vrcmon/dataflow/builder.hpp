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

#include "vrcmon/dataflow/graph.hpp"
#include "vrcmon/dataflow/kinds.hpp"

#include <string>
#include <string_view>

namespace vrcmon::dataflow {

/// Fluent construction of graphs in code. Endpoints are written
/// "actor.port", or just "port" for a graph port.
class GraphBuilder {
public:
  explicit GraphBuilder(std::string name) { graph_.name = std::move(name); }

  GraphBuilder &input(std::string name, int width = 32) {
    graph_.ports.push_back({std::move(name), Direction::In, width});
    return *this;
  }
  GraphBuilder &output(std::string name, int width = 32) {
    graph_.ports.push_back({std::move(name), Direction::Out, width});
    return *this;
  }
  GraphBuilder &actor(std::string name, std::string kind, Params params = {}, int cost = 1) {
    graph_.actors.push_back(make_actor(std::move(name), std::move(kind), std::move(params), cost));
    return *this;
  }
  GraphBuilder &connect(std::string_view from, std::string_view to,
                        int depth = kDefaultFifoDepth) {
    graph_.edges.push_back({endpoint(from), endpoint(to), depth});
    return *this;
  }

  const DataflowGraph &graph() const { return graph_; }
  DataflowGraph build() const { return graph_; }

  static Endpoint endpoint(std::string_view text) {
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return {"", std::string(text)};
    return {std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
  }

private:
  DataflowGraph graph_;
};

} // namespace vrcmon::dataflow
