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

#include "vrcmon/dataflow/graph.hpp"

namespace vrcmon::dataflow {

std::string to_string(const Endpoint &e) {
  if (e.is_graph_port()) return e.port;
  return e.node + "." + e.port;
}

const Actor *DataflowGraph::find_actor(std::string_view actor_name) const {
  for (const auto &a : actors) {
    if (a.name == actor_name) return &a;
  }
  return nullptr;
}

const PortDecl *DataflowGraph::find_port(std::string_view port_name) const {
  for (const auto &p : ports) {
    if (p.name == port_name) return &p;
  }
  return nullptr;
}

std::vector<PortDecl> DataflowGraph::input_ports() const {
  std::vector<PortDecl> out;
  for (const auto &p : ports) {
    if (p.direction == Direction::In) out.push_back(p);
  }
  return out;
}

std::vector<PortDecl> DataflowGraph::output_ports() const {
  std::vector<PortDecl> out;
  for (const auto &p : ports) {
    if (p.direction == Direction::Out) out.push_back(p);
  }
  return out;
}

} // namespace vrcmon::dataflow
