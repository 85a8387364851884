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

#include <string>
#include <string_view>
#include <vector>

namespace vrcmon::dataflow {

enum class Rule {
  DuplicateActorName,
  DuplicatePortName,
  UnknownActorKind,
  BadParams,
  BadPortSignature,
  BadFiringCost,
  BadTokenWidth,
  BadFifoDepth,
  DanglingEndpoint,
  DirectionMismatch,
  WidthMismatch,
  MultipleProducers,
  MultipleConsumers,
  UnconnectedPort,
  EmptyGraph,
  Disconnected,
};

std::string_view to_string(Rule rule);

struct Diagnostic {
  Rule rule;
  std::string location;
  std::string message;

  bool operator==(const Diagnostic &) const = default;
};

/// Checks every structural invariant of a graph. The result is empty iff the
/// graph is well formed:
///  - names unique, kinds registered, parameters and ports match the class;
///  - every edge connects an existing source (actor output or graph input)
///    to an existing target (actor input or graph output);
///  - every port carries exactly one edge (no implicit fan-out or fan-in);
///  - every actor lies on a path from a graph input to a graph output.
std::vector<Diagnostic> validate(const DataflowGraph &graph);

/// Renders diagnostics one per line, `rule @ location: message`.
std::string format(const std::vector<Diagnostic> &diagnostics);

} // namespace vrcmon::dataflow
