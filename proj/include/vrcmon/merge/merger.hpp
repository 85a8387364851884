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

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace vrcmon::merge {

using dataflow::DataflowGraph;

/// Select value written for switching elements a configuration never uses.
inline constexpr int kDontCare = 0;

/// Configuration id -> (sbox name -> select value).
using SelectRow = std::map<std::string, int>;

struct MergedNetwork {
  /// Functional actors first (first-appearance order), then the switching
  /// elements in creation order.
  DataflowGraph graph;
  /// Input network name -> configuration id (1-based, input order).
  std::map<std::string, int> source_ids;
  std::vector<std::string> sbox_list;
  /// Functional actor -> configurations it originates from.
  std::map<std::string, std::set<int>> origins;

  std::string config_name(int config_id) const;
  std::size_t functional_actor_count() const;
};

struct ConfigTable {
  std::map<int, SelectRow> rows;
  /// Graph I/O ports used by each configuration, in merged declaration order.
  std::map<int, std::vector<std::string>> port_map;
};

struct MergeResult {
  MergedNetwork network;
  ConfigTable table;
};

/// Folds the input networks one at a time into a multi-functional network.
///
/// Actors are shared when their names match and their class, parameters,
/// ports and firing cost are equal; a name match with any of those differing
/// is an IdentityConflict. Graph ports are shared by name. After folding,
/// a 1:k demultiplexer is inserted on every source whose consumer differs
/// across configurations and a k:1 multiplexer on every sink whose producer
/// differs, so tokens only ever travel along the active configuration.
///
/// Errors: EmptyInput; SemanticError for invalid or duplicate-named inputs;
/// IdentityConflict.
MergeResult merge(std::span<const DataflowGraph> graphs);

/// Full select row for one configuration; throws UnknownConfig.
SelectRow select_config(const ConfigTable &table, int config_id);

/// The network seen by one configuration: switching elements collapsed
/// according to its select row, inactive actors and ports dropped.
DataflowGraph extract_config(const MergedNetwork &network, const ConfigTable &table,
                             int config_id);

/// True when two graphs have the same actors, ports and edges irrespective
/// of declaration order.
bool structurally_equal(const DataflowGraph &a, const DataflowGraph &b);

/// C_TAB sidecar, one line per configuration:
/// `config <id> <name>: SB_0=v SB_1=v ... | ports=p0,p1,...`
std::string write_ctab(const MergeResult &result);

/// Rebuilds a merge result from the merged XDF and its C_TAB sidecar.
MergeResult load_merged(std::string_view merged_xdf, std::string_view ctab);

} // namespace vrcmon::merge
