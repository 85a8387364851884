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

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vrcmon::dataflow {

using Params = std::map<std::string, std::int64_t>;

struct PortSignature {
  std::vector<std::string> in_ports;
  std::vector<std::string> out_ports;
};

/// Entry of the functional-class table. `normalize` fills defaults and
/// returns an error message when the parameters do not fit the class.
struct KindInfo {
  std::string name;
  std::string summary;
  std::function<std::optional<std::string>(Params &)> normalize;
  std::function<PortSignature(const Params &)> ports;
};

const KindInfo *find_kind(std::string_view kind);
std::vector<std::string> kind_names();

/// Builds an actor whose parameters are normalized and whose port lists are
/// derived from its class. Throws Error{SemanticError} on unknown kinds or
/// parameters that violate the class arity.
Actor make_actor(std::string name, std::string kind, Params params = {},
                 int firing_cost = 1);

inline constexpr std::string_view kSboxKind = "sbox";

inline bool is_sbox(const Actor &a) { return a.kind == kSboxKind; }

} // namespace vrcmon::dataflow
