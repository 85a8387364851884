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

namespace vrcmon::dataflow {

/// Parses the XDF subset documented in docs/xdf-subset.md.
///
/// Errors:
///  - Errc::XmlSyntax for malformed XML;
///  - Errc::SchemaViolation for unknown elements or attributes, missing
///    required attributes and non-integer values;
///  - Errc::SemanticError when the resulting graph fails validate(); the
///    message lists every diagnostic.
DataflowGraph parse_xdf(std::string_view text);

/// Serializes a graph; parse_xdf(serialize_xdf(g)) == g for any valid g.
std::string serialize_xdf(const DataflowGraph &graph);

} // namespace vrcmon::dataflow
