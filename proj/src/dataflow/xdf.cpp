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

#include "vrcmon/dataflow/xdf.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/common/xml.hpp"
#include "vrcmon/dataflow/kinds.hpp"
#include "vrcmon/dataflow/validate.hpp"

#include <charconv>
#include <initializer_list>
#include <sstream>

namespace vrcmon::dataflow {

namespace {

[[noreturn]] void schema_error(const xml::Element &e, const std::string &what) {
  throw Error(Errc::SchemaViolation,
              "<" + e.name + "> at line " + std::to_string(e.line) + ": " + what);
}

void allow_only(const xml::Element &e, std::initializer_list<std::string_view> names) {
  for (const auto &[key, value] : e.attributes) {
    bool known = false;
    for (auto n : names) known = known || key == n;
    if (!known) schema_error(e, "unknown attribute '" + key + "'");
  }
  if (!e.trimmed_text().empty()) schema_error(e, "unexpected text content");
}

const std::string &required(const xml::Element &e, std::string_view key) {
  const std::string *v = e.attribute(key);
  if (v == nullptr) schema_error(e, "missing attribute '" + std::string(key) + "'");
  return *v;
}

std::int64_t integer(const xml::Element &e, std::string_view key, const std::string &text) {
  std::int64_t value = 0;
  const char *first = text.data();
  const char *last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    schema_error(e, "attribute '" + std::string(key) + "' is not an integer: '" + text + "'");
  }
  return value;
}

int small_integer(const xml::Element &e, std::string_view key, const std::string &text) {
  const auto v = integer(e, key, text);
  if (v < INT32_MIN || v > INT32_MAX) {
    schema_error(e, "attribute '" + std::string(key) + "' out of range");
  }
  return static_cast<int>(v);
}

Actor parse_instance(const xml::Element &e) {
  allow_only(e, {"id", "kind", "cost"});
  Actor actor;
  actor.name = required(e, "id");
  actor.kind = required(e, "kind");
  if (const auto *cost = e.attribute("cost")) actor.firing_cost = small_integer(e, "cost", *cost);
  for (const auto &child : e.children) {
    if (child.name != "Param") schema_error(child, "unexpected element inside <Instance>");
    allow_only(child, {"name", "value"});
    if (!child.children.empty()) schema_error(child, "<Param> takes no children");
    const std::string &key = required(child, "name");
    const auto value = integer(child, "value", required(child, "value"));
    if (!actor.params.emplace(key, value).second) {
      schema_error(child, "parameter '" + key + "' given twice");
    }
  }
  // Derive ports when the class accepts the parameters; otherwise leave the
  // actor as written so validate() reports the precise violation.
  if (const KindInfo *info = find_kind(actor.kind)) {
    Params normalized = actor.params;
    if (!info->normalize(normalized)) {
      auto sig = info->ports(normalized);
      actor.params = std::move(normalized);
      actor.in_ports = std::move(sig.in_ports);
      actor.out_ports = std::move(sig.out_ports);
    }
  }
  return actor;
}

PortDecl parse_port(const xml::Element &e) {
  allow_only(e, {"kind", "name", "width"});
  if (!e.children.empty()) schema_error(e, "<Port> takes no children");
  PortDecl port;
  port.name = required(e, "name");
  const std::string &kind = required(e, "kind");
  if (kind == "Input") {
    port.direction = Direction::In;
  } else if (kind == "Output") {
    port.direction = Direction::Out;
  } else {
    schema_error(e, "port kind must be Input or Output, got '" + kind + "'");
  }
  if (const auto *w = e.attribute("width")) port.token_width = small_integer(e, "width", *w);
  return port;
}

Edge parse_connection(const xml::Element &e) {
  allow_only(e, {"src", "src-port", "dst", "dst-port", "depth"});
  if (!e.children.empty()) schema_error(e, "<Connection> takes no children");
  Edge edge;
  edge.source = {required(e, "src"), required(e, "src-port")};
  edge.target = {required(e, "dst"), required(e, "dst-port")};
  if (const auto *d = e.attribute("depth")) edge.fifo_depth = small_integer(e, "depth", *d);
  return edge;
}

} // namespace

DataflowGraph parse_xdf(std::string_view text) {
  const xml::Element root = xml::parse(text);
  if (root.name != "XDF") schema_error(root, "root element must be <XDF>");
  allow_only(root, {"name"});

  DataflowGraph graph;
  graph.name = required(root, "name");
  for (const auto &child : root.children) {
    if (child.name == "Port") {
      graph.ports.push_back(parse_port(child));
    } else if (child.name == "Instance") {
      graph.actors.push_back(parse_instance(child));
    } else if (child.name == "Connection") {
      graph.edges.push_back(parse_connection(child));
    } else {
      schema_error(child, "unknown element");
    }
  }

  const auto diagnostics = validate(graph);
  if (!diagnostics.empty()) {
    throw Error(Errc::SemanticError,
                "graph '" + graph.name + "' is invalid:\n" + format(diagnostics));
  }
  return graph;
}

std::string serialize_xdf(const DataflowGraph &graph) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<XDF name=\"" << xml::escape(graph.name) << "\">\n";
  for (const auto &p : graph.ports) {
    out << "  <Port kind=\"" << (p.direction == Direction::In ? "Input" : "Output")
        << "\" name=\"" << xml::escape(p.name) << "\" width=\"" << p.token_width
        << "\"/>\n";
  }
  for (const auto &a : graph.actors) {
    out << "  <Instance id=\"" << xml::escape(a.name) << "\" kind=\"" << xml::escape(a.kind)
        << "\"";
    if (a.firing_cost != 1) out << " cost=\"" << a.firing_cost << "\"";
    if (a.params.empty()) {
      out << "/>\n";
      continue;
    }
    out << ">\n";
    for (const auto &[k, v] : a.params) {
      out << "    <Param name=\"" << xml::escape(k) << "\" value=\"" << v << "\"/>\n";
    }
    out << "  </Instance>\n";
  }
  for (const auto &e : graph.edges) {
    out << "  <Connection src=\"" << xml::escape(e.source.node) << "\" src-port=\""
        << xml::escape(e.source.port) << "\" dst=\"" << xml::escape(e.target.node)
        << "\" dst-port=\"" << xml::escape(e.target.port) << "\"";
    if (e.fifo_depth != kDefaultFifoDepth) out << " depth=\"" << e.fifo_depth << "\"";
    out << "/>\n";
  }
  out << "</XDF>\n";
  return out.str();
}

} // namespace vrcmon::dataflow
