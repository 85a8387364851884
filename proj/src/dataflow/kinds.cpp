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

#include "vrcmon/dataflow/kinds.hpp"

#include "vrcmon/common/error.hpp"

#include <algorithm>

namespace vrcmon::dataflow {

namespace {

std::vector<std::string> numbered(std::string_view prefix, std::int64_t count) {
  std::vector<std::string> names;
  for (std::int64_t i = 0; i < count; ++i) {
    names.push_back(std::string(prefix) + std::to_string(i));
  }
  return names;
}

struct ParamRule {
  std::string name;
  std::optional<std::int64_t> default_value;
  std::int64_t lo;
  std::int64_t hi;
};

/// Checks a fixed parameter list: no unknown names, required ones present,
/// all values inside their closed range.
std::optional<std::string> apply_rules(Params &params,
                                       const std::vector<ParamRule> &rules) {
  for (const auto &[key, value] : params) {
    const bool known = std::any_of(rules.begin(), rules.end(),
                                   [&](const ParamRule &r) { return r.name == key; });
    if (!known) return "unknown parameter '" + key + "'";
  }
  for (const auto &rule : rules) {
    auto it = params.find(rule.name);
    if (it == params.end()) {
      if (!rule.default_value) return "missing parameter '" + rule.name + "'";
      it = params.emplace(rule.name, *rule.default_value).first;
    }
    if (it->second < rule.lo || it->second > rule.hi) {
      return "parameter '" + rule.name + "'=" + std::to_string(it->second) +
             " outside [" + std::to_string(rule.lo) + ", " +
             std::to_string(rule.hi) + "]";
    }
  }
  return std::nullopt;
}

KindInfo unary(std::string name, std::string summary,
               std::vector<ParamRule> rules = {}) {
  return {std::move(name), std::move(summary),
          [rules](Params &p) { return apply_rules(p, rules); },
          [](const Params &) { return PortSignature{{"in"}, {"out"}}; }};
}

KindInfo binary(std::string name, std::string summary) {
  return {std::move(name), std::move(summary),
          [](Params &p) { return apply_rules(p, {}); },
          [](const Params &) { return PortSignature{{"a", "b"}, {"out"}}; }};
}

constexpr std::int64_t kI32Min = INT32_MIN;
constexpr std::int64_t kI32Max = INT32_MAX;

std::vector<KindInfo> build_table() {
  std::vector<KindInfo> table;

  table.push_back(
      {"line_buffer",
       "row store; emits each pixel with the pixel one row above or below",
       [](Params &p) {
         auto err = apply_rules(p, {{"offset", std::nullopt, -1, 1},
                                    {"fwd", 0, 0, 1}});
         if (!err && p.at("offset") == 0) err = "parameter 'offset' must be -1 or 1";
         return err;
       },
       [](const Params &p) {
         PortSignature s{{"size", "in"}, {"cur", "shifted"}};
         if (p.at("fwd") != 0) s.out_ports.push_back("size_out");
         return s;
       }});

  table.push_back(
      {"delay",
       "pixel store; emits the horizontal window of a row in two copies",
       [](Params &p) {
         return apply_rules(p, {{"left", 0, 0, 4},
                                {"right", 0, 0, 4},
                                {"top", 0, 0, 4},
                                {"bottom", 0, 0, 4},
                                {"fwd", 0, 0, 1}});
       },
       [](const Params &p) {
         const auto taps = p.at("left") + 1 + p.at("right");
         PortSignature s{{"size", "in"}, numbered("x", taps)};
         for (auto &n : numbered("y", taps)) s.out_ports.push_back(n);
         if (p.at("fwd") != 0) s.out_ports.push_back("size_out");
         return s;
       }});

  table.push_back(
      {"conv", "dot product of the window inputs w<i> with coefficients c<i>",
       [](Params &p) -> std::optional<std::string> {
         std::int64_t count = 0;
         while (p.count("c" + std::to_string(count))) ++count;
         if (count == 0) return "conv needs coefficients c0..c<N-1>";
         if (static_cast<std::int64_t>(p.size()) != count) {
           return "conv parameters must be exactly c0..c" + std::to_string(count - 1);
         }
         for (const auto &[k, v] : p) {
           if (v < -1024 || v > 1024) return "coefficient '" + k + "' outside [-1024, 1024]";
         }
         return std::nullopt;
       },
       [](const Params &p) {
         return PortSignature{numbered("w", static_cast<std::int64_t>(p.size())), {"out"}};
       }});

  table.push_back({"abs_sum", "(|gx| + |gy|) >> n",
                   [](Params &p) { return apply_rules(p, {{"n", 0, 0, 31}}); },
                   [](const Params &) { return PortSignature{{"gx", "gy"}, {"out"}}; }});

  table.push_back(unary("thr", "255 when the input is above threshold, else 0",
                        {{"threshold", 80, 0, 255}}));

  table.push_back(
      {std::string(kSboxKind),
       "switching element: k:1 multiplexer or 1:k demultiplexer",
       [](Params &p) -> std::optional<std::string> {
         auto err = apply_rules(p, {{"sel", 0, 0, 255},
                                    {"inputs", std::nullopt, 1, 256},
                                    {"outputs", std::nullopt, 1, 256}});
         if (err) return err;
         const auto in = p.at("inputs");
         const auto out = p.at("outputs");
         if (!((in >= 2 && out == 1) || (in == 1 && out >= 2))) {
           return "sbox must be k:1 or 1:k with k >= 2";
         }
         if (p.at("sel") >= std::max(in, out)) return "sbox select out of range";
         return std::nullopt;
       },
       [](const Params &p) {
         if (p.at("outputs") == 1) return PortSignature{numbered("i", p.at("inputs")), {"out"}};
         return PortSignature{{"in"}, numbered("o", p.at("outputs"))};
       }});

  // Generic arithmetic classes used to compose synthetic networks.
  table.push_back(unary("offset", "x + value", {{"value", 0, kI32Min, kI32Max}}));
  table.push_back(unary("scale", "x * factor", {{"factor", 1, kI32Min, kI32Max}}));
  table.push_back(unary("negate", "-x"));
  table.push_back(unary("absval", "|x|"));
  table.push_back(unary("shr", "x >> n (arithmetic)", {{"n", 0, 0, 31}}));
  table.push_back(unary("clamp", "min(max(x, lo), hi)",
                        {{"lo", 0, kI32Min, kI32Max}, {"hi", 255, kI32Min, kI32Max}}));
  table.push_back(unary("accum", "running sum of the stream"));
  table.push_back(unary("decimate", "sum of each group of `factor` tokens",
                        {{"factor", 2, 1, 64}}));
  table.push_back(binary("add", "a + b"));
  table.push_back(binary("sub", "a - b"));
  table.push_back(binary("max", "max(a, b)"));
  table.push_back({"dup", "copies every token to both outputs",
                   [](Params &p) { return apply_rules(p, {}); },
                   [](const Params &) { return PortSignature{{"in"}, {"out0", "out1"}}; }});
  return table;
}

const std::vector<KindInfo> &table() {
  static const std::vector<KindInfo> kinds = build_table();
  return kinds;
}

} // namespace

const KindInfo *find_kind(std::string_view kind) {
  for (const auto &k : table()) {
    if (k.name == kind) return &k;
  }
  return nullptr;
}

std::vector<std::string> kind_names() {
  std::vector<std::string> names;
  for (const auto &k : table()) names.push_back(k.name);
  return names;
}

Actor make_actor(std::string name, std::string kind, Params params,
                 int firing_cost) {
  const KindInfo *info = find_kind(kind);
  if (info == nullptr) {
    throw Error(Errc::SemanticError, "actor '" + name + "': unknown kind '" + kind + "'");
  }
  if (auto err = info->normalize(params)) {
    throw Error(Errc::SemanticError, "actor '" + name + "': " + *err);
  }
  if (firing_cost < 1) {
    throw Error(Errc::SemanticError, "actor '" + name + "': firing cost must be >= 1");
  }
  auto sig = info->ports(params);
  return Actor{std::move(name), std::move(kind), std::move(params),
               std::move(sig.in_ports), std::move(sig.out_ports), firing_cost};
}

} // namespace vrcmon::dataflow
