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

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/builder.hpp"
#include "vrcmon/dataflow/validate.hpp"
#include "vrcmon/dataflow/xdf.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace vrcmon;
using namespace vrcmon::dataflow;

namespace {

std::string read_file(const std::string &name) {
  std::ifstream in(std::string(VRCMON_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, int> kind_counts(const DataflowGraph &g) {
  std::map<std::string, int> counts;
  for (const auto &a : g.actors) ++counts[a.kind];
  return counts;
}

Errc code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

const char *kThrOnly = R"(<?xml version="1.0"?>
<XDF name="t">
  <Port kind="Input" name="x" width="8"/>
  <Port kind="Output" name="y" width="8"/>
  <Instance id="thr" kind="thr"><Param name="threshold" value="80"/></Instance>
  <Connection src="" src-port="x" dst="thr" dst-port="in"/>
  <Connection src="thr" src-port="out" dst="" dst-port="y"/>
</XDF>)";

std::vector<Rule> rules_of(const std::vector<Diagnostic> &d) {
  std::vector<Rule> r;
  for (const auto &x : d) r.push_back(x.rule);
  return r;
}

} // namespace

TEST_CASE("single thr actor graph parses into one actor and two edges") {
  const auto g = parse_xdf(kThrOnly);
  CHECK(g.name == "t");
  REQUIRE(g.actors.size() == 1);
  CHECK(g.actors[0].kind == "thr");
  CHECK(g.actors[0].params.at("threshold") == 80);
  CHECK(g.edges.size() == 2);
  CHECK(g.input_ports().size() == 1);
  CHECK(g.output_ports().size() == 1);
  CHECK(g.input_ports()[0].token_width == 8);
}

TEST_CASE("empty graph is a semantic error") {
  CHECK(code_of([] { parse_xdf(R"(<XDF name="g"/>)"); }) == Errc::SemanticError);
}

TEST_CASE("Roberts transcription has the expected kind multiset") {
  const auto g = parse_xdf(read_file("roberts.xdf"));
  const std::map<std::string, int> expected{
      {"line_buffer", 1}, {"delay", 2}, {"conv", 2}, {"abs_sum", 1}, {"thr", 1}};
  CHECK(kind_counts(g) == expected);
  CHECK(validate(g).empty());
}

TEST_CASE("Sobel transcription uses two line buffers") {
  const auto g = parse_xdf(read_file("sobel.xdf"));
  CHECK(kind_counts(g).at("line_buffer") == 2);
  CHECK(kind_counts(g).at("conv") == 2);
  CHECK(validate(g).empty());
}

TEST_CASE("round trip parse-serialize-parse is stable") {
  for (const auto *name : {"roberts.xdf", "sobel.xdf"}) {
    const auto g1 = parse_xdf(read_file(name));
    const auto text = serialize_xdf(g1);
    const auto g2 = parse_xdf(text);
    CHECK(g1 == g2);
    CHECK(serialize_xdf(g2) == text);
  }
  const auto t = parse_xdf(kThrOnly);
  CHECK(parse_xdf(serialize_xdf(t)) == t);
}

TEST_CASE("non-default cost and depth survive the round trip") {
  auto g = GraphBuilder("c")
               .input("x")
               .output("y")
               .actor("a", "offset", {{"value", -3}}, 4)
               .connect("x", "a.in", 7)
               .connect("a.out", "y")
               .build();
  REQUIRE(validate(g).empty());
  const auto back = parse_xdf(serialize_xdf(g));
  CHECK(back == g);
  CHECK(back.actors[0].firing_cost == 4);
  CHECK(back.edges[0].fifo_depth == 7);
  CHECK(back.edges[1].fifo_depth == kDefaultFifoDepth);
}

TEST_CASE("malformed XML is XmlSyntax") {
  CHECK(code_of([] { parse_xdf("<XDF name=\"g\"><Port></XDF>"); }) == Errc::XmlSyntax);
  CHECK(code_of([] { parse_xdf("<XDF name=\"g\"><a><b></c></a></XDF>"); }) == Errc::XmlSyntax);
  CHECK(code_of([] { parse_xdf(""); }) == Errc::XmlSyntax);
}

TEST_CASE("schema violations") {
  CHECK(code_of([] { parse_xdf(R"(<XDF name="g"><Actor id="a"/></XDF>)"); }) == Errc::SchemaViolation);
  CHECK(code_of([] { parse_xdf(R"(<XDF name="g" color="red"/>)"); }) == Errc::SchemaViolation);
  CHECK(code_of([] { parse_xdf(R"(<Network name="g"/>)"); }) == Errc::SchemaViolation);
  CHECK(code_of([] { parse_xdf(R"(<XDF/>)"); }) == Errc::SchemaViolation);
  CHECK(code_of([] {
          parse_xdf(R"(<XDF name="g"><Instance id="a" kind="thr"><Param name="threshold" value="x"/></Instance></XDF>)");
        }) == Errc::SchemaViolation);
  CHECK(code_of([] { parse_xdf(R"(<XDF name="g"><Port kind="Inout" name="p"/></XDF>)"); }) ==
        Errc::SchemaViolation);
}

TEST_CASE("semantic errors from the parser") {
  // Unknown kind.
  CHECK(code_of([] {
          parse_xdf(R"(<XDF name="g"><Port kind="Input" name="x"/><Port kind="Output" name="y"/>
            <Instance id="a" kind="fft"/>
            <Connection src="" src-port="x" dst="a" dst-port="in"/>
            <Connection src="a" src-port="out" dst="" dst-port="y"/></XDF>)");
        }) == Errc::SemanticError);
  // Dangling endpoint.
  CHECK(code_of([] {
          parse_xdf(R"(<XDF name="g"><Port kind="Input" name="x"/><Port kind="Output" name="y"/>
            <Instance id="a" kind="negate"/>
            <Connection src="" src-port="x" dst="a" dst-port="in"/>
            <Connection src="b" src-port="out" dst="" dst-port="y"/></XDF>)");
        }) == Errc::SemanticError);
}

TEST_CASE("validate reports constructed violations") {
  auto base = GraphBuilder("v").input("x").output("y");

  SUBCASE("valid chain") {
    auto g = base.actor("a", "negate").connect("x", "a.in").connect("a.out", "y").build();
    CHECK(validate(g).empty());
  }
  SUBCASE("duplicate actor name") {
    auto g = base.actor("conv", "negate").connect("x", "conv.in").connect("conv.out", "y").build();
    g.actors.push_back(g.actors[0]);
    const auto r = rules_of(validate(g));
    CHECK(std::count(r.begin(), r.end(), Rule::DuplicateActorName) == 1);
  }
  SUBCASE("dangling endpoint") {
    auto g = base.actor("a", "negate").connect("x", "a.in").connect("a.out", "y").build();
    g.edges.push_back({{"a", "nope"}, {"", "y"}, 4});
    const auto r = rules_of(validate(g));
    CHECK(std::find(r.begin(), r.end(), Rule::DanglingEndpoint) != r.end());
  }
  SUBCASE("fan-out needs dup") {
    auto g = base.output("z")
                 .actor("a", "negate")
                 .connect("x", "a.in")
                 .connect("a.out", "y")
                 .connect("a.out", "z")
                 .build();
    const auto r = rules_of(validate(g));
    CHECK(std::find(r.begin(), r.end(), Rule::MultipleConsumers) != r.end());
  }
  SUBCASE("orphan actor") {
    auto g = base.actor("a", "negate")
                 .actor("b", "dup")
                 .connect("x", "a.in")
                 .connect("a.out", "y")
                 .build();
    const auto r = rules_of(validate(g));
    CHECK(std::find(r.begin(), r.end(), Rule::UnconnectedPort) != r.end());
    CHECK(std::find(r.begin(), r.end(), Rule::Disconnected) != r.end());
  }
  SUBCASE("bad depth, cost and width") {
    auto g = base.actor("a", "negate").connect("x", "a.in", 0).connect("a.out", "y").build();
    g.actors[0].firing_cost = 0;
    g.ports[0].token_width = 12;
    const auto r = rules_of(validate(g));
    CHECK(std::find(r.begin(), r.end(), Rule::BadFifoDepth) != r.end());
    CHECK(std::find(r.begin(), r.end(), Rule::BadFiringCost) != r.end());
    CHECK(std::find(r.begin(), r.end(), Rule::BadTokenWidth) != r.end());
  }
  SUBCASE("edge from an output port") {
    auto g = base.actor("a", "negate").connect("x", "a.in").connect("a.out", "y").build();
    g.edges.push_back({{"", "y"}, {"a", "in"}, 4});
    const auto r = rules_of(validate(g));
    CHECK(std::find(r.begin(), r.end(), Rule::DirectionMismatch) != r.end());
  }
  SUBCASE("diagnostics carry a location") {
    auto g = base.build();
    const auto d = validate(g);
    REQUIRE(!d.empty());
    CHECK(d[0].rule == Rule::EmptyGraph);
    CHECK(!format(d).empty());
  }
}

TEST_CASE("kind registry derives ports and rejects bad parameters") {
  const auto d = make_actor("d", "delay", {{"left", 1}, {"right", 1}, {"fwd", 1}});
  CHECK(d.out_ports == std::vector<std::string>{"x0", "x1", "x2", "y0", "y1", "y2", "size_out"});
  CHECK(d.params.at("top") == 0);
  const auto lb = make_actor("l", "line_buffer", {{"offset", -1}});
  CHECK(lb.out_ports == std::vector<std::string>{"cur", "shifted"});
  CHECK(make_actor("t", "thr").params.at("threshold") == 80);
  CHECK(make_actor("s", "sbox", {{"inputs", 3}, {"outputs", 1}}).in_ports.size() == 3);
  CHECK_THROWS_AS(make_actor("l", "line_buffer", {{"offset", 0}}), Error);
  CHECK_THROWS_AS(make_actor("c", "conv", {{"c0", 1}, {"c2", 1}}), Error);
  CHECK_THROWS_AS(make_actor("s", "sbox", {{"inputs", 1}, {"outputs", 1}}), Error);
  CHECK_THROWS_AS(make_actor("x", "thr", {{"bogus", 1}}), Error);
  CHECK_THROWS_AS(make_actor("x", "nope"), Error);
}
