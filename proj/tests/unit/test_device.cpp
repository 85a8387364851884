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

#include "support/edge_oracle.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/builder.hpp"
#include "vrcmon/device/vrc_device.hpp"
#include "vrcmon/edgedetect/edgedetect.hpp"

#include <doctest.h>

#include <functional>

using namespace vrcmon;
using namespace vrcmon::device;

namespace {

merge::MergeResult edge_merge() {
  return merge::merge(std::vector<dataflow::DataflowGraph>{
      edgedetect::build_kernel_graph(edgedetect::KernelSpec::sobel()),
      edgedetect::build_kernel_graph(edgedetect::KernelSpec::roberts())});
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

std::uint64_t read64(const VrcDevice &d, std::uint32_t window_index) {
  const auto off = d.monitor_window_offset() + window_index;
  return d.reg_read(off) | (static_cast<std::uint64_t>(d.reg_read(off + 1)) << 32);
}

/// Loads one block and starts configuration `id` by raw register access.
void load_block(VrcDevice &d, int id, const testing::Plane &p) {
  d.reg_write(d.size_register("in_size"), 2);
  d.reg_write(d.size_register("in_data"), static_cast<std::uint32_t>(p.px.size()));
  d.reg_write(d.size_register("out_data"), static_cast<std::uint32_t>(p.px.size()));
  d.mem_write(d.region_offset("in_size"), {p.h, p.w});
  d.mem_write(d.region_offset("in_data"), std::vector<std::int32_t>(p.px.begin(), p.px.end()));
  d.reg_write(kRegConfigId, static_cast<std::uint32_t>(id));
  d.reg_write(kRegControl, kCtrlStart);
}

testing::Plane block(unsigned seed) {
  std::mt19937 rng(seed);
  return testing::random_plane(rng, 32, 32);
}

} // namespace

TEST_CASE("register map layout") {
  VrcDevice d(edge_merge());
  CHECK(d.base_address() == kDefaultBaseAddress);
  CHECK(d.size_register("out_data") == 3);
  CHECK(d.size_register("in_data") == 4);
  CHECK(d.size_register("in_size") == 5);
  CHECK(d.monitor_window_offset() == 6);
  CHECK(d.register_count() == 12);
  CHECK(d.region_words() == kDefaultMemoryWords / 3);
  CHECK(d.region_offset("in_data") == kDefaultMemoryWords / 3);
  const auto events = d.event_catalog();
  REQUIRE(events.size() == 3);
  CHECK(events[0].name == "MDC_CLOCK_CYCLE");
  CHECK(events[1].name == "MDC_INPUT_TOKENS");
  CHECK(events[2].name == "MDC_OUTPUT_TOKENS");
  CHECK(events[2].index == 4);

  VrcDevice fu(edge_merge(), {.fu_monitors = true});
  CHECK(fu.monitored_units().size() == 14);
  CHECK(fu.event_catalog().size() == 17);
  CHECK(fu.register_count() == 12 + 28);
}

TEST_CASE("reset state") {
  VrcDevice d(edge_merge(), {.fu_monitors = true});
  CHECK(d.state() == State::Idle);
  CHECK(d.reg_read(kRegStatus) == 0);
  for (std::uint32_t off = d.monitor_window_offset(); off < d.register_count(); ++off) {
    CHECK(d.reg_read(off) == 0);
  }
}

TEST_CASE("register protocol and errors") {
  VrcDevice d(edge_merge());
  d.reg_write(d.size_register("in_data"), 1024);
  CHECK(d.reg_read(d.size_register("in_data")) == 1024);
  CHECK(code_of([&] { d.reg_write(d.monitor_window_offset(), 1); }) == Errc::ReadOnlyRegister);
  CHECK(code_of([&] { d.reg_write(d.monitor_window_offset() + 5, 1); }) == Errc::ReadOnlyRegister);
  CHECK(code_of([&] { d.reg_write(kRegStatus, 1); }) == Errc::ReadOnlyRegister);
  CHECK(code_of([&] { d.reg_write(d.register_count(), 1); }) == Errc::OutOfRange);
  CHECK(code_of([&] { (void)d.reg_read(d.register_count()); }) == Errc::OutOfRange);
  CHECK(code_of([&] { d.reg_write(kRegControl, kCtrlStart); }) == Errc::UnknownConfig);
  CHECK(d.state() == State::Idle);
  CHECK(code_of([&] { (void)d.run_to_completion(); }) == Errc::BadState);

  load_block(d, 1, block(1));
  CHECK(d.state() == State::Running);
  CHECK(d.reg_read(kRegStatus) == 0);
  CHECK(code_of([&] { d.reg_write(kRegControl, kCtrlStart); }) == Errc::BadState);
  CHECK(code_of([&] { d.reg_write(kRegControl, kCtrlClear); }) == Errc::BadState);
  CHECK(code_of([&] { d.reg_write(kRegConfigId, 2); }) == Errc::BadState);
  CHECK(code_of([&] { d.mem_write(0, {1}); }) == Errc::BadState);
  CHECK(code_of([&] { (void)d.mem_read(0, 1); }) == Errc::BadState);
  d.run_to_completion();
  CHECK(d.state() == State::Done);
  CHECK(d.reg_read(kRegStatus) == kStatusDone);
  CHECK(code_of([&] { d.reg_write(kRegControl, kCtrlStart); }) == Errc::BadState);
  d.reg_write(kRegControl, kCtrlClear);
  CHECK(d.state() == State::Idle);

  CHECK(code_of([] { VrcDevice(edge_merge(), {.base_address = 0x43c00002}); }) == Errc::InvalidArgument);
}

TEST_CASE("local memory") {
  VrcDevice d(edge_merge(), {.memory_words = 300});
  d.mem_write(0, {1, 2, 3});
  CHECK(d.mem_read(0, 3) == std::vector<std::int32_t>{1, 2, 3});
  d.mem_write(297, {7, 8, 9});
  CHECK(d.mem_read(297, 3) == std::vector<std::int32_t>{7, 8, 9});
  CHECK(code_of([&] { (void)d.mem_read(299, 2); }) == Errc::OutOfRange);
  CHECK(code_of([&] { d.mem_write(300, {1}); }) == Errc::OutOfRange);
  // A transfer larger than a port region is refused at start.
  d.reg_write(d.size_register("in_data"), 101);
  d.reg_write(kRegConfigId, 1);
  CHECK(code_of([&] { d.reg_write(kRegControl, kCtrlStart); }) == Errc::OutOfRange);
  CHECK(d.state() == State::Idle);
}

TEST_CASE("zero-length run completes immediately") {
  VrcDevice d(edge_merge());
  d.reg_write(kRegConfigId, 2);
  d.reg_write(kRegControl, kCtrlStart);
  CHECK(d.state() == State::Done);
  CHECK(d.last_run_cycles() == 0);
  CHECK(read64(d, kMonClock) == 0);
  CHECK(read64(d, kMonOutputTokens) == 0);
}

TEST_CASE("Roberts block through registers and memory") {
  VrcDevice d(edge_merge(), {.fu_monitors = true});
  const auto p = block(3);
  load_block(d, 2, p);
  const auto cycles = d.run_to_completion();
  CHECK(cycles > 1024);
  CHECK(read64(d, kMonClock) == cycles);
  CHECK(read64(d, kMonInputTokens) == 1026);
  CHECK(read64(d, kMonOutputTokens) == 1024);
  CHECK(d.fu_firings("thr") == 1024);
  CHECK(d.fu_firings("sobel_conv_x") == 0);
  CHECK(d.fu_firings("roberts_conv_x") == 1024);
  const auto out = d.mem_read(d.region_offset("out_data"), 1024);
  const auto expect = testing::naive_edges(p, 2, 0, 80);
  CHECK(std::vector<std::uint8_t>(out.begin(), out.end()) == expect.px);

  // Firing counters match the standalone graph under the same stimulus.
  edgedetect::Image img(32, 32);
  img.data = p.px;
  SimulationOptions opt;
  opt.expected = std::map<std::string, std::uint64_t>{{"out_data", 1024}};
  const auto ref = simulate(edgedetect::build_kernel_graph(edgedetect::KernelSpec::roberts()),
                            edgedetect::graph_inputs(img), opt);
  for (const auto &[actor, n] : ref.firings) CHECK(d.fu_firings(actor) == n);
}

TEST_CASE("Sobel block") {
  VrcDevice d(edge_merge());
  const auto p = block(4);
  load_block(d, 1, p);
  d.run_to_completion();
  const auto out = d.mem_read(d.region_offset("out_data"), 1024);
  CHECK(std::vector<std::uint8_t>(out.begin(), out.end()) == testing::naive_edges(p, 3, 3, 80).px);
}

TEST_CASE("counters are monotone during a run and zero after clear") {
  VrcDevice d(edge_merge(), {.fu_monitors = true});
  load_block(d, 2, block(5));
  std::vector<std::uint64_t> last(d.event_catalog().size(), 0);
  while (d.state() == State::Running) {
    d.tick(37);
    const auto events = d.event_catalog();
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto v = read64(d, events[i].index);
      CHECK(v >= last[i]);
      last[i] = v;
    }
  }
  CHECK(last[0] == d.last_run_cycles());
  // Counters accumulate until cleared.
  d.reg_write(kRegControl, kCtrlClear);
  for (std::uint32_t off = d.monitor_window_offset(); off < d.register_count(); ++off) {
    CHECK(d.reg_read(off) == 0);
  }
  // Clear from Idle also zeroes.
  d.reg_write(kRegControl, kCtrlClear);
  CHECK(d.clock_cycles() == 0);
}

TEST_CASE("firing monitors do not perturb output or time") {
  const auto p = block(6);
  VrcDevice plain(edge_merge());
  VrcDevice monitored(edge_merge(), {.fu_monitors = true});
  for (int id = 1; id <= 2; ++id) {
    load_block(plain, id, p);
    load_block(monitored, id, p);
    CHECK(plain.run_to_completion() == monitored.run_to_completion());
    CHECK(plain.mem_read(plain.region_offset("out_data"), 1024) ==
          monitored.mem_read(monitored.region_offset("out_data"), 1024));
    plain.reg_write(kRegControl, kCtrlClear);
    monitored.reg_write(kRegControl, kCtrlClear);
  }
}

TEST_CASE("deadlock and timeout leave the device Done with the error bit") {
  const auto g = dataflow::GraphBuilder("join")
                     .input("a")
                     .input("b")
                     .output("y")
                     .actor("s", "add")
                     .connect("a", "s.a", 2)
                     .connect("b", "s.b", 2)
                     .connect("s.out", "y")
                     .build();
  VrcDevice d(merge::merge(std::vector<dataflow::DataflowGraph>{g}), {.memory_words = 30});
  d.reg_write(d.size_register("a"), 5);
  d.reg_write(d.size_register("y"), 1);
  d.reg_write(kRegConfigId, 1);
  d.reg_write(kRegControl, kCtrlStart);
  CHECK(code_of([&] { d.run_to_completion(); }) == Errc::Deadlock);
  CHECK(d.state() == State::Done);
  CHECK(d.reg_read(kRegStatus) == (kStatusDone | kStatusError));
  CHECK(d.last_error().find("a -> s.a") != std::string::npos);
  d.reg_write(kRegControl, kCtrlClear);
  CHECK(d.reg_read(kRegStatus) == 0);

  VrcDevice slow(edge_merge(), {.cycle_budget = 100});
  load_block(slow, 2, block(7));
  CHECK(code_of([&] { slow.run_to_completion(); }) == Errc::Timeout);
  CHECK(slow.reg_read(kRegStatus) == (kStatusDone | kStatusError));
}

TEST_CASE("firing cost stretches time but not results") {
  auto make = [](int cost) {
    return dataflow::GraphBuilder("c")
        .input("x")
        .output("y")
        .actor("n", "negate", {}, cost)
        .connect("x", "n.in")
        .connect("n.out", "y")
        .build();
  };
  std::vector<dataflow::Token> in{1, 2, 3, 4, 5, 6, 7, 8};
  SimulationOptions opt;
  opt.expected = std::map<std::string, std::uint64_t>{{"y", 8}};
  const auto fast = simulate(make(1), {{"x", in}}, opt);
  const auto slow = simulate(make(3), {{"x", in}}, opt);
  CHECK(fast.outputs == slow.outputs);
  CHECK(fast.outputs.at("y") == std::vector<dataflow::Token>{-1, -2, -3, -4, -5, -6, -7, -8});
  CHECK(slow.cycles > fast.cycles);
  // One word enters per step, one step in the actor, one to drain.
  CHECK(fast.cycles == 10);
  // Same stimulus, same count: the model is deterministic.
  CHECK(simulate(make(3), {{"x", in}}, opt).cycles == slow.cycles);
}
