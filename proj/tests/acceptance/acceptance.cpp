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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "support/edge_oracle.hpp"
#include "support/stream_oracle.hpp"
#include "support/synthetic.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/kinds.hpp"
#include "vrcmon/dataflow/validate.hpp"
#include "vrcmon/device/engine.hpp"
#include "vrcmon/driver/driver.hpp"
#include "vrcmon/merge/merger.hpp"
#include "vrcmon/papify/papify.hpp"
#include "vrcmon/runtime/assessment.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace vrcmon;

namespace {

struct Checker {
  int checks = 0;
  int failures = 0;
  std::string first;
  std::string note;

  void expect(bool ok, const std::string &what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
};

merge::MergeResult edge_merge() {
  return merge::merge(std::vector<dataflow::DataflowGraph>{
      edgedetect::build_kernel_graph(edgedetect::KernelSpec::sobel()),
      edgedetect::build_kernel_graph(edgedetect::KernelSpec::roberts())});
}

edgedetect::Image to_image(const testing::Plane &p) {
  edgedetect::Image img(p.w, p.h);
  img.data = p.px;
  return img;
}

driver::InvokeResult filter_block(device::VrcDevice &d, const driver::DriverDescriptor &desc,
                                  const edgedetect::Image &img) {
  return driver::invoke(d, desc,
                        {{"in_size", {img.height, img.width}},
                         {"in_data", driver::Words(img.data.begin(), img.data.end())}},
                        {{"out_data", img.data.size()}});
}

std::uint64_t read64(const device::VrcDevice &d, std::uint32_t index) {
  const auto off = d.monitor_window_offset() + index;
  return d.reg_read(off) | (static_cast<std::uint64_t>(d.reg_read(off + 1)) << 32);
}

/// Loads one block and starts configuration `id` by raw register access.
void start_block(device::VrcDevice &d, int id, const edgedetect::Image &img) {
  d.reg_write(d.size_register("in_size"), 2);
  d.reg_write(d.size_register("in_data"), static_cast<std::uint32_t>(img.data.size()));
  d.reg_write(d.size_register("out_data"), static_cast<std::uint32_t>(img.data.size()));
  d.mem_write(d.region_offset("in_size"), {img.height, img.width});
  d.mem_write(d.region_offset("in_data"), std::vector<std::int32_t>(img.data.begin(), img.data.end()));
  d.reg_write(device::kRegConfigId, static_cast<std::uint32_t>(id));
  d.reg_write(device::kRegControl, device::kCtrlStart);
}

std::filesystem::path scratch(const std::string &leaf) {
  auto dir = std::filesystem::temp_directory_path() / "vrcmon_acceptance" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Frames {
  int width;
  int height;
  std::map<std::uint64_t, edgedetect::YuvFrame> shown;

  runtime::AssessmentParams params() {
    runtime::AssessmentParams p;
    p.width = width;
    p.height = height;
    p.frames = [this](std::uint64_t it) { return runtime::synthetic_frame(width, height, it + 1); };
    p.kernel = [](std::uint64_t it) { return it % 2 == 0 ? std::string("sobel") : std::string("roberts"); };
    p.display = [this](std::uint64_t it, const edgedetect::YuvFrame &f, const std::string &) { shown[it] = f; };
    return p;
  }
};

/// Platform plus an EventLib holding both components.
struct Rig {
  device::VrcDevice device;
  std::shared_ptr<papify::SoftwareCoreComponent> counters = std::make_shared<papify::SoftwareCoreComponent>();
  runtime::Platform platform;
  papify::EventLib lib;

  Rig() : device(edge_merge()), platform(runtime::assessment_platform(device, counters)) {
    lib.register_component(counters);
    lib.register_component(papify::load_mdc_component(driver::emit_mdc_info(device), device));
  }
};

std::map<std::string, std::uint64_t> counts_of(const std::map<std::string, testing::Stream> &s) {
  std::map<std::string, std::uint64_t> c;
  for (const auto &[p, v] : s) c[p] = v.size();
  return c;
}

void merged_equivalence(Checker &c) {
  // Sobel + Roberts through the driver against each standalone graph.
  device::VrcDevice d(edge_merge());
  const auto drivers = driver::generate_drivers(d);
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> dim(3, 32);
  int stimuli = 0;
  for (const auto &spec : {edgedetect::KernelSpec::sobel(), edgedetect::KernelSpec::roberts()}) {
    const auto alone = edgedetect::build_kernel_graph(spec);
    const auto &desc = driver::find_driver(drivers, spec.name());
    for (int t = 0; t < 100; ++t) {
      const auto img = to_image(testing::random_plane(rng, dim(rng), dim(rng)));
      const auto expect = edgedetect::run_graph(alone, img);
      const auto got = filter_block(d, desc, img).outputs.at("out_data");
      c.expect(got == driver::Words(expect.data.begin(), expect.data.end()),
               spec.name() + " stimulus " + std::to_string(t) + " differs from the standalone graph");
      ++stimuli;
    }
  }

  // Synthetic multi-graph suites, simulated under each configuration.
  const int suites = 4;
  for (unsigned seed = 1; seed <= suites; ++seed) {
    const auto suite = testing::make_suite(seed, 4);
    const auto m = merge::merge(suite.graphs);
    std::mt19937 srng(seed * 97);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> val(-100000, 100000);
    for (const auto &g : suite.graphs) {
      const int id = m.network.source_ids.at(g.name);
      for (int t = 0; t < 100; ++t) {
        std::map<std::string, testing::Stream> stim;
        const int n = len(srng);
        for (const auto &p : g.input_ports()) {
          for (int i = 0; i < n; ++i) stim[p.name].push_back(val(srng));
        }
        const auto oracle = testing::eval_streams(g, stim);
        device::SimulationOptions alone_opt;
        alone_opt.expected = counts_of(oracle);
        const auto alone = device::simulate(g, stim, alone_opt).outputs;
        device::SimulationOptions merged_opt = alone_opt;
        merged_opt.selects = merge::select_config(m.table, id);
        const auto merged = device::simulate(m.network.graph, stim, merged_opt).outputs;
        const auto where = "suite " + std::to_string(seed) + " graph " + g.name + " stimulus " + std::to_string(t);
        c.expect(alone == oracle, where + ": standalone graph disagrees with the stream oracle");
        c.expect(merged == alone, where + ": merged network differs from the standalone graph");
        ++stimuli;
      }
    }
  }
  c.note = std::to_string(stimuli) + " stimuli, 2 edge configs + " + std::to_string(suites) + " synthetic suites";
}

void sharing(Checker &c) {
  const auto sobel = edgedetect::build_kernel_graph(edgedetect::KernelSpec::sobel());
  const auto roberts = edgedetect::build_kernel_graph(edgedetect::KernelSpec::roberts());
  const auto m = edge_merge();
  const auto sum = sobel.actors.size() + roberts.actors.size();
  const auto merged = m.network.functional_actor_count();
  c.expect(merged < sum, "merged functional actors " + std::to_string(merged) + " not below " + std::to_string(sum));
  c.expect(m.network.origins.at("thr") == std::set<int>{1, 2}, "thr is not shared");
  c.expect(m.network.origins.at("line_buffer_0") == std::set<int>{1, 2}, "line_buffer_0 is not shared");
  c.expect(!m.network.sbox_list.empty(), "two distinct graphs need switching elements");
  c.expect(dataflow::validate(m.network.graph).empty(), "merged network does not validate");

  std::size_t sboxes = 0;
  for (const auto &g : {sobel, roberts}) {
    const auto single = merge::merge(std::vector<dataflow::DataflowGraph>{g});
    sboxes += single.network.sbox_list.size();
    for (const auto &a : single.network.graph.actors) sboxes += dataflow::is_sbox(a) ? 1 : 0;
    c.expect(merge::structurally_equal(single.network.graph, g), g.name + " single merge is not the identity");
  }
  for (unsigned seed = 1; seed <= 3; ++seed) {
    for (const auto &g : testing::make_suite(seed, 3).graphs) {
      sboxes += merge::merge(std::vector<dataflow::DataflowGraph>{g}).network.sbox_list.size();
    }
  }
  c.expect(sboxes == 0, "single-graph merges produced " + std::to_string(sboxes) + " switching elements");
  c.note = std::to_string(merged) + " of " + std::to_string(sum) + " functional actors, " +
           std::to_string(m.network.sbox_list.size()) + " switching elements";
}

void assessment_accounting(Checker &c) {
  Rig rig;
  Frames frames{352, 288, {}};
  const auto app = runtime::build_assessment_app(frames.params());
  runtime::configure_monitoring(rig.lib, app, rig.platform, {"PAPI_TOT_CYC", "PAPI_TOT_INS"},
                                {"MDC_CLOCK_CYCLE", "MDC_OUTPUT_TOKENS"});
  const auto mapping = runtime::map_actors(app, rig.platform, runtime::assessment_constraints(rig.platform));
  const int blocks = (352 / 32) * (288 / 32);
  c.expect(blocks == 99, "block count " + std::to_string(blocks));
  c.expect(app.firings_per_iteration() == 8 * 1 + 3 * 99, "firings per iteration " +
                                                              std::to_string(app.firings_per_iteration()));

  const auto dir = scratch("accounting");
  const auto hw_file = dir / "papify-output" / (std::string(runtime::kHwFilter) + ".csv");
  std::size_t hw_rows = 0;
  for (std::uint64_t it = 0; it < 2; ++it) {
    const auto r = runtime::execute_iteration(app, rig.platform, mapping, {.iteration = it, .monitor = &rig.lib});
    c.expect(r.firings.size() == 305, "iteration fired " + std::to_string(r.firings.size()) + " instances");
    c.expect(r.firing_counts.at(std::string(runtime::kHwFilter)) == 99, "hw filter fired a wrong number of times");
    rig.lib.flush_csv(dir);
    const auto rows = papify::read_csv_trace(hw_file).rows.size();
    c.expect(rows - hw_rows == 99, "hw trace gained " + std::to_string(rows - hw_rows) + " rows");
    hw_rows = rows;
  }
  c.expect(frames.shown.at(0).y == runtime::reference_filter(runtime::synthetic_frame(352, 288, 1).y, "sobel"),
           "displayed frame differs from the per-block reference");
  c.note = "99 blocks, 305 firings, 99 hw rows per iteration";
}

void monitor_exactness(Checker &c) {
  device::VrcDevice d(edge_merge(), {.fu_monitors = true});
  const auto drivers = driver::generate_drivers(d);
  auto mdc = papify::load_mdc_component(driver::emit_mdc_info(d), d);
  const auto &clock = *mdc->find("MDC_CLOCK_CYCLE");
  const auto &out_tokens = *mdc->find("MDC_OUTPUT_TOKENS");
  std::mt19937 rng(404);
  std::uniform_int_distribution<int> dim(3, 40);
  int invokes = 0;
  for (const auto &desc : drivers) {
    for (int t = 0; t < 30; ++t) {
      const bool full = t % 3 == 0;
      const auto img = to_image(testing::random_plane(rng, full ? 32 : dim(rng), full ? 32 : dim(rng)));
      const auto res = filter_block(d, desc, img);
      const auto returned = res.outputs.at("out_data").size();
      const auto where = desc.config_name + " invoke " + std::to_string(t);
      c.expect(d.input_tokens() == res.log.input_words, where + ": input tokens differ from the log");
      c.expect(d.output_tokens() == returned, where + ": output tokens differ from the returned words");
      c.expect(res.log.output_words == returned, where + ": log output words differ");
      c.expect(!full || returned == 1024, where + ": 32x32 block returned " + std::to_string(returned) + " words");
      c.expect(mdc->read(clock, "ACC0") == res.log.cycles, where + ": clock event differs from the run length");
      c.expect(mdc->read(clock, "ACC0") == d.last_run_cycles(), where + ": clock event differs from the device");
      c.expect(mdc->read(out_tokens, "ACC0") == returned, where + ": output event differs");

      d.reg_write(device::kRegControl, device::kCtrlClear);
      start_block(d, desc.config_id, img);
      const auto cycles = d.run_to_completion();
      c.expect(mdc->read(clock, "ACC0") == cycles, where + ": clock event differs from run_to_completion");
      c.expect(d.output_tokens() == img.data.size(), where + ": raw run output tokens");
      ++invokes;
    }
  }
  c.note = std::to_string(invokes) + " invokes";
}

void mdc_round_trip(Checker &c) {
  for (bool fu : {false, true}) {
    for (std::uint32_t base : {device::kDefaultBaseAddress, 0x80000000u}) {
      device::VrcDevice d(edge_merge(), {.base_address = base, .fu_monitors = fu});
      const auto comp = papify::load_mdc_component(driver::emit_mdc_info(d), d);
      const auto catalog = d.event_catalog();
      bool same = comp->events().size() == catalog.size();
      for (std::size_t i = 0; same && i < catalog.size(); ++i) {
        const auto &e = comp->events()[i];
        same = e.index == catalog[i].index && e.name == catalog[i].name && e.description == catalog[i].description;
      }
      c.expect(same, "catalog differs after the round trip (fu_monitors=" + std::to_string(fu) + ")");
      c.expect(comp->name() == "mdc", "component name " + comp->name());
    }
  }

  device::VrcDevice d(edge_merge());
  const std::string hand = R"(<mdcInfo>
  <baseAddress>0x43c00000</baseAddress>
    <nbEvents>2</nbEvents>
    <event>
      <index>0</index>
      <name>MDC_CLOCK_CYCLE</name>
      <desc>Event Description</desc>
    </event>
    <event>
      <index>4</index>
      <name>MDC_OUTPUT_TOKENS</name>
      <desc>Output tokens</desc>
    </event>
</mdcInfo>
)";
  const auto comp = papify::load_mdc_component(hand, d);
  c.expect(comp->events().size() == 2 && comp->events()[1].index == 4 && comp->events()[1].name == "MDC_OUTPUT_TOKENS",
           "hand-written listing loaded wrongly");

  auto rejected = [&](const std::string &text, Errc code) {
    try {
      papify::load_mdc_component(text, d);
    } catch (const Error &e) {
      return e.code() == code;
    }
    return false;
  };
  auto mismatch = hand;
  mismatch.replace(mismatch.find("<nbEvents>2"), 11, "<nbEvents>3");
  c.expect(rejected(mismatch, Errc::CountMismatch), "nbEvents mismatch accepted");
  auto moved = hand;
  moved.replace(moved.find("0x43c00000"), 10, "0x43d00000");
  c.expect(rejected(moved, Errc::BaseAddressMismatch), "wrong base address accepted");
  c.note = "catalogs identical, hand listing loads, count mismatch rejected";
}

void non_intrusive(Checker &c) {
  Rig rig;
  Frames on{352, 288, {}};
  Frames off{352, 288, {}};
  const auto app_on = runtime::build_assessment_app(on.params());
  const auto app_off = runtime::build_assessment_app(off.params());
  runtime::configure_monitoring(rig.lib, app_on, rig.platform, {"PAPI_TOT_CYC", "PAPI_TOT_INS"},
                                {"MDC_CLOCK_CYCLE", "MDC_OUTPUT_TOKENS"});
  const auto mapping = runtime::map_actors(app_on, rig.platform, runtime::assessment_constraints(rig.platform));
  const int frames = 6;
  for (std::uint64_t it = 0; it < frames; ++it) {
    runtime::execute_iteration(app_on, rig.platform, mapping, {.iteration = it, .monitor = &rig.lib});
    runtime::execute_iteration(app_off, rig.platform, mapping, {.iteration = it});
    const auto &a = on.shown.at(it);
    const auto &b = off.shown.at(it);
    c.expect(a.y.data == b.y.data && a.u == b.u && a.v == b.v, "frame " + std::to_string(it) + " differs");
  }
  c.expect(rig.lib.record_count() == frames * 305u, "monitored runs did not trace every firing");
  rig.lib.clear();

  const auto o = runtime::measure_overhead(app_on, rig.platform, mapping, rig.lib, 6);
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << frames << " frames byte-identical; host overhead " << o.overhead_percent << "% (" << o.rate_monitored
    << " vs " << o.rate_unmonitored << " FpS, not asserted)";
  c.note = s.str();
}

void oracle_equivalence(Checker &c) {
  const auto sobel = edgedetect::build_kernel_graph(edgedetect::KernelSpec::sobel());
  const auto roberts = edgedetect::build_kernel_graph(edgedetect::KernelSpec::roberts());
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> dim(3, 64);
  const int images = 120;
  for (int t = 0; t < images; ++t) {
    const auto p = testing::random_plane(rng, dim(rng), dim(rng));
    const auto img = to_image(p);
    const auto where = "image " + std::to_string(t) + " " + std::to_string(p.w) + "x" + std::to_string(p.h);
    const auto s = edgedetect::run_graph(sobel, img);
    const auto r = edgedetect::run_graph(roberts, img);
    c.expect(s == edgedetect::oracle_edge_detect(img, edgedetect::KernelSpec::sobel()), where + ": sobel graph");
    c.expect(r == edgedetect::oracle_edge_detect(img, edgedetect::KernelSpec::roberts()), where + ": roberts graph");
    c.expect(s.data == testing::naive_edges(p, 3, 3, 80).px, where + ": sobel vs naive filter");
    c.expect(r.data == testing::naive_edges(p, 2, 0, 80).px, where + ": roberts vs naive filter");
  }
  for (int v : {0, 1, 128, 255}) {
    const edgedetect::Image flat(64, 64, static_cast<std::uint8_t>(v));
    c.expect(edgedetect::run_graph(sobel, flat) == edgedetect::Image(64, 64, 0), "constant sobel not zero");
    c.expect(edgedetect::run_graph(roberts, flat) == edgedetect::Image(64, 64, 0), "constant roberts not zero");
  }
  // Roberts with n = 0: a lone corner pixel v gives |v| + |0| = v at (0, 0).
  edgedetect::Image at(2, 2, 0);
  at.at(0, 0) = 80;
  c.expect(edgedetect::run_graph(roberts, at).at(0, 0) == 0, "magnitude equal to the threshold marked as edge");
  at.at(0, 0) = 81;
  c.expect(edgedetect::run_graph(roberts, at).at(0, 0) == 255, "magnitude above the threshold not marked");
  // Sobel with n = 3: a centred column step of height k gives (4k) >> 3 at the centre.
  edgedetect::Image step(3, 3, 0);
  for (int r = 0; r < 3; ++r) step.at(r, 2) = 160;
  c.expect(edgedetect::run_graph(sobel, step).at(1, 1) == 0, "sobel magnitude equal to the threshold marked");
  c.note = std::to_string(images) + " random images up to 64x64";
}

void counter_hygiene(Checker &c) {
  for (unsigned seed = 1; seed <= 8; ++seed) {
    device::VrcDevice d(edge_merge(), {.fu_monitors = true});
    const auto tag = "seed " + std::to_string(seed);
    for (std::uint32_t off = d.monitor_window_offset(); off < d.register_count(); ++off) {
      c.expect(d.reg_read(off) == 0, tag + ": counter nonzero after reset");
    }
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dim(3, 32);
    std::uniform_int_distribution<int> step(1, 200);
    const auto catalog = d.event_catalog();
    for (int run = 0; run < 3; ++run) {
      const auto img = to_image(testing::random_plane(rng, dim(rng), dim(rng)));
      if (d.state() == device::State::Done) {
        // A finished run is restarted only after CLEAR, which zeroes the window.
        d.reg_write(device::kRegControl, device::kCtrlClear);
        for (std::uint32_t off = d.monitor_window_offset(); off < d.register_count(); ++off) {
          c.expect(d.reg_read(off) == 0, tag + ": counter nonzero after clear");
        }
      }
      std::vector<std::uint64_t> last(catalog.size(), 0);
      start_block(d, 1 + run % 2, img);
      while (d.state() == device::State::Running) {
        d.tick(static_cast<std::uint64_t>(step(rng)));
        for (std::size_t i = 0; i < catalog.size(); ++i) {
          const auto v = read64(d, catalog[i].index);
          c.expect(v >= last[i], tag + ": " + catalog[i].name + " decreased");
          last[i] = v;
        }
      }
      c.expect(last[0] == d.last_run_cycles(), tag + ": clock differs from the run length");
    }
    for (std::uint32_t off = d.monitor_window_offset(); off < d.register_count(); ++off) {
      const auto before = d.reg_read(off);
      bool rejected = false;
      try {
        d.reg_write(off, 0);
      } catch (const Error &e) {
        rejected = e.code() == Errc::ReadOnlyRegister;
      }
      c.expect(rejected, tag + ": window write at offset " + std::to_string(off) + " accepted");
      c.expect(d.reg_read(off) == before, tag + ": window write changed a counter");
    }
  }
  c.note = "8 devices with firing monitors";
}

struct Criterion {
  const char *name;
  std::function<void(Checker &)> run;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1 merged-network functional equivalence", merged_equivalence},
      {"C2 datapath sharing", sharing},
      {"C3 assessment accounting", assessment_accounting},
      {"C4 monitor exactness", monitor_exactness},
      {"C5 mdcInfo round trip", mdc_round_trip},
      {"C6 monitoring non-intrusiveness", non_intrusive},
      {"C7 graph/oracle equivalence", oracle_equivalence},
      {"C8 counter hygiene", counter_hygiene},
  };
  int failed = 0;
  for (const auto &cr : criteria) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception &e) {
      ++c.failures;
      if (c.first.empty()) c.first = std::string("exception: ") + e.what();
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    if (c.failures == 0) {
      std::cout << "PASS " << cr.name << " [" << c.checks << " checks, " << ms << " ms] " << c.note << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << cr.name << " [" << c.failures << "/" << c.checks << " checks failed] " << c.first
                << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
