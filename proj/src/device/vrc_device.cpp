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

#include "vrcmon/device/vrc_device.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/kinds.hpp"

#include <algorithm>

namespace vrcmon::device {

std::string_view to_string(State s) {
  switch (s) {
  case State::Idle: return "Idle";
  case State::Running: return "Running";
  case State::Done: return "Done";
  }
  return "Unknown";
}

struct VrcDevice::Impl {
  merge::MergeResult merged;
  DeviceOptions options;
  std::vector<std::string> ports;
  std::vector<std::string> units;
  std::vector<std::size_t> unit_actor_index;

  State state = State::Idle;
  bool error = false;
  std::string last_error;
  std::uint32_t config_id = 0;
  std::vector<std::uint32_t> sizes;
  std::vector<std::int32_t> memory;

  std::unique_ptr<Engine> engine;
  std::uint64_t run_start_cycles = 0;
  std::uint64_t run_start_in = 0;
  std::uint64_t run_start_out = 0;
  std::vector<std::uint64_t> run_start_firings;
  std::vector<std::size_t> written;

  std::uint64_t clock = 0;
  std::uint64_t in_tokens = 0;
  std::uint64_t out_tokens = 0;
  std::vector<std::uint64_t> firings;
  std::uint64_t last_run = 0;

  std::uint32_t monitor_base() const { return kRegFirstSize + static_cast<std::uint32_t>(ports.size()); }
  std::uint32_t window_words() const {
    return kMonFirstFu + 2 * static_cast<std::uint32_t>(units.size());
  }
  std::size_t region_words() const { return options.memory_words / ports.size(); }

  std::size_t port_index(const std::string &name) const {
    auto it = std::find(ports.begin(), ports.end(), name);
    if (it == ports.end()) throw Error(Errc::OutOfRange, "no port '" + name + "'");
    return static_cast<std::size_t>(it - ports.begin());
  }

  void clear_counters() {
    clock = in_tokens = out_tokens = 0;
    std::fill(firings.begin(), firings.end(), 0);
  }

  void start() {
    if (state != State::Idle) {
      throw Error(Errc::BadState, std::string("start while ") + std::string(to_string(state)));
    }
    const auto id = static_cast<int>(config_id);
    const auto row = merge::select_config(merged.table, id);
    const auto &active = merged.table.port_map.at(id);
    for (std::size_t i = 0; i < ports.size(); ++i) {
      if (sizes[i] > region_words()) {
        throw Error(Errc::OutOfRange, "size of port '" + ports[i] + "' exceeds its " +
                                          std::to_string(region_words()) + "-word region");
      }
    }
    engine = std::make_unique<Engine>(merged.network.graph, row);
    const auto &graph = merged.network.graph;
    for (const auto &name : active) {
      const auto i = port_index(name);
      const auto base = i * region_words();
      if (graph.find_port(name)->direction == dataflow::Direction::In) {
        engine->inject(name, std::vector<std::int32_t>(memory.begin() + static_cast<std::ptrdiff_t>(base),
                                                       memory.begin() + static_cast<std::ptrdiff_t>(base + sizes[i])));
      } else {
        engine->expect(name, sizes[i]);
      }
    }
    written.assign(ports.size(), 0);
    run_start_cycles = clock;
    run_start_in = in_tokens;
    run_start_out = out_tokens;
    run_start_firings = firings;
    error = false;
    last_error.clear();
    state = State::Running;
    if (engine->complete()) finish();
  }

  void sync_counters() {
    clock = run_start_cycles + engine->cycles();
    in_tokens = run_start_in + engine->input_tokens();
    out_tokens = run_start_out + engine->output_tokens();
    for (std::size_t u = 0; u < units.size(); ++u) {
      firings[u] = run_start_firings[u] + engine->firings()[unit_actor_index[u]];
    }
    for (const auto &[name, words] : engine->outputs()) {
      const auto i = port_index(name);
      const auto base = i * region_words();
      for (auto &k = written[i]; k < words.size(); ++k) memory[base + k] = words[k];
    }
  }

  void finish() {
    sync_counters();
    last_run = engine->cycles();
    engine.reset();
    state = State::Done;
  }

  void fail(const Error &e) {
    sync_counters();
    last_error = e.what();
    engine.reset();
    error = true;
    state = State::Done;
  }

  void advance(std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps && state == State::Running; ++s) {
      if (engine->cycles() >= options.cycle_budget) {
        const Error e(Errc::Timeout, "run exceeded the budget of " +
                                         std::to_string(options.cycle_budget) + " cycles");
        fail(e);
        throw e;
      }
      if (!engine->step()) {
        const Error e(Errc::Deadlock, "configuration " + std::to_string(config_id) +
                                          " stalled at cycle " + std::to_string(engine->cycles()) +
                                          ":\n" + engine->describe_stall());
        fail(e);
        throw e;
      }
      if (engine->complete()) {
        finish();
        return;
      }
    }
    if (state == State::Running) sync_counters();
  }
};

VrcDevice::VrcDevice(merge::MergeResult merged, DeviceOptions options)
    : impl_(std::make_unique<Impl>()) {
  auto &im = *impl_;
  if (options.base_address % 4 != 0) {
    throw Error(Errc::InvalidArgument, "base address must be word aligned");
  }
  im.merged = std::move(merged);
  im.options = options;
  const auto &graph = im.merged.network.graph;
  for (const auto &p : graph.ports) im.ports.push_back(p.name);
  if (im.ports.empty() || options.memory_words < im.ports.size()) {
    throw Error(Errc::InvalidArgument, "local memory too small for the port count");
  }
  if (options.fu_monitors) {
    for (std::size_t i = 0; i < graph.actors.size(); ++i) {
      if (dataflow::is_sbox(graph.actors[i])) continue;
      im.units.push_back(graph.actors[i].name);
      im.unit_actor_index.push_back(i);
    }
  }
  im.firings.assign(im.units.size(), 0);
  im.sizes.assign(im.ports.size(), 0);
  im.memory.assign(options.memory_words, 0);
}

VrcDevice::~VrcDevice() = default;
VrcDevice::VrcDevice(VrcDevice &&) noexcept = default;
VrcDevice &VrcDevice::operator=(VrcDevice &&) noexcept = default;

void VrcDevice::reg_write(std::uint32_t offset, std::uint32_t value) {
  auto &im = *impl_;
  if (offset >= register_count()) {
    throw Error(Errc::OutOfRange, "register offset " + std::to_string(offset));
  }
  if (offset == kRegStatus || offset >= im.monitor_base()) {
    throw Error(Errc::ReadOnlyRegister, "register offset " + std::to_string(offset));
  }
  if (offset == kRegControl) {
    if (value & kCtrlClear) {
      if (im.state == State::Running) throw Error(Errc::BadState, "clear while Running");
      im.state = State::Idle;
      im.error = false;
      im.clear_counters();
    }
    if (value & kCtrlStart) im.start();
    return;
  }
  if (im.state == State::Running) {
    throw Error(Errc::BadState, "configuration write while Running");
  }
  if (offset == kRegConfigId) {
    im.config_id = value;
  } else {
    im.sizes[offset - kRegFirstSize] = value;
  }
}

std::uint32_t VrcDevice::reg_read(std::uint32_t offset) const {
  const auto &im = *impl_;
  if (offset >= register_count()) {
    throw Error(Errc::OutOfRange, "register offset " + std::to_string(offset));
  }
  if (offset == kRegControl) return 0;
  if (offset == kRegStatus) {
    return (im.state == State::Done ? kStatusDone : 0) | (im.error ? kStatusError : 0);
  }
  if (offset == kRegConfigId) return im.config_id;
  if (offset < im.monitor_base()) return im.sizes[offset - kRegFirstSize];

  const auto w = offset - im.monitor_base();
  std::uint64_t counter = 0;
  if (w < kMonInputTokens) {
    counter = im.clock;
  } else if (w < kMonOutputTokens) {
    counter = im.in_tokens;
  } else if (w < kMonFirstFu) {
    counter = im.out_tokens;
  } else {
    counter = im.firings[(w - kMonFirstFu) / 2];
  }
  return static_cast<std::uint32_t>(w % 2 == 0 ? counter : counter >> 32);
}

void VrcDevice::mem_write(std::size_t offset, const std::vector<std::int32_t> &words) {
  auto &im = *impl_;
  if (im.state == State::Running) throw Error(Errc::BadState, "memory write while Running");
  if (offset > im.memory.size() || words.size() > im.memory.size() - offset) {
    throw Error(Errc::OutOfRange, "memory write of " + std::to_string(words.size()) +
                                      " words at " + std::to_string(offset));
  }
  std::copy(words.begin(), words.end(), im.memory.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::vector<std::int32_t> VrcDevice::mem_read(std::size_t offset, std::size_t count) const {
  const auto &im = *impl_;
  if (im.state == State::Running) throw Error(Errc::BadState, "memory read while Running");
  if (offset > im.memory.size() || count > im.memory.size() - offset) {
    throw Error(Errc::OutOfRange, "memory read of " + std::to_string(count) + " words at " +
                                      std::to_string(offset));
  }
  const auto first = im.memory.begin() + static_cast<std::ptrdiff_t>(offset);
  return {first, first + static_cast<std::ptrdiff_t>(count)};
}

void VrcDevice::tick(std::uint64_t steps) {
  if (impl_->state == State::Running) impl_->advance(steps);
}

std::uint64_t VrcDevice::run_to_completion() {
  auto &im = *impl_;
  if (im.state != State::Running) {
    throw Error(Errc::BadState, std::string("run while ") + std::string(to_string(im.state)));
  }
  while (im.state == State::Running) im.advance(UINT64_MAX);
  return im.last_run;
}

State VrcDevice::state() const { return impl_->state; }
std::uint32_t VrcDevice::base_address() const { return impl_->options.base_address; }
std::size_t VrcDevice::memory_words() const { return impl_->options.memory_words; }
const merge::MergeResult &VrcDevice::merged() const { return impl_->merged; }

std::uint32_t VrcDevice::size_register(const std::string &port) const {
  return kRegFirstSize + static_cast<std::uint32_t>(impl_->port_index(port));
}

std::size_t VrcDevice::region_offset(const std::string &port) const {
  return impl_->port_index(port) * impl_->region_words();
}

std::size_t VrcDevice::region_words() const { return impl_->region_words(); }

std::uint32_t VrcDevice::monitor_window_offset() const { return impl_->monitor_base(); }

std::uint32_t VrcDevice::register_count() const {
  return impl_->monitor_base() + impl_->window_words();
}

std::vector<MonitorEvent> VrcDevice::event_catalog() const {
  std::vector<MonitorEvent> events{
      {kMonClock, "MDC_CLOCK_CYCLE", "Clock cycles spent by the accelerator"},
      {kMonInputTokens, "MDC_INPUT_TOKENS", "Tokens read from the input ports"},
      {kMonOutputTokens, "MDC_OUTPUT_TOKENS", "Tokens written to the output ports"},
  };
  for (std::size_t u = 0; u < impl_->units.size(); ++u) {
    events.push_back({kMonFirstFu + 2 * static_cast<std::uint32_t>(u),
                      "MDC_FIRINGS_" + impl_->units[u],
                      "Firings of functional unit " + impl_->units[u]});
  }
  return events;
}

std::vector<std::string> VrcDevice::monitored_units() const { return impl_->units; }
std::uint64_t VrcDevice::last_run_cycles() const { return impl_->last_run; }
const std::string &VrcDevice::last_error() const { return impl_->last_error; }
std::uint64_t VrcDevice::clock_cycles() const { return impl_->clock; }
std::uint64_t VrcDevice::input_tokens() const { return impl_->in_tokens; }
std::uint64_t VrcDevice::output_tokens() const { return impl_->out_tokens; }

std::uint64_t VrcDevice::fu_firings(const std::string &actor) const {
  const auto &units = impl_->units;
  auto it = std::find(units.begin(), units.end(), actor);
  if (it == units.end()) throw Error(Errc::OutOfRange, "no firing counter for '" + actor + "'");
  return impl_->firings[static_cast<std::size_t>(it - units.begin())];
}

} // namespace vrcmon::device
