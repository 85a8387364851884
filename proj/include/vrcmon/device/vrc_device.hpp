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

#include "vrcmon/device/engine.hpp"
#include "vrcmon/merge/merger.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace vrcmon::device {

inline constexpr std::uint32_t kDefaultBaseAddress = 0x43c00000;
inline constexpr std::size_t kDefaultMemoryWords = 64 * 1024;

// Register map, word offsets from the base address. See docs/register-map.md.
inline constexpr std::uint32_t kRegControl = 0;
inline constexpr std::uint32_t kRegStatus = 1;
inline constexpr std::uint32_t kRegConfigId = 2;
inline constexpr std::uint32_t kRegFirstSize = 3;

inline constexpr std::uint32_t kCtrlStart = 1u << 0;
inline constexpr std::uint32_t kCtrlClear = 1u << 1;
inline constexpr std::uint32_t kStatusDone = 1u << 0;
inline constexpr std::uint32_t kStatusError = 1u << 1;

// Word offsets inside the monitor window.
inline constexpr std::uint32_t kMonClock = 0;
inline constexpr std::uint32_t kMonInputTokens = 2;
inline constexpr std::uint32_t kMonOutputTokens = 4;
inline constexpr std::uint32_t kMonFirstFu = 6;

enum class State { Idle, Running, Done };

std::string_view to_string(State s);

struct DeviceOptions {
  std::uint32_t base_address = kDefaultBaseAddress;
  std::size_t memory_words = kDefaultMemoryWords;
  /// Adds one firing counter per functional unit to the monitor window.
  bool fu_monitors = false;
  /// Steps after which a run fails with Timeout.
  std::uint64_t cycle_budget = 50'000'000;
};

/// One readable counter of the monitor window. `index` is the word offset of
/// its low half inside the window.
struct MonitorEvent {
  std::uint32_t index = 0;
  std::string name;
  std::string description;

  bool operator==(const MonitorEvent &) const = default;
};

/// Simulated memory-mapped coprocessor running a merged network.
///
/// Not thread-safe; callers serialize access.
class VrcDevice {
public:
  /// Throws InvalidArgument for a base address that is not word aligned or
  /// a memory too small to give every port one word.
  VrcDevice(merge::MergeResult merged, DeviceOptions options = {});
  ~VrcDevice();
  VrcDevice(VrcDevice &&) noexcept;
  VrcDevice &operator=(VrcDevice &&) noexcept;

  /// Errors: OutOfRange; ReadOnlyRegister (status, monitor window);
  /// BadState (start outside Idle, clear or size/config writes while
  /// Running); UnknownConfig (start with an unknown config_id).
  void reg_write(std::uint32_t offset, std::uint32_t value);
  /// Errors: OutOfRange.
  std::uint32_t reg_read(std::uint32_t offset) const;

  /// Errors: OutOfRange; BadState while Running.
  void mem_write(std::size_t offset, const std::vector<std::int32_t> &words);
  std::vector<std::int32_t> mem_read(std::size_t offset, std::size_t count) const;

  /// Advances a running device by at most `steps` engine steps. A device
  /// that is not Running ignores the call.
  void tick(std::uint64_t steps = 1);
  /// Runs until Done and returns the clock cycles of this run.
  /// Errors: BadState unless Running; Deadlock; Timeout. On error the device
  /// is Done with the error bit set.
  std::uint64_t run_to_completion();

  State state() const;
  std::uint32_t base_address() const;
  std::size_t memory_words() const;
  const merge::MergeResult &merged() const;

  /// Word offset of the first size register of `port` (merged port order).
  std::uint32_t size_register(const std::string &port) const;
  /// Start and length of a port's local memory region.
  std::size_t region_offset(const std::string &port) const;
  std::size_t region_words() const;

  std::uint32_t monitor_window_offset() const;
  std::uint32_t register_count() const;
  /// Accelerator-level events followed by per-FU firing counters when enabled.
  std::vector<MonitorEvent> event_catalog() const;
  /// Functional units covered by the firing counters, in graph order.
  std::vector<std::string> monitored_units() const;

  /// Cycle count of the last completed run.
  std::uint64_t last_run_cycles() const;
  /// Diagnostic of the last failed run, empty otherwise.
  const std::string &last_error() const;

  std::uint64_t clock_cycles() const;
  std::uint64_t input_tokens() const;
  std::uint64_t output_tokens() const;
  std::uint64_t fu_firings(const std::string &actor) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace vrcmon::device
