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

#include "vrcmon/device/vrc_device.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vrcmon::driver {

using Words = std::vector<std::int32_t>;

struct DriverPort {
  std::string name;
  dataflow::Direction direction = dataflow::Direction::In;
  int token_width = 32;
  std::uint32_t size_register = 0;
  std::size_t memory_offset = 0;
  std::size_t region_words = 0;

  bool operator==(const DriverPort &) const = default;
};

/// Everything needed to drive one configuration, in the order of the
/// generated C signature (merged port declaration order).
struct DriverDescriptor {
  std::string config_name;
  int config_id = 0;
  std::uint32_t base_address = 0;
  std::vector<DriverPort> ports;

  bool operator==(const DriverDescriptor &) const = default;
  const DriverPort *find(std::string_view port) const;
};

/// One descriptor per configuration, ordered by configuration id.
std::vector<DriverDescriptor> generate_drivers(const merge::MergeResult &merged,
                                               std::uint32_t base_address = device::kDefaultBaseAddress,
                                               std::size_t memory_words = device::kDefaultMemoryWords);
std::vector<DriverDescriptor> generate_drivers(const device::VrcDevice &device);

/// Finds the descriptor of a configuration by name; throws UnknownConfig.
const DriverDescriptor &find_driver(const std::vector<DriverDescriptor> &drivers,
                                    std::string_view config_name);

struct BusOp {
  enum class Kind { RegWrite, RegRead, MemWrite, MemRead };
  Kind kind;
  std::uint64_t offset;
  /// Register value, or word count for memory operations.
  std::uint64_t value;
  std::string port;
};

std::string_view to_string(BusOp::Kind k);

/// Record of one invoke: every bus operation and the words moved per port.
struct TransactionLog {
  std::string config_name;
  std::vector<BusOp> ops;
  std::map<std::string, std::uint64_t> port_words;
  std::uint64_t input_words = 0;
  std::uint64_t output_words = 0;
  std::uint64_t polls = 0;
  std::uint64_t cycles = 0;

  /// One JSON object per line: the operations, then a summary line.
  std::string to_json_lines() const;
};

struct InvokeOptions {
  /// Engine steps the device advances between two reads of the status register.
  std::uint64_t steps_per_poll = 256;
};

struct InvokeResult {
  std::map<std::string, Words> outputs;
  TransactionLog log;
};

/// Runs one configuration: clears a Done device, writes the size registers,
/// copies the inputs into local memory, writes config_id, starts, polls the
/// done bit and reads the outputs back.
///
/// Errors: SizeMismatch (an input or output size missing, an unknown port,
/// or more words than the port region holds); ValueRange (a word outside the
/// port's declared width); BaseAddressMismatch; device errors propagate.
InvokeResult invoke(device::VrcDevice &device, const DriverDescriptor &descriptor,
                    const std::map<std::string, Words> &inputs,
                    const std::map<std::string, std::size_t> &output_sizes,
                    const InvokeOptions &options = {});

/// mdcInfo configuration file for the monitoring component.
std::string emit_mdc_info(std::uint32_t base_address,
                          const std::vector<device::MonitorEvent> &catalog);
std::string emit_mdc_info(const device::VrcDevice &device);

/// "0x" followed by lowercase hex digits.
std::string format_address(std::uint32_t address);

} // namespace vrcmon::driver
