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

#include "vrcmon/driver/driver.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/common/xml.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace vrcmon::driver {

const DriverPort *DriverDescriptor::find(std::string_view port) const {
  for (const auto &p : ports) {
    if (p.name == port) return &p;
  }
  return nullptr;
}

std::vector<DriverDescriptor> generate_drivers(const merge::MergeResult &merged,
                                               std::uint32_t base_address,
                                               std::size_t memory_words) {
  const auto &graph = merged.network.graph;
  const std::size_t region = graph.ports.empty() ? 0 : memory_words / graph.ports.size();
  std::vector<DriverDescriptor> out;
  for (const auto &[id, row] : merged.table.rows) {
    DriverDescriptor d;
    d.config_id = id;
    d.config_name = merged.network.config_name(id);
    d.base_address = base_address;
    const auto &active = merged.table.port_map.at(id);
    for (std::size_t i = 0; i < graph.ports.size(); ++i) {
      const auto &p = graph.ports[i];
      if (std::find(active.begin(), active.end(), p.name) == active.end()) continue;
      d.ports.push_back({p.name, p.direction, p.token_width,
                         device::kRegFirstSize + static_cast<std::uint32_t>(i), i * region, region});
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DriverDescriptor> generate_drivers(const device::VrcDevice &device) {
  return generate_drivers(device.merged(), device.base_address(), device.memory_words());
}

const DriverDescriptor &find_driver(const std::vector<DriverDescriptor> &drivers,
                                    std::string_view config_name) {
  for (const auto &d : drivers) {
    if (d.config_name == config_name) return d;
  }
  throw Error(Errc::UnknownConfig, "no configuration named '" + std::string(config_name) + "'");
}

std::string_view to_string(BusOp::Kind k) {
  switch (k) {
  case BusOp::Kind::RegWrite: return "reg_write";
  case BusOp::Kind::RegRead: return "reg_read";
  case BusOp::Kind::MemWrite: return "mem_write";
  case BusOp::Kind::MemRead: return "mem_read";
  }
  return "unknown";
}

std::string TransactionLog::to_json_lines() const {
  std::ostringstream out;
  for (const auto &op : ops) {
    nlohmann::json j{{"op", to_string(op.kind)}, {"offset", op.offset}, {"value", op.value}};
    if (!op.port.empty()) j["port"] = op.port;
    out << j.dump() << "\n";
  }
  nlohmann::json summary{{"config", config_name}, {"input_words", input_words},
                         {"output_words", output_words}, {"polls", polls},
                         {"cycles", cycles}, {"port_words", port_words}};
  out << summary.dump() << "\n";
  return out.str();
}

namespace {

void check_range(const DriverPort &p, const Words &words) {
  if (p.token_width >= 32) return;
  const std::int64_t lo = -(std::int64_t{1} << (p.token_width - 1));
  const std::int64_t hi = (std::int64_t{1} << p.token_width) - 1;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] < lo || words[i] > hi) {
      throw Error(Errc::ValueRange, "word " + std::to_string(i) + " of port '" + p.name + "' (" +
                                        std::to_string(words[i]) + ") does not fit " +
                                        std::to_string(p.token_width) + " bits");
    }
  }
}

/// Device access that records every operation in the log.
class Bus {
public:
  Bus(device::VrcDevice &d, TransactionLog &log) : d_(d), log_(log) {}

  void write(std::uint32_t offset, std::uint32_t value, const std::string &port = {}) {
    d_.reg_write(offset, value);
    log_.ops.push_back({BusOp::Kind::RegWrite, offset, value, port});
  }
  std::uint32_t read(std::uint32_t offset) {
    const auto v = d_.reg_read(offset);
    log_.ops.push_back({BusOp::Kind::RegRead, offset, v, {}});
    return v;
  }
  void send(std::size_t offset, const Words &words, const std::string &port) {
    d_.mem_write(offset, words);
    log_.ops.push_back({BusOp::Kind::MemWrite, offset, words.size(), port});
  }
  Words receive(std::size_t offset, std::size_t count, const std::string &port) {
    auto w = d_.mem_read(offset, count);
    log_.ops.push_back({BusOp::Kind::MemRead, offset, count, port});
    return w;
  }

private:
  device::VrcDevice &d_;
  TransactionLog &log_;
};

} // namespace

InvokeResult invoke(device::VrcDevice &device, const DriverDescriptor &descriptor,
                    const std::map<std::string, Words> &inputs,
                    const std::map<std::string, std::size_t> &output_sizes,
                    const InvokeOptions &options) {
  if (descriptor.base_address != device.base_address()) {
    throw Error(Errc::BaseAddressMismatch, "descriptor for " + format_address(descriptor.base_address) +
                                               " used on device at " +
                                               format_address(device.base_address()));
  }
  for (const auto &[name, words] : inputs) {
    const auto *p = descriptor.find(name);
    if (p == nullptr || p->direction != dataflow::Direction::In) {
      throw Error(Errc::SizeMismatch, "'" + name + "' is not an input of " + descriptor.config_name);
    }
  }
  for (const auto &[name, size] : output_sizes) {
    const auto *p = descriptor.find(name);
    if (p == nullptr || p->direction != dataflow::Direction::Out) {
      throw Error(Errc::SizeMismatch, "'" + name + "' is not an output of " + descriptor.config_name);
    }
  }
  std::vector<std::size_t> sizes;
  for (const auto &p : descriptor.ports) {
    std::size_t n = 0;
    if (p.direction == dataflow::Direction::In) {
      auto it = inputs.find(p.name);
      if (it == inputs.end()) throw Error(Errc::SizeMismatch, "missing input port '" + p.name + "'");
      check_range(p, it->second);
      n = it->second.size();
    } else {
      auto it = output_sizes.find(p.name);
      if (it == output_sizes.end()) {
        throw Error(Errc::SizeMismatch, "missing size for output port '" + p.name + "'");
      }
      n = it->second;
    }
    if (n > p.region_words) {
      throw Error(Errc::SizeMismatch, "port '" + p.name + "' needs " + std::to_string(n) +
                                          " words, its region holds " + std::to_string(p.region_words));
    }
    sizes.push_back(n);
  }

  InvokeResult result;
  auto &log = result.log;
  log.config_name = descriptor.config_name;
  Bus bus(device, log);

  if (device.state() == device::State::Done) bus.write(device::kRegControl, device::kCtrlClear);
  for (std::size_t i = 0; i < descriptor.ports.size(); ++i) {
    const auto &p = descriptor.ports[i];
    bus.write(p.size_register, static_cast<std::uint32_t>(sizes[i]), p.name);
  }
  for (const auto &p : descriptor.ports) {
    if (p.direction != dataflow::Direction::In) continue;
    const auto &words = inputs.at(p.name);
    bus.send(p.memory_offset, words, p.name);
    log.port_words[p.name] = words.size();
    log.input_words += words.size();
  }
  bus.write(device::kRegConfigId, static_cast<std::uint32_t>(descriptor.config_id));
  bus.write(device::kRegControl, device::kCtrlStart);
  while ((bus.read(device::kRegStatus) & device::kStatusDone) == 0) {
    device.tick(options.steps_per_poll);
    ++log.polls;
  }
  log.cycles = device.last_run_cycles();
  for (std::size_t i = 0; i < descriptor.ports.size(); ++i) {
    const auto &p = descriptor.ports[i];
    if (p.direction != dataflow::Direction::Out) continue;
    result.outputs[p.name] = bus.receive(p.memory_offset, sizes[i], p.name);
    log.port_words[p.name] = sizes[i];
    log.output_words += sizes[i];
  }
  return result;
}

std::string format_address(std::uint32_t address) {
  std::ostringstream out;
  out << "0x" << std::hex << std::nouppercase << address;
  return out.str();
}

std::string emit_mdc_info(std::uint32_t base_address,
                          const std::vector<device::MonitorEvent> &catalog) {
  std::ostringstream out;
  out << "<mdcInfo>\n";
  out << "  <baseAddress>" << format_address(base_address) << "</baseAddress>\n";
  out << "  <nbEvents>" << catalog.size() << "</nbEvents>\n";
  for (const auto &e : catalog) {
    out << "  <event>\n";
    out << "    <index>" << e.index << "</index>\n";
    out << "    <name>" << xml::escape(e.name) << "</name>\n";
    out << "    <desc>" << xml::escape(e.description) << "</desc>\n";
    out << "  </event>\n";
  }
  out << "</mdcInfo>\n";
  return out.str();
}

std::string emit_mdc_info(const device::VrcDevice &device) {
  return emit_mdc_info(device.base_address(), device.event_catalog());
}

} // namespace vrcmon::driver
