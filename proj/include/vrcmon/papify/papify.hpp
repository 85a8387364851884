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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vrcmon::papify {

struct EventInfo {
  int index = 0;
  std::string name;
  std::string description;

  bool operator==(const EventInfo &) const = default;
};

/// A named counter backend. Reads are pure; `on_start` runs once per
/// event_start on a PE bound to this component.
class Component {
public:
  virtual ~Component() = default;

  const std::string &name() const { return name_; }
  const std::vector<EventInfo> &events() const { return events_; }
  const EventInfo *find(std::string_view event) const;

  /// Current value of `event` as seen from `core_name`.
  virtual std::uint64_t read(const EventInfo &event, const std::string &core_name) const = 0;
  virtual void on_start(const std::string & /*core_name*/) {}

protected:
  Component(std::string name, std::vector<EventInfo> events);

private:
  std::string name_;
  std::vector<EventInfo> events_;
};

using Clock = std::function<std::uint64_t()>;

/// Nanoseconds from std::chrono::steady_clock.
std::uint64_t steady_ns();

inline constexpr std::string_view kSoftwareComponent = "perf_event";
inline constexpr std::string_view kTotalCycles = "PAPI_TOT_CYC";
inline constexpr std::string_view kTotalInstructions = "PAPI_TOT_INS";

/// Synthetic core counters: PAPI_TOT_CYC is the clock in nanoseconds,
/// PAPI_TOT_INS counts the work units each core reported.
class SoftwareCoreComponent final : public Component {
public:
  explicit SoftwareCoreComponent(Clock clock = steady_ns);

  void add_work(const std::string &core_name, std::uint64_t units);
  std::uint64_t read(const EventInfo &event, const std::string &core_name) const override;

private:
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::uint64_t> work_;
};

inline constexpr std::string_view kMdcComponent = "mdc";

/// Reads 64-bit counters from a device monitor window; an event's index is
/// the word offset of its low half inside the window.
class MdcComponent final : public Component {
public:
  MdcComponent(device::VrcDevice &device, std::vector<EventInfo> events);

  std::uint32_t base_address() const;
  std::uint64_t read(const EventInfo &event, const std::string &core_name) const override;
  /// Resets the counters unless a run is in flight.
  void on_start(const std::string &core_name) override;

private:
  device::VrcDevice &device_;
};

/// Builds the MDC component from an mdcInfo document.
///
/// Errors: SchemaViolation (malformed XML, missing or non-numeric fields,
/// duplicate names, an index outside the device monitor window);
/// BaseAddressMismatch; CountMismatch (nbEvents differs from the number of
/// event elements).
std::unique_ptr<MdcComponent> load_mdc_component(std::string_view xml_text,
                                                 device::VrcDevice &device);

struct PeBinding {
  std::string core_name;
  std::string component;
  int pe_id = 0;

  bool operator==(const PeBinding &) const = default;
};

struct TraceRecord {
  int pe_id = 0;
  std::string core_name;
  std::string actor;
  std::uint64_t t_start = 0;
  std::uint64_t t_stop = 0;
  /// Aligned with the action's event names; empty when the PE's component
  /// does not provide the event.
  std::vector<std::optional<std::uint64_t>> values;
};

/// Monitoring handle of one actor.
class PapifyAction {
public:
  const std::string &actor() const { return actor_; }
  const std::vector<std::string> &components() const { return components_; }
  const std::vector<std::string> &event_names() const { return events_; }
  /// Stored only; configurations do not change what is measured.
  const std::vector<int> &config_ids() const { return config_ids_; }
  int num_configs() const { return num_configs_; }
  std::vector<TraceRecord> records() const;

private:
  friend class EventLib;
  struct Snapshot {
    std::uint64_t t = 0;
    std::vector<std::optional<std::uint64_t>> values;
  };

  std::string actor_;
  std::vector<std::string> components_;
  std::vector<std::string> events_;
  std::vector<int> config_ids_;
  int num_configs_ = 1;
  std::map<int, Snapshot> in_flight_;
  std::vector<TraceRecord> records_;
};

/// The eventLib surface: PE and actor configuration, start/stop around a
/// firing, and the trace sink with CSV persistence.
class EventLib {
public:
  explicit EventLib(Clock clock = steady_ns);
  EventLib(const EventLib &) = delete;
  EventLib &operator=(const EventLib &) = delete;

  /// Errors: InvalidArgument for a name already registered.
  void register_component(std::shared_ptr<Component> component);
  Component *component(std::string_view name) const;

  /// Errors: UnknownComponent; DuplicatePe when pe_id or core_name is
  /// already bound differently.
  const PeBinding &configure_papify_PE(const std::string &core_name,
                                       const std::string &component, int pe_id);

  /// Errors: UnknownComponent; UnknownEvent; InvalidArgument when the actor
  /// is already configured with different settings.
  PapifyAction &configure_papify_actor(const std::string &actor,
                                       const std::vector<std::string> &components,
                                       const std::vector<std::string> &event_names,
                                       const std::vector<int> &config_ids = {},
                                       int num_configs = 1);

  /// Errors: UnboundPe; UnbalancedStart.
  void event_start(PapifyAction &action, int pe_id);
  /// Errors: UnboundPe; UnbalancedStop.
  TraceRecord event_stop(PapifyAction &action, int pe_id);

  /// All records in monitoring order.
  std::vector<TraceRecord> trace() const;
  std::size_t record_count() const;
  std::size_t event_set_count() const;
  std::vector<PeBinding> bindings() const;
  const PapifyAction *action(std::string_view actor) const;
  PapifyAction *action(std::string_view actor);

  /// Writes `<prefix>/papify-output/<actor>.csv` for every configured actor.
  /// Errors: IoError.
  std::vector<std::filesystem::path> flush_csv(const std::filesystem::path &prefix) const;

  /// Drops recorded traces and in-flight starts; configuration is kept.
  void clear();
  /// Drops everything except the registered components.
  void shutdown();

private:
  std::vector<std::optional<std::uint64_t>> sample(const PapifyAction &action,
                                                   const PeBinding &pe) const;
  const PeBinding &bound(int pe_id) const;

  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Component>, std::less<>> components_;
  std::map<int, PeBinding> pes_;
  std::map<std::string, std::unique_ptr<PapifyAction>, std::less<>> actions_;
  std::vector<TraceRecord> sink_;
};

/// One parsed CSV trace file.
struct CsvTrace {
  std::string actor;
  std::vector<std::string> event_names;
  struct Row {
    std::string pe;
    std::string actor;
    std::uint64_t t_start = 0;
    std::uint64_t t_stop = 0;
    std::vector<std::optional<std::uint64_t>> values;
  };
  std::vector<Row> rows;
};

/// Errors: IoError; SchemaViolation (bad header, wrong field count,
/// non-numeric field, tstop before tstart).
CsvTrace read_csv_trace(const std::filesystem::path &path);

} // namespace vrcmon::papify
