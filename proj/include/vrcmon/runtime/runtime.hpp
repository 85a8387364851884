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

#include "vrcmon/driver/driver.hpp"
#include "vrcmon/papify/papify.hpp"

#include <json.hpp>

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vrcmon::runtime {

class FireContext;
using WorkFn = std::function<void(FireContext &)>;

struct AppActor {
  std::string name;
  /// Single-rate expansion factor.
  int repetitions = 1;
  /// True when firings go through a driver invoke and must map onto an accelerator.
  bool hardware = false;
  WorkFn work;
};

/// Tokens per firing on each side; `src_rate * reps(src) == dst_rate * reps(dst)`.
struct AppEdge {
  std::string src;
  std::string src_port;
  std::string dst;
  std::string dst_port;
  int src_rate = 1;
  int dst_rate = 1;
};

struct AppGraph {
  std::string name;
  std::vector<AppActor> actors;
  std::vector<AppEdge> edges;

  const AppActor *find(std::string_view actor) const;
  /// Sum of repetition counts.
  std::uint64_t firings_per_iteration() const;
  /// Errors: SemanticError (unknown actors, duplicate names, repetitions
  /// below 1, missing work, cycles); RateMismatch (unbalanced edge).
  void validate() const;
};

struct SwCore {
  std::string name;
  int pe_id = 0;
};

struct Accelerator {
  std::string name;
  int pe_id = 0;
  device::VrcDevice *device = nullptr;
  std::vector<driver::DriverDescriptor> drivers;
};

struct Platform {
  std::vector<SwCore> cores;
  std::vector<Accelerator> accelerators;
  /// Receives the work units sw firings report; may be null.
  std::shared_ptr<papify::SoftwareCoreComponent> core_counters;

  /// Errors: InvalidArgument (duplicate pe_id or name, accelerator without device).
  void validate() const;
  std::vector<int> pe_ids() const;
  std::string pe_name(int pe_id) const;
  const Accelerator *accelerator(int pe_id) const;
};

/// Default key for `Constraints::allowed`.
inline constexpr std::string_view kAnyActor = "*";

struct Constraints {
  /// Actor -> PEs it may run on; the `*` entry applies to unlisted actors.
  std::map<std::string, std::set<int>> allowed;
  /// Actors that must share a PE.
  std::vector<std::vector<std::string>> colocate;
};

struct Mapping {
  std::map<std::string, int> pe_of;
};

/// First fit in pe_id order among the PEs each actor is allowed on,
/// restricted to cores for sw actors and accelerators for hw actors.
/// Errors: Unsatisfiable, naming the actor and the constraint.
Mapping map_actors(const AppGraph &app, const Platform &platform, const Constraints &constraints = {});

/// Actor names in firing order (Kahn, ties broken by declaration order).
std::vector<std::string> schedule(const AppGraph &app);

class FireContext {
public:
  const std::string &actor() const { return actor_; }
  int instance() const { return instance_; }
  int pe_id() const { return pe_id_; }
  std::uint64_t iteration() const { return iteration_; }

  /// Tokens consumed by this firing on `port`.
  const std::vector<std::any> &input(const std::string &port) const;
  template <typename T> const T &input_as(const std::string &port, std::size_t i = 0) const {
    return std::any_cast<const T &>(input(port).at(i));
  }
  void output(const std::string &port, std::any token);
  /// Adds synthetic instruction units to the executing core.
  void work(std::uint64_t units);
  /// Runs a configuration on the accelerator this actor is mapped to.
  std::map<std::string, driver::Words> invoke(const std::string &config,
                                              const std::map<std::string, driver::Words> &inputs,
                                              const std::map<std::string, std::size_t> &output_sizes);

private:
  friend class Executor;
  std::string actor_;
  int instance_ = 0;
  int pe_id_ = 0;
  std::uint64_t iteration_ = 0;
  std::string core_;
  const Platform *platform_ = nullptr;
  std::map<std::string, std::vector<std::any>> inputs_;
  std::map<std::string, std::vector<std::any>> outputs_;
  std::optional<std::uint64_t> device_cycles_;
  std::uint64_t device_input_words_ = 0;
};

enum class StepKind { Schedule, SendOrder, Fire, Exchange, Retrieve };
std::string_view to_string(StepKind k);

struct Step {
  StepKind kind;
  std::string actor;
  int instance = 0;
};

struct FiringRecord {
  std::string actor;
  int instance = 0;
  int pe_id = 0;
  std::uint64_t t_start = 0;
  std::uint64_t t_stop = 0;
  std::optional<std::uint64_t> device_cycles;
};

struct IterationReport {
  std::uint64_t iteration = 0;
  bool monitored = false;
  std::vector<Step> steps;
  std::vector<FiringRecord> firings;
  std::map<std::string, std::uint64_t> firing_counts;
  std::uint64_t trace_records = 0;
  std::uint64_t wall_ns = 0;

  nlohmann::json to_json() const;
};

struct ExecuteOptions {
  std::uint64_t iteration = 0;
  /// Null runs unmonitored; otherwise actors configured in the library are
  /// wrapped in event_start/event_stop on their PE.
  papify::EventLib *monitor = nullptr;
};

/// Fires every actor its repetition count in schedule order on the mapped
/// PEs. Errors raised by a firing are rethrown with the actor named, keeping
/// their code; non-library exceptions become ActorFailure.
IterationReport execute_iteration(const AppGraph &app, const Platform &platform,
                                  const Mapping &mapping, const ExecuteOptions &options = {});

struct OverheadResult {
  int iterations = 0;
  double rate_monitored = 0;
  double rate_unmonitored = 0;
  double stddev_monitored = 0;
  double stddev_unmonitored = 0;
  /// (unmonitored - monitored) / unmonitored, in percent.
  double overhead_percent = 0;
};

/// Binds every PE of the platform (cores to perf_event, accelerators to the
/// registered mdc component) and configures the listed actors, or all actors
/// when `actors` is empty: sw actors with `sw_events`, hw actors with
/// `hw_events` and the accelerator's configuration ids.
void configure_monitoring(papify::EventLib &lib, const AppGraph &app, const Platform &platform,
                          const std::vector<std::string> &sw_events,
                          const std::vector<std::string> &hw_events,
                          const std::vector<std::string> &actors = {});

/// Times `iterations` runs of each arm, alternating arms; `run(true)` is the
/// monitored arm. Rates are iterations per second.
/// Errors: InvalidArgument when iterations < 3.
OverheadResult measure_overhead(const std::function<void(bool monitored)> &run, int iterations);

/// Monitored arm executes with `monitor` and clears its trace afterwards.
OverheadResult measure_overhead(const AppGraph &app, const Platform &platform, const Mapping &mapping,
                                papify::EventLib &monitor, int iterations);

} // namespace vrcmon::runtime
