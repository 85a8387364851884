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

#include "vrcmon/dataflow/graph.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vrcmon::device {

using dataflow::DataflowGraph;
using dataflow::Token;

/// View of an actor's FIFOs during one step. Counts reflect the state at the
/// beginning of the step; pops and pushes are applied after every actor has
/// been planned.
class FiringContext {
public:
  virtual ~FiringContext() = default;
  virtual std::size_t available(std::size_t in) const = 0;
  virtual Token peek(std::size_t in, std::size_t i = 0) const = 0;
  virtual std::size_t space(std::size_t out) const = 0;
  virtual Token pop(std::size_t in) = 0;
  virtual void push(std::size_t out, Token value) = 0;
};

/// Firing rule and state of one actor. fire() returns true when the actor
/// fired in this step; it must not touch the context otherwise.
class Behavior {
public:
  virtual ~Behavior() = default;
  virtual bool fire(FiringContext &ctx) = 0;
};

/// Behavior for an actor of a registered kind. `select` overrides the sel
/// parameter of switching elements.
std::unique_ptr<Behavior> make_behavior(const dataflow::Actor &actor,
                                        std::optional<int> select = std::nullopt);

struct FifoState {
  dataflow::Edge edge;
  std::size_t occupancy = 0;
  std::size_t in_flight = 0;
};

/// Step-synchronous token simulation of a graph.
///
/// In each step every idle actor whose firing rule is satisfied fires once;
/// tokens it pops leave their FIFOs at once and tokens it pushes become
/// visible firing_cost steps later. Each graph input injects at most one
/// word per step and each graph output drains at most one token per step.
class Engine {
public:
  /// `selects` gives the select value of switching elements by name.
  explicit Engine(const DataflowGraph &graph,
                  const std::map<std::string, int> &selects = {});
  ~Engine();
  Engine(const Engine &) = delete;
  Engine &operator=(const Engine &) = delete;

  /// Queues words for a graph input port.
  void inject(const std::string &port, const std::vector<Token> &words);
  /// Number of tokens the run must deliver on a graph output port.
  void expect(const std::string &port, std::uint64_t count);

  /// All queued inputs consumed and every expected output delivered.
  bool complete() const;
  /// Advances one step. Returns false when nothing happened in the step.
  bool step();

  std::uint64_t cycles() const { return cycles_; }
  std::uint64_t input_tokens() const { return input_tokens_; }
  std::uint64_t output_tokens() const { return output_tokens_; }
  /// Firings per actor in graph order.
  const std::vector<std::uint64_t> &firings() const { return firings_; }
  const std::vector<std::string> &actor_names() const { return actor_names_; }
  const std::map<std::string, std::vector<Token>> &outputs() const { return outputs_; }
  std::vector<FifoState> fifo_states() const;
  /// One line per non-empty FIFO, `src -> dst: n/depth`.
  std::string describe_stall() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint64_t cycles_ = 0;
  std::uint64_t input_tokens_ = 0;
  std::uint64_t output_tokens_ = 0;
  std::vector<std::uint64_t> firings_;
  std::vector<std::string> actor_names_;
  std::map<std::string, std::vector<Token>> outputs_;
};

struct SimulationResult {
  std::map<std::string, std::vector<Token>> outputs;
  std::uint64_t cycles = 0;
  std::map<std::string, std::uint64_t> firings;
};

struct SimulationOptions {
  /// Expected token count per output port; without it the run ends when
  /// the network goes quiet.
  std::optional<std::map<std::string, std::uint64_t>> expected;
  std::map<std::string, int> selects;
  std::uint64_t max_cycles = 100'000'000;
};

/// Runs a graph to completion on the given input streams.
/// Errors: Deadlock when nothing can fire while expected outputs are
/// missing; Timeout when max_cycles is exceeded; SizeMismatch for unknown
/// ports.
SimulationResult simulate(const DataflowGraph &graph,
                          const std::map<std::string, std::vector<Token>> &inputs,
                          const SimulationOptions &options = {});

} // namespace vrcmon::device
