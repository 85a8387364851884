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

#include "vrcmon/device/engine.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/kinds.hpp"

#include <algorithm>
#include <sstream>

namespace vrcmon::device {

namespace {

struct Fifo {
  std::deque<Token> queue;
  std::size_t depth = 0;
  std::size_t in_flight = 0;
  std::size_t step_start = 0;

  std::size_t space() const {
    const auto used = step_start + in_flight;
    return used >= depth ? 0 : depth - used;
  }
};

struct PendingPush {
  std::uint64_t due;
  std::size_t fifo;
  Token value;
};

struct ActorSlot {
  std::vector<std::size_t> in_fifos;
  std::vector<std::size_t> out_fifos;
  std::unique_ptr<Behavior> behavior;
  int cost = 1;
  std::uint64_t busy_until = 0;
};

struct Source {
  std::size_t fifo;
  std::deque<Token> words;
};

struct Sink {
  std::size_t fifo;
  std::optional<std::uint64_t> expected;
  std::uint64_t received = 0;
};

} // namespace

struct Engine::Impl {
  std::vector<Fifo> fifos;
  std::vector<dataflow::Edge> edges;
  std::vector<ActorSlot> actors;
  std::map<std::string, Source> sources;
  std::map<std::string, Sink> sinks;
  std::vector<PendingPush> pending;
};

namespace {

class SlotContext : public FiringContext {
public:
  SlotContext(std::vector<Fifo> &fifos, ActorSlot &slot, std::vector<PendingPush> &pending,
              std::uint64_t due)
      : fifos_(fifos), slot_(slot), pending_(pending), due_(due) {}

  std::size_t available(std::size_t in) const override {
    return fifos_[slot_.in_fifos[in]].queue.size();
  }
  Token peek(std::size_t in, std::size_t i) const override {
    return fifos_[slot_.in_fifos[in]].queue.at(i);
  }
  std::size_t space(std::size_t out) const override {
    return fifos_[slot_.out_fifos[out]].space();
  }
  Token pop(std::size_t in) override {
    auto &q = fifos_[slot_.in_fifos[in]].queue;
    if (q.empty()) throw Error(Errc::BadState, "pop from an empty FIFO");
    const Token v = q.front();
    q.pop_front();
    return v;
  }
  void push(std::size_t out, Token value) override {
    const auto f = slot_.out_fifos[out];
    if (fifos_[f].space() == 0) throw Error(Errc::BadState, "push into a full FIFO");
    ++fifos_[f].in_flight;
    pending_.push_back({due_, f, value});
  }

private:
  std::vector<Fifo> &fifos_;
  ActorSlot &slot_;
  std::vector<PendingPush> &pending_;
  std::uint64_t due_;
};

} // namespace

Engine::Engine(const DataflowGraph &graph, const std::map<std::string, int> &selects)
    : impl_(std::make_unique<Impl>()) {
  auto &im = *impl_;
  std::map<dataflow::Endpoint, std::size_t> by_source, by_target;
  for (const auto &e : graph.edges) {
    by_source[e.source] = im.fifos.size();
    by_target[e.target] = im.fifos.size();
    Fifo f;
    f.depth = static_cast<std::size_t>(e.fifo_depth);
    im.fifos.push_back(std::move(f));
    im.edges.push_back(e);
  }
  auto lookup = [](const auto &table, const dataflow::Endpoint &ep) {
    auto it = table.find(ep);
    if (it == table.end()) {
      throw Error(Errc::SemanticError, "port '" + dataflow::to_string(ep) + "' is not connected");
    }
    return it->second;
  };
  for (const auto &a : graph.actors) {
    ActorSlot slot;
    for (const auto &p : a.in_ports) slot.in_fifos.push_back(lookup(by_target, {a.name, p}));
    for (const auto &p : a.out_ports) slot.out_fifos.push_back(lookup(by_source, {a.name, p}));
    std::optional<int> sel;
    if (auto it = selects.find(a.name); it != selects.end()) sel = it->second;
    slot.behavior = make_behavior(a, sel);
    slot.cost = a.firing_cost;
    im.actors.push_back(std::move(slot));
    actor_names_.push_back(a.name);
  }
  firings_.assign(graph.actors.size(), 0);
  for (const auto &p : graph.ports) {
    if (p.direction == dataflow::Direction::In) {
      im.sources[p.name] = Source{lookup(by_source, {"", p.name}), {}};
    } else {
      im.sinks[p.name] = Sink{lookup(by_target, {"", p.name}), std::nullopt, 0};
      outputs_[p.name];
    }
  }
}

Engine::~Engine() = default;

void Engine::inject(const std::string &port, const std::vector<Token> &words) {
  auto it = impl_->sources.find(port);
  if (it == impl_->sources.end()) {
    throw Error(Errc::SizeMismatch, "'" + port + "' is not a graph input port");
  }
  it->second.words.insert(it->second.words.end(), words.begin(), words.end());
}

void Engine::expect(const std::string &port, std::uint64_t count) {
  auto it = impl_->sinks.find(port);
  if (it == impl_->sinks.end()) {
    throw Error(Errc::SizeMismatch, "'" + port + "' is not a graph output port");
  }
  it->second.expected = count;
}

bool Engine::complete() const {
  for (const auto &[name, s] : impl_->sources) {
    if (!s.words.empty()) return false;
  }
  for (const auto &[name, s] : impl_->sinks) {
    if (s.expected && s.received < *s.expected) return false;
  }
  return true;
}

bool Engine::step() {
  auto &im = *impl_;
  const std::uint64_t now = cycles_;
  bool active = !im.pending.empty();
  for (auto &f : im.fifos) f.step_start = f.queue.size();

  for (std::size_t i = 0; i < im.actors.size(); ++i) {
    auto &slot = im.actors[i];
    if (slot.busy_until > now) {
      active = true;
      continue;
    }
    SlotContext ctx(im.fifos, slot, im.pending, now + static_cast<std::uint64_t>(slot.cost));
    if (slot.behavior->fire(ctx)) {
      ++firings_[i];
      slot.busy_until = now + static_cast<std::uint64_t>(slot.cost);
      active = true;
    }
  }

  for (auto &[name, src] : im.sources) {
    auto &f = im.fifos[src.fifo];
    if (src.words.empty() || f.space() == 0) continue;
    ++f.in_flight;
    im.pending.push_back({now + 1, src.fifo, src.words.front()});
    src.words.pop_front();
    ++input_tokens_;
    active = true;
  }

  for (auto &[name, sink] : im.sinks) {
    auto &q = im.fifos[sink.fifo].queue;
    if (q.empty() || (sink.expected && sink.received >= *sink.expected)) continue;
    outputs_[name].push_back(q.front());
    q.pop_front();
    ++sink.received;
    ++output_tokens_;
    active = true;
  }

  ++cycles_;
  auto landed = std::stable_partition(im.pending.begin(), im.pending.end(),
                                      [&](const PendingPush &p) { return p.due > cycles_; });
  for (auto it = landed; it != im.pending.end(); ++it) {
    auto &f = im.fifos[it->fifo];
    f.queue.push_back(it->value);
    --f.in_flight;
  }
  im.pending.erase(landed, im.pending.end());
  return active;
}

std::vector<FifoState> Engine::fifo_states() const {
  std::vector<FifoState> out;
  for (std::size_t i = 0; i < impl_->fifos.size(); ++i) {
    out.push_back({impl_->edges[i], impl_->fifos[i].queue.size(), impl_->fifos[i].in_flight});
  }
  return out;
}

std::string Engine::describe_stall() const {
  std::ostringstream out;
  for (const auto &s : fifo_states()) {
    if (s.occupancy == 0) continue;
    out << "  " << dataflow::to_string(s.edge.source) << " -> "
        << dataflow::to_string(s.edge.target) << ": " << s.occupancy << "/" << s.edge.fifo_depth
        << "\n";
  }
  for (const auto &[name, src] : impl_->sources) {
    if (!src.words.empty()) out << "  input " << name << ": " << src.words.size() << " words not sent\n";
  }
  for (const auto &[name, sink] : impl_->sinks) {
    if (sink.expected && sink.received < *sink.expected) {
      out << "  output " << name << ": " << sink.received << "/" << *sink.expected << " tokens\n";
    }
  }
  return out.str();
}

SimulationResult simulate(const DataflowGraph &graph,
                          const std::map<std::string, std::vector<Token>> &inputs,
                          const SimulationOptions &options) {
  Engine engine(graph, options.selects);
  for (const auto &[port, words] : inputs) engine.inject(port, words);
  if (options.expected) {
    for (const auto &[port, count] : *options.expected) engine.expect(port, count);
  }
  for (;;) {
    if (options.expected && engine.complete()) break;
    if (engine.cycles() >= options.max_cycles) {
      throw Error(Errc::Timeout, "graph '" + graph.name + "' exceeded " +
                                     std::to_string(options.max_cycles) + " cycles");
    }
    if (!engine.step()) {
      if (!options.expected && engine.complete()) break;
      throw Error(Errc::Deadlock, "graph '" + graph.name + "' stalled at cycle " +
                                      std::to_string(engine.cycles()) + ":\n" +
                                      engine.describe_stall());
    }
  }
  SimulationResult result;
  result.outputs = engine.outputs();
  result.cycles = engine.cycles();
  for (std::size_t i = 0; i < engine.actor_names().size(); ++i) {
    result.firings[engine.actor_names()[i]] = engine.firings()[i];
  }
  return result;
}

} // namespace vrcmon::device
