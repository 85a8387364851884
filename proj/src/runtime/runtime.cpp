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

#include "vrcmon/runtime/runtime.hpp"

#include "vrcmon/common/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>

namespace vrcmon::runtime {

const AppActor *AppGraph::find(std::string_view actor) const {
  for (const auto &a : actors) {
    if (a.name == actor) return &a;
  }
  return nullptr;
}

std::uint64_t AppGraph::firings_per_iteration() const {
  std::uint64_t n = 0;
  for (const auto &a : actors) n += static_cast<std::uint64_t>(a.repetitions);
  return n;
}

void AppGraph::validate() const {
  std::set<std::string> names;
  for (const auto &a : actors) {
    if (!names.insert(a.name).second) throw Error(Errc::SemanticError, "duplicate actor '" + a.name + "'");
    if (a.repetitions < 1) {
      throw Error(Errc::SemanticError, "actor '" + a.name + "' has repetition count " +
                                           std::to_string(a.repetitions));
    }
    if (!a.work) throw Error(Errc::SemanticError, "actor '" + a.name + "' has no work function");
  }
  std::set<std::pair<std::string, std::string>> sinks;
  for (const auto &e : edges) {
    const auto *src = find(e.src);
    const auto *dst = find(e.dst);
    const auto label = e.src + "." + e.src_port + " -> " + e.dst + "." + e.dst_port;
    if (src == nullptr || dst == nullptr) throw Error(Errc::SemanticError, "edge " + label + " names an unknown actor");
    if (e.src_rate < 1 || e.dst_rate < 1) throw Error(Errc::SemanticError, "edge " + label + " has a rate below 1");
    if (!sinks.emplace(e.dst, e.dst_port).second) {
      throw Error(Errc::SemanticError, "input " + e.dst + "." + e.dst_port + " has more than one edge");
    }
    const auto produced = static_cast<std::int64_t>(e.src_rate) * src->repetitions;
    const auto consumed = static_cast<std::int64_t>(e.dst_rate) * dst->repetitions;
    if (produced != consumed) {
      throw Error(Errc::RateMismatch, "edge " + label + " produces " + std::to_string(produced) +
                                          " tokens per iteration and consumes " + std::to_string(consumed));
    }
  }
  schedule(*this);
}

std::vector<std::string> schedule(const AppGraph &app) {
  std::map<std::string, int> indegree;
  for (const auto &a : app.actors) indegree[a.name] = 0;
  for (const auto &e : app.edges) ++indegree[e.dst];
  std::vector<std::string> order;
  std::vector<bool> done(app.actors.size(), false);
  while (order.size() < app.actors.size()) {
    std::size_t pick = app.actors.size();
    for (std::size_t i = 0; i < app.actors.size(); ++i) {
      if (!done[i] && indegree[app.actors[i].name] == 0) {
        pick = i;
        break;
      }
    }
    if (pick == app.actors.size()) {
      std::string rest;
      for (std::size_t i = 0; i < app.actors.size(); ++i) {
        if (!done[i]) rest += (rest.empty() ? "" : ", ") + app.actors[i].name;
      }
      throw Error(Errc::SemanticError, "cycle among " + rest);
    }
    done[pick] = true;
    order.push_back(app.actors[pick].name);
    for (const auto &e : app.edges) {
      if (e.src == order.back()) --indegree[e.dst];
    }
  }
  return order;
}

void Platform::validate() const {
  std::set<int> ids;
  std::set<std::string> names;
  const auto add = [&](const std::string &name, int id) {
    if (!ids.insert(id).second) throw Error(Errc::InvalidArgument, "pe_id " + std::to_string(id) + " used twice");
    if (!names.insert(name).second) throw Error(Errc::InvalidArgument, "PE name '" + name + "' used twice");
  };
  for (const auto &c : cores) add(c.name, c.pe_id);
  for (const auto &a : accelerators) {
    add(a.name, a.pe_id);
    if (a.device == nullptr) throw Error(Errc::InvalidArgument, "accelerator '" + a.name + "' has no device");
  }
}

std::vector<int> Platform::pe_ids() const {
  std::vector<int> ids;
  for (const auto &c : cores) ids.push_back(c.pe_id);
  for (const auto &a : accelerators) ids.push_back(a.pe_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string Platform::pe_name(int pe_id) const {
  for (const auto &c : cores) {
    if (c.pe_id == pe_id) return c.name;
  }
  for (const auto &a : accelerators) {
    if (a.pe_id == pe_id) return a.name;
  }
  throw Error(Errc::InvalidArgument, "no PE " + std::to_string(pe_id));
}

const Accelerator *Platform::accelerator(int pe_id) const {
  for (const auto &a : accelerators) {
    if (a.pe_id == pe_id) return &a;
  }
  return nullptr;
}

Mapping map_actors(const AppGraph &app, const Platform &platform, const Constraints &constraints) {
  platform.validate();
  const auto all = platform.pe_ids();
  for (const auto &[actor, pes] : constraints.allowed) {
    if (actor != kAnyActor && app.find(actor) == nullptr) {
      throw Error(Errc::Unsatisfiable, "constraint names unknown actor '" + actor + "'");
    }
    for (int pe : pes) {
      if (std::find(all.begin(), all.end(), pe) == all.end()) {
        throw Error(Errc::Unsatisfiable, "constraint on '" + actor + "' names missing PE " + std::to_string(pe));
      }
    }
  }
  const auto candidates = [&](const AppActor &a) {
    std::set<int> allowed(all.begin(), all.end());
    if (auto it = constraints.allowed.find(a.name); it != constraints.allowed.end()) {
      allowed = it->second;
    } else if (auto any = constraints.allowed.find(std::string(kAnyActor)); any != constraints.allowed.end()) {
      allowed = any->second;
    }
    std::set<int> out;
    for (int pe : allowed) {
      if ((platform.accelerator(pe) != nullptr) == a.hardware) out.insert(pe);
    }
    return out;
  };

  std::map<std::string, std::size_t> group_of;
  for (std::size_t g = 0; g < constraints.colocate.size(); ++g) {
    for (const auto &name : constraints.colocate[g]) {
      if (app.find(name) == nullptr) {
        throw Error(Errc::Unsatisfiable, "co-location group names unknown actor '" + name + "'");
      }
      if (!group_of.emplace(name, g).second) {
        throw Error(Errc::Unsatisfiable, "actor '" + name + "' is in two co-location groups");
      }
    }
  }

  Mapping m;
  for (const auto &a : app.actors) {
    if (m.pe_of.count(a.name) != 0) continue;
    auto allowed = candidates(a);
    std::vector<std::string> members{a.name};
    if (auto g = group_of.find(a.name); g != group_of.end()) {
      members = constraints.colocate[g->second];
      for (const auto &other : members) {
        const auto theirs = candidates(*app.find(other));
        std::set<int> both;
        std::set_intersection(allowed.begin(), allowed.end(), theirs.begin(), theirs.end(),
                              std::inserter(both, both.begin()));
        allowed = std::move(both);
      }
    }
    if (allowed.empty()) {
      std::string what = members.size() > 1 ? "co-location group of '" + a.name + "'" : "actor '" + a.name + "'";
      throw Error(Errc::Unsatisfiable, what + " has no allowed " +
                                           std::string(a.hardware ? "accelerator" : "core"));
    }
    for (const auto &member : members) m.pe_of[member] = *allowed.begin();
  }
  return m;
}

const std::vector<std::any> &FireContext::input(const std::string &port) const {
  auto it = inputs_.find(port);
  if (it == inputs_.end()) throw Error(Errc::SemanticError, "actor '" + actor_ + "' has no input '" + port + "'");
  return it->second;
}

void FireContext::output(const std::string &port, std::any token) { outputs_[port].push_back(std::move(token)); }

void FireContext::work(std::uint64_t units) {
  if (platform_->core_counters && !core_.empty()) platform_->core_counters->add_work(core_, units);
}

std::map<std::string, driver::Words> FireContext::invoke(
    const std::string &config, const std::map<std::string, driver::Words> &inputs,
    const std::map<std::string, std::size_t> &output_sizes) {
  const auto *acc = platform_->accelerator(pe_id_);
  if (acc == nullptr) {
    throw Error(Errc::InvalidArgument, "actor '" + actor_ + "' is not mapped to an accelerator");
  }
  const auto &desc = driver::find_driver(acc->drivers, config);
  auto r = driver::invoke(*acc->device, desc, inputs, output_sizes);
  device_cycles_ = device_cycles_.value_or(0) + r.log.cycles;
  device_input_words_ += r.log.input_words;
  return std::move(r.outputs);
}

std::string_view to_string(StepKind k) {
  switch (k) {
  case StepKind::Schedule: return "schedule";
  case StepKind::SendOrder: return "send_order";
  case StepKind::Fire: return "fire";
  case StepKind::Exchange: return "exchange";
  case StepKind::Retrieve: return "retrieve";
  }
  return "unknown";
}

nlohmann::json IterationReport::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto &s : steps) {
    nlohmann::json j{{"step", to_string(s.kind)}};
    if (!s.actor.empty()) {
      j["actor"] = s.actor;
      j["instance"] = s.instance;
    }
    steps_json.push_back(std::move(j));
  }
  nlohmann::json firings_json = nlohmann::json::array();
  for (const auto &f : firings) {
    nlohmann::json j{{"actor", f.actor}, {"instance", f.instance}, {"pe", f.pe_id},
                     {"t_start", f.t_start}, {"t_stop", f.t_stop}};
    if (f.device_cycles) j["device_cycles"] = *f.device_cycles;
    firings_json.push_back(std::move(j));
  }
  return {{"iteration", iteration},       {"monitored", monitored},
          {"wall_ns", wall_ns},           {"firing_counts", firing_counts},
          {"trace_records", trace_records}, {"steps", std::move(steps_json)},
          {"firings", std::move(firings_json)}};
}

class Executor {
public:
  static IterationReport run(const AppGraph &app, const Platform &platform, const Mapping &mapping,
                             const ExecuteOptions &options) {
    const auto t0 = papify::steady_ns();
    IterationReport report;
    report.iteration = options.iteration;
    report.monitored = options.monitor != nullptr;
    const auto records_before = options.monitor ? options.monitor->record_count() : 0;

    app.validate();
    const auto order = schedule(app);
    report.steps.push_back({StepKind::Schedule, {}, 0});
    for (const auto &a : app.actors) {
      if (mapping.pe_of.count(a.name) == 0) {
        throw Error(Errc::Unsatisfiable, "actor '" + a.name + "' is not mapped");
      }
    }
    report.steps.push_back({StepKind::SendOrder, {}, 0});

    std::vector<std::deque<std::any>> fifos(app.edges.size());
    for (const auto &name : order) {
      const auto &actor = *app.find(name);
      const int pe = mapping.pe_of.at(name);
      papify::PapifyAction *action = options.monitor ? options.monitor->action(name) : nullptr;
      for (int i = 0; i < actor.repetitions; ++i) {
        FireContext ctx;
        ctx.actor_ = name;
        ctx.instance_ = i;
        ctx.pe_id_ = pe;
        ctx.iteration_ = options.iteration;
        ctx.platform_ = &platform;
        if (platform.accelerator(pe) == nullptr) ctx.core_ = platform.pe_name(pe);
        for (std::size_t e = 0; e < app.edges.size(); ++e) {
          const auto &edge = app.edges[e];
          if (edge.dst != name) continue;
          auto &in = ctx.inputs_[edge.dst_port];
          for (int k = 0; k < edge.dst_rate; ++k) {
            if (fifos[e].empty()) {
              throw Error(Errc::RateMismatch, "actor '" + name + "' firing " + std::to_string(i) +
                                                  " found input '" + edge.dst_port + "' empty");
            }
            in.push_back(std::move(fifos[e].front()));
            fifos[e].pop_front();
          }
        }

        report.steps.push_back({StepKind::Fire, name, i});
        FiringRecord rec{name, i, pe, papify::steady_ns(), 0, std::nullopt};
        if (action) options.monitor->event_start(*action, pe);
        try {
          actor.work(ctx);
        } catch (const Error &e) {
          if (action) stop_quietly(*options.monitor, *action, pe);
          throw Error(e.code(), "actor '" + name + "' firing " + std::to_string(i) + ": " + e.detail());
        } catch (const std::exception &e) {
          if (action) stop_quietly(*options.monitor, *action, pe);
          throw Error(Errc::ActorFailure, "actor '" + name + "' firing " + std::to_string(i) + ": " + e.what());
        }
        if (action) options.monitor->event_stop(*action, pe);
        rec.t_stop = papify::steady_ns();
        rec.device_cycles = ctx.device_cycles_;
        report.firings.push_back(std::move(rec));
        ++report.firing_counts[name];

        report.steps.push_back({StepKind::Exchange, name, i});
        exchange(app, name, i, ctx, fifos);
      }
    }
    for (std::size_t e = 0; e < fifos.size(); ++e) {
      if (!fifos[e].empty()) {
        const auto &edge = app.edges[e];
        throw Error(Errc::RateMismatch, std::to_string(fifos[e].size()) + " tokens left on " + edge.src +
                                            "." + edge.src_port + " -> " + edge.dst + "." + edge.dst_port);
      }
    }
    report.steps.push_back({StepKind::Retrieve, {}, 0});
    if (options.monitor) report.trace_records = options.monitor->record_count() - records_before;
    report.wall_ns = papify::steady_ns() - t0;
    return report;
  }

private:
  static void stop_quietly(papify::EventLib &lib, papify::PapifyAction &action, int pe) {
    try {
      lib.event_stop(action, pe);
    } catch (const Error &) {
    }
  }

  static void exchange(const AppGraph &app, const std::string &name, int instance, FireContext &ctx,
                       std::vector<std::deque<std::any>> &fifos) {
    std::set<std::string> connected;
    for (std::size_t e = 0; e < app.edges.size(); ++e) {
      const auto &edge = app.edges[e];
      if (edge.src != name) continue;
      connected.insert(edge.src_port);
      auto it = ctx.outputs_.find(edge.src_port);
      const std::size_t n = it == ctx.outputs_.end() ? 0 : it->second.size();
      if (n != static_cast<std::size_t>(edge.src_rate)) {
        throw Error(Errc::RateMismatch, "actor '" + name + "' firing " + std::to_string(instance) +
                                            " produced " + std::to_string(n) + " tokens on '" +
                                            edge.src_port + "', rate is " + std::to_string(edge.src_rate));
      }
      for (const auto &t : it->second) fifos[e].push_back(t);
    }
    for (const auto &[port, tokens] : ctx.outputs_) {
      if (connected.count(port) == 0 && !tokens.empty()) {
        throw Error(Errc::RateMismatch, "actor '" + name + "' produced on unconnected port '" + port + "'");
      }
    }
  }
};

IterationReport execute_iteration(const AppGraph &app, const Platform &platform,
                                  const Mapping &mapping, const ExecuteOptions &options) {
  return Executor::run(app, platform, mapping, options);
}

void configure_monitoring(papify::EventLib &lib, const AppGraph &app, const Platform &platform,
                          const std::vector<std::string> &sw_events,
                          const std::vector<std::string> &hw_events,
                          const std::vector<std::string> &actors) {
  for (const auto &c : platform.cores) {
    lib.configure_papify_PE(c.name, std::string(papify::kSoftwareComponent), c.pe_id);
  }
  for (const auto &a : platform.accelerators) {
    lib.configure_papify_PE(a.name, std::string(papify::kMdcComponent), a.pe_id);
  }
  std::vector<int> config_ids;
  for (const auto &a : platform.accelerators) {
    for (const auto &d : a.drivers) config_ids.push_back(d.config_id);
  }
  std::sort(config_ids.begin(), config_ids.end());
  config_ids.erase(std::unique(config_ids.begin(), config_ids.end()), config_ids.end());
  for (const auto &a : app.actors) {
    if (!actors.empty() && std::find(actors.begin(), actors.end(), a.name) == actors.end()) continue;
    if (a.hardware) {
      lib.configure_papify_actor(a.name, {std::string(papify::kMdcComponent)}, hw_events, config_ids,
                                 static_cast<int>(config_ids.size()));
    } else {
      lib.configure_papify_actor(a.name, {std::string(papify::kSoftwareComponent)}, sw_events);
    }
  }
  for (const auto &name : actors) {
    if (app.find(name) == nullptr) throw Error(Errc::InvalidArgument, "no actor '" + name + "' to monitor");
  }
}

namespace {

void stats(const std::vector<double> &rates, double &mean, double &stddev) {
  mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  double sq = 0;
  for (double r : rates) sq += (r - mean) * (r - mean);
  stddev = std::sqrt(sq / static_cast<double>(rates.size() - 1));
}

} // namespace

OverheadResult measure_overhead(const std::function<void(bool monitored)> &run, int iterations) {
  if (iterations < 3) throw Error(Errc::InvalidArgument, "need at least 3 iterations per arm");
  std::vector<double> on;
  std::vector<double> off;
  const auto timed = [&](bool monitored) {
    const auto t0 = std::chrono::steady_clock::now();
    run(monitored);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return 1.0 / std::max(dt.count(), 1e-9);
  };
  for (int i = 0; i < iterations; ++i) {
    // Alternate which arm goes first so drift affects both equally.
    if (i % 2 == 0) {
      on.push_back(timed(true));
      off.push_back(timed(false));
    } else {
      off.push_back(timed(false));
      on.push_back(timed(true));
    }
  }
  OverheadResult r;
  r.iterations = iterations;
  stats(on, r.rate_monitored, r.stddev_monitored);
  stats(off, r.rate_unmonitored, r.stddev_unmonitored);
  r.overhead_percent = (r.rate_unmonitored - r.rate_monitored) / r.rate_unmonitored * 100.0;
  return r;
}

OverheadResult measure_overhead(const AppGraph &app, const Platform &platform, const Mapping &mapping,
                                papify::EventLib &monitor, int iterations) {
  std::uint64_t k = 0;
  return measure_overhead(
      [&](bool monitored) {
        ExecuteOptions opt;
        opt.iteration = k++;
        opt.monitor = monitored ? &monitor : nullptr;
        execute_iteration(app, platform, mapping, opt);
        if (monitored) monitor.clear();
      },
      iterations);
}

} // namespace vrcmon::runtime
