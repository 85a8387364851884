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

#include "vrcmon/papify/papify.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/common/xml.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace vrcmon::papify {

Component::Component(std::string name, std::vector<EventInfo> events)
    : name_(std::move(name)), events_(std::move(events)) {}

const EventInfo *Component::find(std::string_view event) const {
  for (const auto &e : events_) {
    if (e.name == event) return &e;
  }
  return nullptr;
}

std::uint64_t steady_ns() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count());
}

SoftwareCoreComponent::SoftwareCoreComponent(Clock clock)
    : Component(std::string(kSoftwareComponent),
                {{0, std::string(kTotalCycles), "Core clock, nanoseconds"},
                 {1, std::string(kTotalInstructions), "Work units executed on the core"}}),
      clock_(std::move(clock)) {}

void SoftwareCoreComponent::add_work(const std::string &core_name, std::uint64_t units) {
  std::lock_guard lock(mutex_);
  work_[core_name] += units;
}

std::uint64_t SoftwareCoreComponent::read(const EventInfo &event, const std::string &core_name) const {
  if (event.name == kTotalCycles) return clock_();
  std::lock_guard lock(mutex_);
  auto it = work_.find(core_name);
  return it == work_.end() ? 0 : it->second;
}

MdcComponent::MdcComponent(device::VrcDevice &device, std::vector<EventInfo> events)
    : Component(std::string(kMdcComponent), std::move(events)), device_(device) {}

std::uint32_t MdcComponent::base_address() const { return device_.base_address(); }

std::uint64_t MdcComponent::read(const EventInfo &event, const std::string &) const {
  const auto off = device_.monitor_window_offset() + static_cast<std::uint32_t>(event.index);
  return device_.reg_read(off) | (static_cast<std::uint64_t>(device_.reg_read(off + 1)) << 32);
}

void MdcComponent::on_start(const std::string &) {
  if (device_.state() != device::State::Running) {
    device_.reg_write(device::kRegControl, device::kCtrlClear);
  }
}

namespace {

const xml::Element *child(const xml::Element &e, std::string_view name) {
  for (const auto &c : e.children) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string required_text(const xml::Element &e, std::string_view name) {
  const auto *c = child(e, name);
  if (c == nullptr) {
    throw Error(Errc::SchemaViolation, "line " + std::to_string(e.line) + ": <" + e.name +
                                           "> has no <" + std::string(name) + ">");
  }
  return c->trimmed_text();
}

std::uint64_t parse_number(const std::string &text, int base, const std::string &what, int line) {
  std::uint64_t v = 0;
  const auto *end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v, base);
  if (text.empty() || ec != std::errc() || p != end) {
    throw Error(Errc::SchemaViolation,
                "line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
  }
  return v;
}

} // namespace

std::unique_ptr<MdcComponent> load_mdc_component(std::string_view xml_text,
                                                 device::VrcDevice &device) {
  xml::Element root;
  try {
    root = xml::parse(xml_text);
  } catch (const Error &e) {
    throw Error(Errc::SchemaViolation, e.what());
  }
  if (root.name != "mdcInfo") {
    throw Error(Errc::SchemaViolation, "root element is <" + root.name + ">, expected <mdcInfo>");
  }
  const auto address_text = required_text(root, "baseAddress");
  const int address_line = child(root, "baseAddress")->line;
  if (address_text.size() < 3 || (address_text.substr(0, 2) != "0x" && address_text.substr(0, 2) != "0X")) {
    throw Error(Errc::SchemaViolation, "line " + std::to_string(address_line) +
                                           ": baseAddress must be 0x-prefixed hex");
  }
  const auto address = parse_number(address_text.substr(2), 16, "baseAddress", address_line);
  const auto declared = parse_number(required_text(root, "nbEvents"), 10, "nbEvents",
                                     child(root, "nbEvents")->line);

  const std::uint32_t window = device.register_count() - device.monitor_window_offset();
  std::vector<EventInfo> events;
  std::set<std::string> names;
  for (const auto &c : root.children) {
    if (c.name != "event") continue;
    EventInfo e;
    e.index = static_cast<int>(parse_number(required_text(c, "index"), 10, "index", c.line));
    e.name = required_text(c, "name");
    e.description = required_text(c, "desc");
    if (e.name.empty()) throw Error(Errc::SchemaViolation, "line " + std::to_string(c.line) + ": empty event name");
    if (!names.insert(e.name).second) {
      throw Error(Errc::SchemaViolation, "line " + std::to_string(c.line) + ": duplicate event '" + e.name + "'");
    }
    if (static_cast<std::uint32_t>(e.index) + 2 > window) {
      throw Error(Errc::SchemaViolation, "line " + std::to_string(c.line) + ": index " +
                                             std::to_string(e.index) + " is outside the " +
                                             std::to_string(window) + "-word monitor window");
    }
    events.push_back(std::move(e));
  }
  if (declared != events.size()) {
    throw Error(Errc::CountMismatch, "nbEvents is " + std::to_string(declared) + " but " +
                                         std::to_string(events.size()) + " events are listed");
  }
  if (address != device.base_address()) {
    std::ostringstream msg;
    msg << std::hex << "file targets 0x" << address << ", device is at 0x" << device.base_address();
    throw Error(Errc::BaseAddressMismatch, msg.str());
  }
  return std::make_unique<MdcComponent>(device, std::move(events));
}

std::vector<TraceRecord> PapifyAction::records() const { return records_; }

EventLib::EventLib(Clock clock) : clock_(std::move(clock)) {}

void EventLib::register_component(std::shared_ptr<Component> component) {
  std::lock_guard lock(mutex_);
  const auto name = component->name();
  if (!components_.emplace(name, std::move(component)).second) {
    throw Error(Errc::InvalidArgument, "component '" + name + "' is already registered");
  }
}

Component *EventLib::component(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = components_.find(name);
  return it == components_.end() ? nullptr : it->second.get();
}

const PeBinding &EventLib::configure_papify_PE(const std::string &core_name,
                                               const std::string &component, int pe_id) {
  std::lock_guard lock(mutex_);
  if (components_.find(component) == components_.end()) {
    throw Error(Errc::UnknownComponent, "no component '" + component + "'");
  }
  const PeBinding wanted{core_name, component, pe_id};
  if (auto it = pes_.find(pe_id); it != pes_.end()) {
    if (it->second == wanted) return it->second;
    throw Error(Errc::DuplicatePe, "PE " + std::to_string(pe_id) + " is already bound to " +
                                       it->second.core_name + "/" + it->second.component);
  }
  for (const auto &[id, b] : pes_) {
    if (b.core_name == core_name) {
      throw Error(Errc::DuplicatePe, "core '" + core_name + "' is already PE " + std::to_string(id));
    }
  }
  return pes_.emplace(pe_id, wanted).first->second;
}

PapifyAction &EventLib::configure_papify_actor(const std::string &actor,
                                               const std::vector<std::string> &components,
                                               const std::vector<std::string> &event_names,
                                               const std::vector<int> &config_ids,
                                               int num_configs) {
  std::lock_guard lock(mutex_);
  for (const auto &c : components) {
    if (components_.find(c) == components_.end()) {
      throw Error(Errc::UnknownComponent, "actor '" + actor + "' names unknown component '" + c + "'");
    }
  }
  for (const auto &e : event_names) {
    const bool known = std::any_of(components.begin(), components.end(), [&](const auto &c) {
      return components_.at(c)->find(e) != nullptr;
    });
    if (!known) throw Error(Errc::UnknownEvent, "actor '" + actor + "': no event '" + e + "'");
  }
  if (auto it = actions_.find(actor); it != actions_.end()) {
    auto &a = *it->second;
    if (a.components_ == components && a.events_ == event_names && a.config_ids_ == config_ids &&
        a.num_configs_ == num_configs) {
      return a;
    }
    throw Error(Errc::InvalidArgument, "actor '" + actor + "' is already configured differently");
  }
  auto a = std::make_unique<PapifyAction>();
  a->actor_ = actor;
  a->components_ = components;
  a->events_ = event_names;
  a->config_ids_ = config_ids;
  a->num_configs_ = num_configs;
  return *actions_.emplace(actor, std::move(a)).first->second;
}

const PeBinding &EventLib::bound(int pe_id) const {
  auto it = pes_.find(pe_id);
  if (it == pes_.end()) throw Error(Errc::UnboundPe, "PE " + std::to_string(pe_id) + " is not configured");
  return it->second;
}

std::vector<std::optional<std::uint64_t>> EventLib::sample(const PapifyAction &action,
                                                           const PeBinding &pe) const {
  std::vector<std::optional<std::uint64_t>> out(action.events_.size());
  if (std::find(action.components_.begin(), action.components_.end(), pe.component) ==
      action.components_.end()) {
    return out;
  }
  const auto &comp = *components_.at(pe.component);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (const auto *e = comp.find(action.events_[i])) out[i] = comp.read(*e, pe.core_name);
  }
  return out;
}

void EventLib::event_start(PapifyAction &action, int pe_id) {
  std::unique_lock lock(mutex_);
  const auto pe = bound(pe_id);
  if (action.in_flight_.count(pe_id) != 0) {
    throw Error(Errc::UnbalancedStart, "actor '" + action.actor_ + "' already started on PE " +
                                           std::to_string(pe_id));
  }
  auto *comp = components_.at(pe.component).get();
  const bool applies = std::find(action.components_.begin(), action.components_.end(),
                                 pe.component) != action.components_.end();
  lock.unlock();
  if (applies) comp->on_start(pe.core_name);
  PapifyAction::Snapshot snap;
  snap.values = sample(action, pe);
  snap.t = clock_();
  lock.lock();
  action.in_flight_[pe_id] = std::move(snap);
}

TraceRecord EventLib::event_stop(PapifyAction &action, int pe_id) {
  std::unique_lock lock(mutex_);
  const auto pe = bound(pe_id);
  auto it = action.in_flight_.find(pe_id);
  if (it == action.in_flight_.end()) {
    throw Error(Errc::UnbalancedStop, "actor '" + action.actor_ + "' stopped on PE " +
                                          std::to_string(pe_id) + " without a start");
  }
  const auto start = std::move(it->second);
  action.in_flight_.erase(it);
  lock.unlock();
  const auto t = clock_();
  const auto now = sample(action, pe);
  TraceRecord r;
  r.pe_id = pe_id;
  r.core_name = pe.core_name;
  r.actor = action.actor_;
  r.t_start = start.t;
  r.t_stop = std::max(t, start.t);
  r.values.resize(now.size());
  for (std::size_t i = 0; i < now.size(); ++i) {
    if (now[i] && start.values[i]) r.values[i] = *now[i] - *start.values[i];
  }
  lock.lock();
  action.records_.push_back(r);
  sink_.push_back(r);
  return r;
}

std::vector<TraceRecord> EventLib::trace() const {
  std::lock_guard lock(mutex_);
  return sink_;
}

std::size_t EventLib::record_count() const {
  std::lock_guard lock(mutex_);
  return sink_.size();
}

std::size_t EventLib::event_set_count() const {
  std::lock_guard lock(mutex_);
  return actions_.size();
}

std::vector<PeBinding> EventLib::bindings() const {
  std::lock_guard lock(mutex_);
  std::vector<PeBinding> out;
  for (const auto &[id, b] : pes_) out.push_back(b);
  return out;
}

const PapifyAction *EventLib::action(std::string_view actor) const {
  std::lock_guard lock(mutex_);
  auto it = actions_.find(actor);
  return it == actions_.end() ? nullptr : it->second.get();
}

PapifyAction *EventLib::action(std::string_view actor) {
  std::lock_guard lock(mutex_);
  auto it = actions_.find(actor);
  return it == actions_.end() ? nullptr : it->second.get();
}

std::vector<std::filesystem::path> EventLib::flush_csv(const std::filesystem::path &prefix) const {
  std::lock_guard lock(mutex_);
  const auto dir = prefix / "papify-output";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto &[name, action] : actions_) {
    const auto path = dir / (name + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << "PE,Actor,tstart,tstop";
    for (const auto &e : action->events_) out << "," << e;
    out << "\n";
    for (const auto &r : sink_) {
      if (r.actor != name) continue;
      out << r.core_name << "," << r.actor << "," << r.t_start << "," << r.t_stop;
      for (const auto &v : r.values) {
        out << ",";
        if (v) out << *v;
      }
      out << "\n";
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
    written.push_back(path);
  }
  return written;
}

void EventLib::clear() {
  std::lock_guard lock(mutex_);
  sink_.clear();
  for (auto &[name, a] : actions_) {
    a->records_.clear();
    a->in_flight_.clear();
  }
}

void EventLib::shutdown() {
  std::lock_guard lock(mutex_);
  sink_.clear();
  actions_.clear();
  pes_.clear();
}

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

} // namespace

CsvTrace read_csv_trace(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  const auto where = [&](std::size_t line) { return path.string() + ":" + std::to_string(line) + ": "; };
  CsvTrace trace;
  trace.actor = path.stem().string();
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaViolation, where(1) + "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "PE" || header[1] != "Actor" || header[2] != "tstart" ||
      header[3] != "tstop") {
    throw Error(Errc::SchemaViolation, where(1) + "header must start with PE,Actor,tstart,tstop");
  }
  trace.event_names.assign(header.begin() + 4, header.end());
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      throw Error(Errc::SchemaViolation, where(n) + "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(f.size()));
    }
    CsvTrace::Row row;
    row.pe = f[0];
    row.actor = f[1];
    row.t_start = parse_number(f[2], 10, "tstart", static_cast<int>(n));
    row.t_stop = parse_number(f[3], 10, "tstop", static_cast<int>(n));
    if (row.t_stop < row.t_start) throw Error(Errc::SchemaViolation, where(n) + "tstop before tstart");
    for (std::size_t i = 4; i < f.size(); ++i) {
      if (f[i].empty()) {
        row.values.emplace_back();
      } else {
        row.values.emplace_back(parse_number(f[i], 10, header[i], static_cast<int>(n)));
      }
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

} // namespace vrcmon::papify
