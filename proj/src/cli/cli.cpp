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

#include "vrcmon/cli/cli.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/xdf.hpp"
#include "vrcmon/runtime/assessment.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace vrcmon::cli {

namespace fs = std::filesystem;

namespace {

/// An error in the command's inputs rather than in processing them.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_words(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::uint32_t parse_address(const std::string &text) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &used, 0);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != text.size() || v > 0xffffffffUL) {
    throw Error(Errc::InvalidArgument, "bad base address '" + text + "'");
  }
  if (v % 4 != 0) throw Error(Errc::InvalidArgument, "base address " + text + " is not word aligned");
  return static_cast<std::uint32_t>(v);
}

int parse_int(const std::string &key, const std::string &text, int min) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != text.size() || text.empty() || v < min) {
    throw Error(Errc::InvalidArgument, key + " must be an integer >= " + std::to_string(min) + ", got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string &key, const std::string &text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw Error(Errc::InvalidArgument, key + " must be a boolean, got '" + text + "'");
}

fs::path must_exist(const fs::path &p) {
  if (!fs::exists(p)) throw Error(Errc::IoError, "no such file: " + p.string());
  return p;
}

} // namespace

RunManifest load_manifest(const fs::path &path) {
  if (!fs::exists(path)) throw Error(Errc::IoError, "no such file: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const auto base = path.parent_path();
  const auto resolve = [&](const std::string &p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  RunManifest m;
  m.output = base / "out";
  bool have_merged = false;
  bool have_ctab = false;
  for (const auto &[section, body] : tree) {
    if (!body.data().empty()) throw Error(Errc::InvalidArgument, "key '" + section + "' outside a section");
    for (const auto &[key, node] : body) {
      const auto value = trim(node.data());
      const auto where = "[" + section + "] " + key;
      if (section == "run") {
        if (key == "merged") {
          m.merged_xdf = resolve(value);
          have_merged = true;
        } else if (key == "ctab") {
          m.ctab = resolve(value);
          have_ctab = true;
        } else if (key == "mdc_info") {
          m.mdc_info = value.empty() ? fs::path() : resolve(value);
        } else if (key == "frames") {
          m.frames = value == "synthetic" || value.empty() ? fs::path() : resolve(value);
        } else if (key == "seed") {
          m.seed = static_cast<std::uint64_t>(parse_int(where, value, 0));
        } else if (key == "width") {
          m.width = parse_int(where, value, 1);
        } else if (key == "height") {
          m.height = parse_int(where, value, 1);
        } else if (key == "block") {
          m.block = parse_int(where, value, 2);
        } else if (key == "kernel") {
          m.kernels = split_list(value, ',');
          if (m.kernels.empty()) throw Error(Errc::InvalidArgument, where + " is empty");
        } else if (key == "iterations") {
          m.iterations = parse_int(where, value, 1);
        } else if (key == "monitoring") {
          if (value == "on") {
            m.monitoring = Monitoring::On;
          } else if (value == "off") {
            m.monitoring = Monitoring::Off;
          } else if (value == "both") {
            m.monitoring = Monitoring::Both;
          } else {
            throw Error(Errc::InvalidArgument, where + " must be on, off or both");
          }
        } else if (key == "output") {
          m.output = resolve(value);
        } else if (key == "base_address") {
          m.base_address = parse_address(value);
        } else if (key == "fu_monitors") {
          m.fu_monitors = parse_bool(where, value);
        } else {
          throw Error(Errc::InvalidArgument, "unknown key " + where);
        }
      } else if (section == "events") {
        if (key == "sw") {
          m.sw_events = split_list(value, ',');
        } else if (key == "hw") {
          m.hw_events = split_list(value, ',');
        } else if (key == "actors") {
          m.monitored_actors = split_list(value, ',');
        } else {
          throw Error(Errc::InvalidArgument, "unknown key " + where);
        }
      } else if (section == "mapping") {
        if (key == "colocate") {
          for (const auto &group : split_list(value, ';')) m.colocate.push_back(split_words(group));
        } else {
          auto &pes = m.allowed[key];
          for (const auto &pe : split_list(value, ',')) pes.insert(parse_int(where, pe, 0));
        }
      } else {
        throw Error(Errc::InvalidArgument, "unknown section [" + section + "]");
      }
    }
  }
  if (!have_merged) throw Error(Errc::InvalidArgument, "[run] merged is required");
  if (!have_ctab) throw Error(Errc::InvalidArgument, "[run] ctab is required");
  if (m.monitoring == Monitoring::Both && m.iterations < 3) {
    throw Error(Errc::InvalidArgument, "monitoring = both needs iterations >= 3");
  }
  must_exist(m.merged_xdf);
  must_exist(m.ctab);
  if (!m.mdc_info.empty()) must_exist(m.mdc_info);
  if (!m.frames.empty()) must_exist(m.frames);
  return m;
}

std::vector<ActorSummary> summarize(const std::vector<papify::CsvTrace> &traces) {
  std::map<std::string, ActorSummary> by_actor;
  for (const auto &t : traces) {
    for (const auto &row : t.rows) {
      auto &s = by_actor[row.actor];
      s.actor = row.actor;
      const auto d = row.t_stop - row.t_start;
      ++s.count;
      s.total_ns += d;
      s.max_ns = std::max(s.max_ns, d);
      for (std::size_t i = 0; i < row.values.size(); ++i) {
        if (row.values[i]) s.event_totals[t.event_names[i]] += *row.values[i];
      }
    }
  }
  std::vector<ActorSummary> out;
  for (auto &[name, s] : by_actor) {
    s.mean_ns = static_cast<double>(s.total_ns) / static_cast<double>(s.count);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<papify::CsvTrace> load_traces(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::IoError, "no such directory: " + dir.string());
  auto root = dir;
  if (fs::is_directory(dir / "papify-output")) root = dir / "papify-output";
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<papify::CsvTrace> out;
  for (const auto &f : files) out.push_back(papify::read_csv_trace(f));
  return out;
}

namespace {

struct MergeArgs {
  fs::path out_dir;
  std::vector<std::string> files;
  std::string base_address = "0x43c00000";
  bool fu_monitors = false;
};

int cmd_merge(const MergeArgs &args, std::ostream &out) {
  std::vector<dataflow::DataflowGraph> graphs;
  for (const auto &f : args.files) {
    if (!fs::exists(f)) throw InputError("no such file: " + f);
    try {
      graphs.push_back(dataflow::parse_xdf(read_text(f)));
    } catch (const Error &e) {
      throw InputError(f + ": " + e.what());
    }
  }
  std::uint32_t base = 0;
  try {
    base = parse_address(args.base_address);
  } catch (const Error &e) {
    throw InputError(e.what());
  }
  const auto merged = merge::merge(graphs);
  device::VrcDevice dev(merged, {.base_address = base, .fu_monitors = args.fu_monitors});
  fs::create_directories(args.out_dir);
  write_text(args.out_dir / "merged.xdf", dataflow::serialize_xdf(merged.network.graph));
  write_text(args.out_dir / "ctab.txt", merge::write_ctab(merged));
  write_text(args.out_dir / "mdcInfo.xml", driver::emit_mdc_info(dev));
  out << "merged " << graphs.size() << " network(s) into " << merged.network.graph.name << ": "
      << merged.network.functional_actor_count() << " functional actors, "
      << merged.network.sbox_list.size() << " switching elements, " << merged.table.rows.size()
      << " configuration(s), " << dev.event_catalog().size() << " monitor events\n";
  out << "wrote " << (args.out_dir / "merged.xdf").string() << ", " << (args.out_dir / "ctab.txt").string()
      << ", " << (args.out_dir / "mdcInfo.xml").string() << "\n";
  return kExitOk;
}

void rate_stats(const std::vector<double> &rates, double &mean, double &sd) {
  mean = rates.empty() ? 0 : std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  double sq = 0;
  for (double r : rates) sq += (r - mean) * (r - mean);
  sd = rates.size() > 1 ? std::sqrt(sq / static_cast<double>(rates.size() - 1)) : 0;
}

void print_row(std::ostream &out, const std::string &design, int n, double fps, double sd,
               const std::string &overhead) {
  out << std::left << std::setw(14) << design << std::right << std::setw(11) << n << std::setw(12)
      << std::fixed << std::setprecision(2) << fps << std::setw(10) << sd << std::setw(11) << overhead << "\n";
}

int cmd_run(const fs::path &manifest_path, std::ostream &out, std::ostream &err) {
  RunManifest m;
  merge::MergeResult merged;
  try {
    m = load_manifest(manifest_path);
    merged = merge::load_merged(read_text(m.merged_xdf), read_text(m.ctab));
  } catch (const Error &e) {
    throw InputError(e.what());
  }
  device::VrcDevice dev(merged, {.base_address = m.base_address, .fu_monitors = m.fu_monitors});
  auto counters = std::make_shared<papify::SoftwareCoreComponent>();
  const auto platform = runtime::assessment_platform(dev, counters);
  papify::EventLib lib;
  lib.register_component(counters);
  std::size_t frame_count = 0;
  try {
    const auto info = m.mdc_info.empty() ? driver::emit_mdc_info(dev) : read_text(m.mdc_info);
    lib.register_component(papify::load_mdc_component(info, dev));
    for (const auto &k : m.kernels) driver::find_driver(platform.accelerators[0].drivers, k);
    if (!m.frames.empty()) {
      frame_count = edgedetect::yuv420_frame_count(m.frames, m.width, m.height);
      if (frame_count == 0) throw Error(Errc::IoError, m.frames.string() + " holds no complete frame");
    }
  } catch (const Error &e) {
    throw InputError(e.what());
  }

  fs::create_directories(m.output);
  const auto frames_out = m.output / "output.yuv";
  fs::remove(frames_out);
  std::map<std::uint64_t, edgedetect::YuvFrame> kept;
  bool keep_in_memory = false;

  runtime::AssessmentParams params;
  params.width = m.width;
  params.height = m.height;
  params.block = m.block;
  params.frames = [&](std::uint64_t it) {
    if (m.frames.empty()) return runtime::synthetic_frame(m.width, m.height, m.seed + it);
    return edgedetect::read_yuv420_frame(m.frames, m.width, m.height, static_cast<int>(it % frame_count));
  };
  params.kernel = [&](std::uint64_t it) { return m.kernels[it % m.kernels.size()]; };
  params.display = [&](std::uint64_t it, const edgedetect::YuvFrame &f, const std::string &) {
    if (keep_in_memory) {
      kept[it] = f;
    } else {
      edgedetect::append_yuv420_frame(f, frames_out);
    }
  };
  runtime::AppGraph app;
  runtime::Mapping mapping;
  try {
    app = runtime::build_assessment_app(params);
    runtime::Constraints constraints;
    if (m.allowed.empty() && m.colocate.empty()) {
      constraints = runtime::assessment_constraints(platform);
    } else {
      constraints.allowed = m.allowed;
      constraints.colocate = m.colocate;
    }
    mapping = runtime::map_actors(app, platform, constraints);
    if (m.monitoring != Monitoring::Off) {
      runtime::configure_monitoring(lib, app, platform, m.sw_events, m.hw_events, m.monitored_actors);
    }
  } catch (const Error &e) {
    throw InputError(e.what());
  }

  nlohmann::json reports = nlohmann::json::array();
  std::vector<double> rates;
  std::optional<runtime::OverheadResult> overhead;
  bool identical = true;
  if (m.monitoring == Monitoring::Both) {
    std::uint64_t on = 0;
    std::uint64_t off = 0;
    overhead = runtime::measure_overhead(
        [&](bool monitored) {
          runtime::ExecuteOptions opt;
          opt.iteration = monitored ? on++ : off++;
          opt.monitor = monitored ? &lib : nullptr;
          keep_in_memory = !monitored;
          const auto r = runtime::execute_iteration(app, platform, mapping, opt);
          reports.push_back(r.to_json());
        },
        m.iterations);
    // Compare the unmonitored frames against the ones written by the monitored arm.
    for (int it = 0; it < m.iterations; ++it) {
      const auto shown = edgedetect::read_yuv420_frame(frames_out, m.width, m.height, it);
      identical = identical && kept.at(static_cast<std::uint64_t>(it)) == shown;
    }
  } else {
    for (int it = 0; it < m.iterations; ++it) {
      runtime::ExecuteOptions opt;
      opt.iteration = static_cast<std::uint64_t>(it);
      opt.monitor = m.monitoring == Monitoring::On ? &lib : nullptr;
      const auto r = runtime::execute_iteration(app, platform, mapping, opt);
      rates.push_back(1e9 / static_cast<double>(std::max<std::uint64_t>(r.wall_ns, 1)));
      reports.push_back(r.to_json());
    }
  }

  std::size_t rows = 0;
  if (m.monitoring != Monitoring::Off) {
    lib.flush_csv(m.output);
    rows = lib.record_count();
  }
  nlohmann::json summary{{"iterations", m.iterations},
                         {"firings_per_iteration", app.firings_per_iteration()},
                         {"trace_rows", rows}};
  out << "design           iterations         FpS   St. Dev   Overhead\n";
  if (overhead) {
    print_row(out, "monitored", m.iterations, overhead->rate_monitored, overhead->stddev_monitored,
              [&] {
                std::ostringstream s;
                s << std::fixed << std::setprecision(2) << overhead->overhead_percent << "%";
                return s.str();
              }());
    print_row(out, "unmonitored", m.iterations, overhead->rate_unmonitored, overhead->stddev_unmonitored, "-");
    summary["fps_monitored"] = overhead->rate_monitored;
    summary["fps_unmonitored"] = overhead->rate_unmonitored;
    summary["stddev_monitored"] = overhead->stddev_monitored;
    summary["stddev_unmonitored"] = overhead->stddev_unmonitored;
    summary["overhead_percent"] = overhead->overhead_percent;
    summary["outputs_identical"] = identical;
  } else {
    double fps = 0;
    double sd = 0;
    rate_stats(rates, fps, sd);
    print_row(out, m.monitoring == Monitoring::On ? "monitored" : "unmonitored", m.iterations, fps, sd, "-");
    summary["fps"] = fps;
    summary["stddev"] = sd;
  }
  out << std::defaultfloat;
  out << "actor firings per iteration: " << app.firings_per_iteration() << "\n";
  out << "trace rows written: " << rows << "\n";
  if (overhead) out << "outputs identical across arms: " << (identical ? "yes" : "no") << "\n";
  write_text(m.output / "report.json", nlohmann::json{{"summary", summary}, {"iterations", reports}}.dump(1) + "\n");
  out << "wrote " << (m.output / "report.json").string() << "\n";
  if (!identical) {
    err << "vrcmon: monitored and unmonitored outputs differ\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_report(const fs::path &dir, const std::string &event, std::ostream &out) {
  std::vector<papify::CsvTrace> traces;
  try {
    traces = load_traces(dir);
  } catch (const Error &e) {
    throw InputError(e.what());
  }
  const auto summary = summarize(traces);
  std::set<std::string> events;
  for (const auto &t : traces) events.insert(t.event_names.begin(), t.event_names.end());
  if (!event.empty() && events.count(event) == 0) throw InputError("no event '" + event + "' in " + dir.string());

  out << std::left << std::setw(22) << "actor" << std::right << std::setw(8) << "count" << std::setw(14)
      << "mean_ns" << std::setw(14) << "max_ns";
  for (const auto &e : events) out << std::setw(std::max<int>(16, static_cast<int>(e.size()) + 2)) << e;
  out << "\n";
  for (const auto &s : summary) {
    out << std::left << std::setw(22) << s.actor << std::right << std::setw(8) << s.count << std::setw(14)
        << std::fixed << std::setprecision(1) << s.mean_ns << std::setw(14) << s.max_ns;
    for (const auto &e : events) {
      const int w = std::max<int>(16, static_cast<int>(e.size()) + 2);
      auto it = s.event_totals.find(e);
      if (it == s.event_totals.end()) {
        out << std::setw(w) << "-";
      } else {
        out << std::setw(w) << it->second;
      }
    }
    out << "\n";
  }
  if (!summary.empty()) {
    auto slow = summary;
    std::stable_sort(slow.begin(), slow.end(), [](const auto &a, const auto &b) { return a.mean_ns > b.mean_ns; });
    out << "slowest:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, slow.size()); ++i) out << (i ? ", " : " ") << slow[i].actor;
    out << "\n";
  }
  if (!event.empty()) {
    struct Point {
      std::uint64_t t_start, t_stop, value;
      std::string actor, pe;
    };
    std::vector<Point> points;
    for (const auto &t : traces) {
      const auto col = std::find(t.event_names.begin(), t.event_names.end(), event) - t.event_names.begin();
      if (col == static_cast<std::ptrdiff_t>(t.event_names.size())) continue;
      for (const auto &r : t.rows) {
        if (r.values[col]) points.push_back({r.t_start, r.t_stop, *r.values[col], r.actor, r.pe});
      }
    }
    std::stable_sort(points.begin(), points.end(), [](const auto &a, const auto &b) { return a.t_start < b.t_start; });
    out << "timeline " << event << "\n";
    out << "tstart,tstop,actor,PE,value\n";
    for (const auto &p : points) {
      out << p.t_start << "," << p.t_stop << "," << p.actor << "," << p.pe << "," << p.value << "\n";
    }
  }
  return kExitOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Merge dataflow networks, run the monitored application and summarize traces", "vrcmon"};
  app.require_subcommand(1);

  MergeArgs merge_args;
  auto *merge_cmd = app.add_subcommand("merge", "Merge XDF networks into merged.xdf, ctab.txt and mdcInfo.xml");
  merge_cmd->add_option("-o,--output", merge_args.out_dir, "Output directory")->required();
  merge_cmd->add_option("files", merge_args.files, "Input XDF files")->required();
  merge_cmd->add_option("--base-address", merge_args.base_address, "Accelerator base address");
  merge_cmd->add_flag("--fu-monitors", merge_args.fu_monitors, "Add per-actor firing monitors");

  fs::path manifest;
  auto *run_cmd = app.add_subcommand("run", "Run the application described by a manifest");
  run_cmd->add_option("-m,--manifest", manifest, "Run manifest")->required();

  fs::path trace_dir;
  std::string event;
  auto *report_cmd = app.add_subcommand("report", "Summarize CSV traces");
  report_cmd->add_option("dir", trace_dir, "Trace directory")->required();
  report_cmd->add_option("--event", event, "Also dump the timeline of one event");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*merge_cmd) return cmd_merge(merge_args, out);
    if (*run_cmd) return cmd_run(manifest, out, err);
    if (*report_cmd) return cmd_report(trace_dir, event, out);
  } catch (const InputError &e) {
    err << "vrcmon: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "vrcmon: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv{"vrcmon"};
  for (const auto &a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace vrcmon::cli
