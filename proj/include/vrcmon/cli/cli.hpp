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

#include "vrcmon/papify/papify.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace vrcmon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

enum class Monitoring { On, Off, Both };

/// Key-value run description; relative paths resolve against the manifest's
/// directory. See docs/manifest.md.
struct RunManifest {
  std::filesystem::path merged_xdf;
  std::filesystem::path ctab;
  /// Generated from the device when empty.
  std::filesystem::path mdc_info;
  /// Empty for synthetic frames.
  std::filesystem::path frames;
  std::uint64_t seed = 1;
  int width = 352;
  int height = 288;
  int block = 32;
  /// Configuration names cycled over iterations.
  std::vector<std::string> kernels{"roberts"};
  int iterations = 1;
  Monitoring monitoring = Monitoring::On;
  std::filesystem::path output = "out";
  std::uint32_t base_address = 0x43c00000;
  bool fu_monitors = false;
  std::vector<std::string> sw_events{"PAPI_TOT_CYC", "PAPI_TOT_INS"};
  std::vector<std::string> hw_events{"MDC_CLOCK_CYCLE", "MDC_OUTPUT_TOKENS"};
  /// Monitored actors; empty means all.
  std::vector<std::string> monitored_actors;
  /// Actor (or `*`) -> allowed pe ids; empty uses the assessment constraints.
  std::map<std::string, std::set<int>> allowed;
  std::vector<std::vector<std::string>> colocate;
};

/// Errors: IoError (missing manifest, naming the path); InvalidArgument
/// (unknown keys, bad values, unaligned base address, missing files).
RunManifest load_manifest(const std::filesystem::path &path);

struct ActorSummary {
  std::string actor;
  std::uint64_t count = 0;
  double mean_ns = 0;
  std::uint64_t max_ns = 0;
  std::uint64_t total_ns = 0;
  /// Sum of each event over the rows that carry it.
  std::map<std::string, std::uint64_t> event_totals;
};

/// Per-actor aggregates, ordered by actor name.
std::vector<ActorSummary> summarize(const std::vector<papify::CsvTrace> &traces);

/// Reads every `*.csv` of `dir`, or of `dir/papify-output` when present.
/// Errors: IoError; SchemaViolation.
std::vector<papify::CsvTrace> load_traces(const std::filesystem::path &dir);

/// `vrcmon merge|run|report`; returns the process exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace vrcmon::cli
