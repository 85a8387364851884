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

#include "vrcmon/edgedetect/edgedetect.hpp"
#include "vrcmon/runtime/runtime.hpp"

#include <functional>
#include <string>

namespace vrcmon::runtime {

/// Sobel/Roberts block-filtering application: a YUV frame is read, its Y
/// plane split into blocks that are filtered one by one on the accelerator,
/// then merged back and displayed.
struct AssessmentParams {
  int width = 352;
  int height = 288;
  int block = 32;
  /// Frame for an iteration.
  std::function<edgedetect::YuvFrame(std::uint64_t iteration)> frames;
  /// Accelerator configuration (kernel name) for an iteration.
  std::function<std::string(std::uint64_t iteration)> kernel;
  /// Receives the filtered frame and the kernel it was filtered with.
  std::function<void(std::uint64_t iteration, const edgedetect::YuvFrame &, const std::string &)> display;
};

inline constexpr std::string_view kHwFilter = "EdgeMDC_hw_filter";

/// Errors: NotDivisible when the frame is not a whole number of blocks;
/// InvalidArgument when a callback is missing.
AppGraph build_assessment_app(const AssessmentParams &params);

/// {display, Read_YUV} on the first core, every other sw actor on the
/// second, the filter on the accelerator, Split and Merge together.
Constraints assessment_constraints(const Platform &platform);

/// Two cores "Core0" (pe 0) and "Core1" (pe 1) plus "ACC0" (pe 2) wrapping
/// the device with generated drivers.
Platform assessment_platform(device::VrcDevice &device,
                             std::shared_ptr<papify::SoftwareCoreComponent> core_counters = nullptr);

/// Deterministic test pattern: gradients, rectangles and noise.
edgedetect::YuvFrame synthetic_frame(int width, int height, std::uint64_t seed);

/// Reference output: each block filtered independently by the oracle.
edgedetect::Image reference_filter(const edgedetect::Image &y, const std::string &kernel, int block = 32);

} // namespace vrcmon::runtime
