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

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vrcmon::edgedetect {

/// Row-major 8-bit luma plane.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t &at(int row, int col) { return data[static_cast<std::size_t>(row * width + col)]; }
  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row * width + col)]; }

  bool operator==(const Image &) const = default;
};

enum class Kernel { Sobel, Roberts };

std::string_view to_string(Kernel k);
/// Accepts "sobel" or "roberts"; throws InvalidArgument otherwise.
Kernel parse_kernel(std::string_view name);

struct KernelSpec {
  Kernel kernel = Kernel::Roberts;
  Eigen::MatrixXi gx;
  Eigen::MatrixXi gy;
  int n = 0;
  int threshold = 80;

  /// Canonical coefficients; n defaults to 3 for Sobel and 0 for Roberts.
  static KernelSpec sobel(int n = 3, int threshold = 80);
  static KernelSpec roberts(int n = 0, int threshold = 80);
  static KernelSpec of(Kernel k);

  std::string name() const { return std::string(to_string(kernel)); }
};

/// Reference filter. For each pixel whose kernel window lies inside the
/// image (3x3 centred, 2x2 anchored top-left):
///   g = (|sum gx.*A| + |sum gy.*A|) >> n,  out = g > threshold ? 255 : 0.
/// Every other pixel is 0. Throws TooSmall when the image is smaller than
/// the kernel.
Image oracle_edge_detect(const Image &img, const KernelSpec &spec);

/// Dataflow graph of the filter with ports out_data (8 bit), in_data (8 bit)
/// and in_size (16 bit, carrying [height, width]).
dataflow::DataflowGraph build_kernel_graph(const KernelSpec &spec);

/// Token streams for one image: in_size = [height, width], in_data = pixels.
std::map<std::string, std::vector<dataflow::Token>> graph_inputs(const Image &img);
/// Runs a kernel graph on an image through the token simulator.
Image run_graph(const dataflow::DataflowGraph &graph, const Image &img);

/// Splits into row-major blocks; throws NotDivisible.
std::vector<Image> split_blocks(const Image &img, int block_w = 32, int block_h = 32);
/// Inverse of split_blocks; throws SizeMismatch on a bad block list.
Image merge_blocks(const std::vector<Image> &blocks, int width, int height);

/// Binary PGM (P5, maxval 255).
Image read_pgm(const std::filesystem::path &path);
void write_pgm(const Image &img, const std::filesystem::path &path);
/// Raw width*height luma plane.
Image read_raw_y(const std::filesystem::path &path, int width, int height);

/// Planar 4:2:0 frame; U and V are quarter-size planes.
struct YuvFrame {
  Image y;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> v;

  bool operator==(const YuvFrame &) const = default;
};

/// Reads frame `index` of a planar I420 file; throws IoError when short.
YuvFrame read_yuv420_frame(const std::filesystem::path &path, int width, int height, int index);
std::size_t yuv420_frame_count(const std::filesystem::path &path, int width, int height);
void append_yuv420_frame(const YuvFrame &frame, const std::filesystem::path &path);

} // namespace vrcmon::edgedetect
