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

#include "vrcmon/edgedetect/edgedetect.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/builder.hpp"
#include "vrcmon/device/engine.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vrcmon::edgedetect {

std::string_view to_string(Kernel k) { return k == Kernel::Sobel ? "sobel" : "roberts"; }

Kernel parse_kernel(std::string_view name) {
  if (name == "sobel") return Kernel::Sobel;
  if (name == "roberts") return Kernel::Roberts;
  throw Error(Errc::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

KernelSpec KernelSpec::sobel(int n, int threshold) {
  KernelSpec s;
  s.kernel = Kernel::Sobel;
  s.gx.resize(3, 3);
  s.gx << -1, 0, 1,
          -2, 0, 2,
          -1, 0, 1;
  s.gy = -s.gx.transpose();
  s.n = n;
  s.threshold = threshold;
  return s;
}

KernelSpec KernelSpec::roberts(int n, int threshold) {
  KernelSpec s;
  s.kernel = Kernel::Roberts;
  s.gx.resize(2, 2);
  s.gx << 1, 0,
          0, -1;
  s.gy.resize(2, 2);
  s.gy << 0, 1,
         -1, 0;
  s.n = n;
  s.threshold = threshold;
  return s;
}

KernelSpec KernelSpec::of(Kernel k) { return k == Kernel::Sobel ? sobel() : roberts(); }

namespace {

/// Window origin relative to the anchor pixel.
int anchor(const KernelSpec &spec) { return spec.gx.rows() == 3 ? -1 : 0; }

} // namespace

Image oracle_edge_detect(const Image &img, const KernelSpec &spec) {
  const int k = static_cast<int>(spec.gx.rows());
  if (img.width < k || img.height < k || img.data.empty()) {
    throw Error(Errc::TooSmall, "image " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + " smaller than the kernel");
  }
  const int a = anchor(spec);
  Eigen::Map<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      pixels(img.data.data(), img.height, img.width);
  const Eigen::MatrixXi plane = pixels.cast<int>();

  Image out(img.width, img.height, 0);
  for (int r = -a; r + a + k <= img.height; ++r) {
    for (int c = -a; c + a + k <= img.width; ++c) {
      const auto window = plane.block(r + a, c + a, k, k);
      const long gx = window.cwiseProduct(spec.gx).sum();
      const long gy = window.cwiseProduct(spec.gy).sum();
      const long g = (std::labs(gx) + std::labs(gy)) >> spec.n;
      out.at(r, c) = g > spec.threshold ? 255 : 0;
    }
  }
  return out;
}

dataflow::DataflowGraph build_kernel_graph(const KernelSpec &spec) {
  const int k = static_cast<int>(spec.gx.rows());
  const std::string prefix = spec.name() + "_";
  const std::string abs_sum = "abs_sum_n" + std::to_string(spec.n);
  dataflow::GraphBuilder b(spec.name());
  b.output("out_data", 8).input("in_data", 8).input("in_size", 16);

  // Rows r (and r+1) come from a look-ahead line buffer; Sobel adds a lagged
  // one for row r-1.
  b.actor("line_buffer_0", "line_buffer", {{"offset", 1}, {"fwd", 1}});
  b.connect("in_size", "line_buffer_0.size").connect("in_data", "line_buffer_0.in");

  std::vector<std::string> row_sources;
  std::string size_from;
  if (k == 3) {
    const auto lb1 = prefix + "line_buffer_1";
    b.actor(lb1, "line_buffer", {{"offset", -1}, {"fwd", 1}});
    b.connect("line_buffer_0.size_out", lb1 + ".size").connect("line_buffer_0.cur", lb1 + ".in");
    row_sources = {lb1 + ".shifted", lb1 + ".cur", "line_buffer_0.shifted"};
    size_from = lb1 + ".size_out";
  } else {
    row_sources = {"line_buffer_0.cur", "line_buffer_0.shifted"};
    size_from = "line_buffer_0.size_out";
  }

  const int before = -anchor(spec);
  const int after = k - 1 - before;
  dataflow::Params gx, gy;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      gx["c" + std::to_string(i * k + j)] = spec.gx(i, j);
      gy["c" + std::to_string(i * k + j)] = spec.gy(i, j);
    }
  }
  b.actor(prefix + "conv_x", "conv", gx).actor(prefix + "conv_y", "conv", gy);

  for (int i = 0; i < k; ++i) {
    const auto d = prefix + "delay_" + std::to_string(i);
    const bool last = i == k - 1;
    b.actor(d, "delay",
            {{"left", before}, {"right", after}, {"top", before}, {"bottom", after},
             {"fwd", last ? 0 : 1}});
    b.connect(row_sources[static_cast<std::size_t>(i)], d + ".in").connect(size_from, d + ".size");
    size_from = d + ".size_out";
    for (int j = 0; j < k; ++j) {
      const auto w = ".w" + std::to_string(i * k + j);
      b.connect(d + ".x" + std::to_string(j), prefix + "conv_x" + w);
      b.connect(d + ".y" + std::to_string(j), prefix + "conv_y" + w);
    }
  }

  b.actor(abs_sum, "abs_sum", {{"n", spec.n}});
  b.actor("thr", "thr", {{"threshold", spec.threshold}});
  b.connect(prefix + "conv_x.out", abs_sum + ".gx").connect(prefix + "conv_y.out", abs_sum + ".gy");
  b.connect(abs_sum + ".out", "thr.in").connect("thr.out", "out_data");
  return b.build();
}

std::map<std::string, std::vector<dataflow::Token>> graph_inputs(const Image &img) {
  return {{"in_size", {img.height, img.width}},
          {"in_data", std::vector<dataflow::Token>(img.data.begin(), img.data.end())}};
}

Image run_graph(const dataflow::DataflowGraph &graph, const Image &img) {
  device::SimulationOptions options;
  options.expected = std::map<std::string, std::uint64_t>{
      {"out_data", static_cast<std::uint64_t>(img.width) * static_cast<std::uint64_t>(img.height)}};
  const auto result = device::simulate(graph, graph_inputs(img), options);
  Image out(img.width, img.height);
  const auto &words = result.outputs.at("out_data");
  for (std::size_t i = 0; i < words.size(); ++i) out.data[i] = static_cast<std::uint8_t>(words[i]);
  return out;
}

std::vector<Image> split_blocks(const Image &img, int block_w, int block_h) {
  if (block_w <= 0 || block_h <= 0 || img.width % block_w != 0 || img.height % block_h != 0) {
    throw Error(Errc::NotDivisible, std::to_string(img.width) + "x" + std::to_string(img.height) +
                                        " is not a multiple of " + std::to_string(block_w) + "x" +
                                        std::to_string(block_h));
  }
  std::vector<Image> blocks;
  for (int by = 0; by < img.height; by += block_h) {
    for (int bx = 0; bx < img.width; bx += block_w) {
      Image b(block_w, block_h);
      for (int r = 0; r < block_h; ++r) {
        for (int c = 0; c < block_w; ++c) b.at(r, c) = img.at(by + r, bx + c);
      }
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

Image merge_blocks(const std::vector<Image> &blocks, int width, int height) {
  if (blocks.empty()) throw Error(Errc::SizeMismatch, "no blocks to merge");
  const int bw = blocks[0].width;
  const int bh = blocks[0].height;
  if (bw <= 0 || bh <= 0 || width % bw != 0 || height % bh != 0 ||
      static_cast<std::size_t>((width / bw) * (height / bh)) != blocks.size()) {
    throw Error(Errc::SizeMismatch, std::to_string(blocks.size()) + " blocks do not tile " +
                                        std::to_string(width) + "x" + std::to_string(height));
  }
  Image out(width, height);
  const int per_row = width / bw;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto &b = blocks[i];
    if (b.width != bw || b.height != bh) throw Error(Errc::SizeMismatch, "blocks differ in size");
    const int by = static_cast<int>(i) / per_row * bh;
    const int bx = static_cast<int>(i) % per_row * bw;
    for (int r = 0; r < bh; ++r) {
      for (int c = 0; c < bw; ++c) out.at(by + r, bx + c) = b.at(r, c);
    }
  }
  return out;
}

namespace {

std::string next_token(std::istream &in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] != '#') return tok;
    std::string rest;
    std::getline(in, rest);
  }
  throw Error(Errc::IoError, "truncated PGM header");
}

} // namespace

Image read_pgm(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(Errc::IoError, path.string() + " is not a binary PGM");
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (maxval != 255 || w <= 0 || h <= 0) {
    throw Error(Errc::IoError, path.string() + ": only 8-bit PGM is supported");
  }
  in.get();
  Image img(w, h);
  in.read(reinterpret_cast<char *>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw Error(Errc::IoError, path.string() + ": truncated pixel data");
  }
  return img;
}

void write_pgm(const Image &img, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char *>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

Image read_raw_y(const std::filesystem::path &path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  Image img(width, height);
  in.read(reinterpret_cast<char *>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw Error(Errc::IoError, path.string() + ": shorter than one " + std::to_string(width) + "x" +
                                   std::to_string(height) + " plane");
  }
  return img;
}

namespace {

std::size_t frame_bytes(int width, int height) {
  const auto y = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  return y + 2 * (y / 4);
}

} // namespace

YuvFrame read_yuv420_frame(const std::filesystem::path &path, int width, int height, int index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const auto bytes = frame_bytes(width, height);
  in.seekg(static_cast<std::streamoff>(bytes) * index);
  YuvFrame f;
  f.y = Image(width, height);
  const auto chroma = f.y.data.size() / 4;
  f.u.resize(chroma);
  f.v.resize(chroma);
  in.read(reinterpret_cast<char *>(f.y.data.data()), static_cast<std::streamsize>(f.y.data.size()));
  in.read(reinterpret_cast<char *>(f.u.data()), static_cast<std::streamsize>(chroma));
  in.read(reinterpret_cast<char *>(f.v.data()), static_cast<std::streamsize>(chroma));
  if (!in) {
    throw Error(Errc::IoError, path.string() + ": frame " + std::to_string(index) + " is incomplete");
  }
  return f;
}

std::size_t yuv420_frame_count(const std::filesystem::path &path, int width, int height) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(Errc::IoError, "cannot stat " + path.string());
  return static_cast<std::size_t>(size / frame_bytes(width, height));
}

void append_yuv420_frame(const YuvFrame &frame, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(frame.y.data.data()), static_cast<std::streamsize>(frame.y.data.size()));
  out.write(reinterpret_cast<const char *>(frame.u.data()), static_cast<std::streamsize>(frame.u.size()));
  out.write(reinterpret_cast<const char *>(frame.v.data()), static_cast<std::streamsize>(frame.v.size()));
}

} // namespace vrcmon::edgedetect
