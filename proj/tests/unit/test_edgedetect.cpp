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

#include "support/edge_oracle.hpp"

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/validate.hpp"
#include "vrcmon/dataflow/xdf.hpp"
#include "vrcmon/device/engine.hpp"
#include "vrcmon/edgedetect/edgedetect.hpp"
#include "vrcmon/merge/merger.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace vrcmon;
using namespace vrcmon::edgedetect;

namespace {

Image from_plane(const testing::Plane &p) {
  Image img(p.w, p.h);
  img.data = p.px;
  return img;
}

std::string read_file(const std::string &name) {
  std::ifstream in(std::string(VRCMON_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string &leaf) {
  auto dir = std::filesystem::temp_directory_path() / "vrcmon_edgedetect_test";
  std::filesystem::create_directories(dir);
  return dir / leaf;
}

} // namespace

TEST_CASE("canonical coefficients") {
  const auto s = KernelSpec::sobel();
  CHECK(s.gx(0, 0) == -1);
  CHECK(s.gx(1, 2) == 2);
  CHECK(s.gy(0, 1) == 2);
  CHECK(s.gy(2, 1) == -2);
  CHECK(s.n == 3);
  const auto r = KernelSpec::roberts();
  CHECK(r.gx(1, 1) == -1);
  CHECK(r.gy(1, 0) == -1);
  CHECK(r.n == 0);
  CHECK(r.threshold == 80);
}

TEST_CASE("constant image gives all-zero output") {
  const Image flat(32, 32, 128);
  for (auto spec : {KernelSpec::sobel(), KernelSpec::roberts()}) {
    const auto out = oracle_edge_detect(flat, spec);
    CHECK(out == Image(32, 32, 0));
    CHECK(run_graph(build_kernel_graph(spec), flat) == Image(32, 32, 0));
  }
}

TEST_CASE("magnitude equal to the threshold is not an edge") {
  Image at(2, 2, 0);
  at.at(0, 0) = 80;
  CHECK(oracle_edge_detect(at, KernelSpec::roberts()).at(0, 0) == 0);
  at.at(0, 0) = 81;
  CHECK(oracle_edge_detect(at, KernelSpec::roberts()).at(0, 0) == 255);
  const auto g = build_kernel_graph(KernelSpec::roberts());
  at.at(0, 0) = 80;
  CHECK(run_graph(g, at).at(0, 0) == 0);
}

TEST_CASE("vertical step edge, Roberts, hand-computed golden") {
  Image step(8, 8, 0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 4; c < 8; ++c) step.at(r, c) = 255;
  }
  // Only the window straddling columns 3|4 sees a gradient:
  // |0 - 255| + |255 - 0| = 510 > 80. Last row and column are border.
  const char *golden[8] = {"...#....", "...#....", "...#....", "...#....",
                           "...#....", "...#....", "...#....", "........"};
  const auto out = oracle_edge_detect(step, KernelSpec::roberts());
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      CHECK(out.at(r, c) == (golden[r][c] == '#' ? 255 : 0));
    }
  }
  CHECK(run_graph(build_kernel_graph(KernelSpec::roberts()), step) == out);
}

TEST_CASE("too small image") {
  CHECK_THROWS_AS(oracle_edge_detect(Image(2, 2), KernelSpec::sobel()), Error);
  CHECK_THROWS_AS(oracle_edge_detect(Image(1, 5), KernelSpec::roberts()), Error);
}

TEST_CASE("library oracle agrees with the naive filter") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> dim(3, 40);
  for (int t = 0; t < 40; ++t) {
    const auto p = testing::random_plane(rng, dim(rng), dim(rng));
    CHECK(oracle_edge_detect(from_plane(p), KernelSpec::sobel()).data ==
          testing::naive_edges(p, 3, 3, 80).px);
    CHECK(oracle_edge_detect(from_plane(p), KernelSpec::roberts()).data ==
          testing::naive_edges(p, 2, 0, 80).px);
  }
}

TEST_CASE("graphs match the oracle on random images") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(3, 48);
  const auto sobel = build_kernel_graph(KernelSpec::sobel());
  const auto roberts = build_kernel_graph(KernelSpec::roberts());
  for (int t = 0; t < 25; ++t) {
    const auto p = testing::random_plane(rng, dim(rng), dim(rng));
    const auto img = from_plane(p);
    CHECK(run_graph(sobel, img).data == testing::naive_edges(p, 3, 3, 80).px);
    CHECK(run_graph(roberts, img).data == testing::naive_edges(p, 2, 0, 80).px);
  }
}

TEST_CASE("non-default n and threshold flow into the graph") {
  std::mt19937 rng(3);
  const auto p = testing::random_plane(rng, 20, 17);
  const auto spec = KernelSpec::sobel(1, 200);
  CHECK(run_graph(build_kernel_graph(spec), from_plane(p)).data ==
        testing::naive_edges(p, 3, 1, 200).px);
}

TEST_CASE("graph builders match the hand transcriptions") {
  const auto roberts = build_kernel_graph(KernelSpec::roberts());
  const auto sobel = build_kernel_graph(KernelSpec::sobel());
  CHECK(dataflow::validate(roberts).empty());
  CHECK(dataflow::validate(sobel).empty());
  CHECK(merge::structurally_equal(roberts, dataflow::parse_xdf(read_file("roberts.xdf"))));
  CHECK(merge::structurally_equal(sobel, dataflow::parse_xdf(read_file("sobel.xdf"))));
  std::map<std::string, int> kinds;
  for (const auto &a : roberts.actors) ++kinds[a.kind];
  CHECK(kinds == std::map<std::string, int>{{"line_buffer", 1}, {"delay", 2}, {"conv", 2},
                                            {"abs_sum", 1}, {"thr", 1}});
  int line_buffers = 0;
  for (const auto &a : sobel.actors) line_buffers += a.kind == "line_buffer";
  CHECK(line_buffers == 2);
}

TEST_CASE("thr fires once per pixel") {
  std::mt19937 rng(5);
  const auto img = from_plane(testing::random_plane(rng, 32, 32));
  device::SimulationOptions opt;
  opt.expected = std::map<std::string, std::uint64_t>{{"out_data", 1024}};
  const auto r = device::simulate(build_kernel_graph(KernelSpec::roberts()), graph_inputs(img), opt);
  CHECK(r.firings.at("thr") == 1024);
  CHECK(r.outputs.at("out_data").size() == 1024);
}

TEST_CASE("block split and merge") {
  Image frame(352, 288);
  for (std::size_t i = 0; i < frame.data.size(); ++i) frame.data[i] = static_cast<std::uint8_t>(i * 7 + i / 352);
  const auto blocks = split_blocks(frame);
  CHECK(blocks.size() == 99);
  CHECK(blocks[1].at(0, 0) == frame.at(0, 32));
  CHECK(blocks[11].at(0, 0) == frame.at(32, 0));
  CHECK(merge_blocks(blocks, 352, 288) == frame);
  CHECK(split_blocks(Image(32, 32)).size() == 1);
  CHECK_THROWS_AS(split_blocks(Image(33, 32)), Error);
  CHECK_THROWS_AS(merge_blocks(blocks, 352, 320), Error);
}

TEST_CASE("PGM and YUV round trips") {
  std::mt19937 rng(9);
  const auto img = from_plane(testing::random_plane(rng, 13, 7));
  write_pgm(img, scratch("a.pgm"));
  CHECK(read_pgm(scratch("a.pgm")) == img);

  const auto path = scratch("v.yuv");
  std::filesystem::remove(path);
  YuvFrame f;
  f.y = Image(16, 8, 40);
  f.u.assign(32, 1);
  f.v.assign(32, 2);
  append_yuv420_frame(f, path);
  f.y.at(3, 3) = 99;
  append_yuv420_frame(f, path);
  CHECK(yuv420_frame_count(path, 16, 8) == 2);
  CHECK(read_yuv420_frame(path, 16, 8, 1) == f);
  CHECK(read_yuv420_frame(path, 16, 8, 0).y.at(3, 3) == 40);
  CHECK_THROWS_AS(read_yuv420_frame(path, 16, 8, 2), Error);
  CHECK_THROWS_AS(read_pgm(scratch("missing.pgm")), Error);
  CHECK(read_raw_y(path, 16, 8).at(0, 0) == 40);
}
