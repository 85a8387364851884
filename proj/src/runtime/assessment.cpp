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

#include "vrcmon/runtime/assessment.hpp"

#include "vrcmon/common/error.hpp"

#include <algorithm>
#include <random>

namespace vrcmon::runtime {

using edgedetect::Image;
using edgedetect::YuvFrame;

namespace {

std::uint64_t pixels(const Image &img) { return img.data.size(); }

} // namespace

AppGraph build_assessment_app(const AssessmentParams &params) {
  if (!params.frames || !params.kernel || !params.display) {
    throw Error(Errc::InvalidArgument, "assessment app needs frames, kernel and display callbacks");
  }
  if (params.block <= 0 || params.width <= 0 || params.height <= 0 || params.width % params.block != 0 ||
      params.height % params.block != 0) {
    throw Error(Errc::NotDivisible, std::to_string(params.width) + "x" + std::to_string(params.height) +
                                        " is not a whole number of " + std::to_string(params.block) +
                                        "-pixel blocks");
  }
  const int w = params.width;
  const int h = params.height;
  const int bs = params.block;
  const int blocks = (w / bs) * (h / bs);

  AppGraph app;
  app.name = "sobel_roberts";
  auto add = [&](std::string name, int reps, bool hw, WorkFn fn) {
    app.actors.push_back({std::move(name), reps, hw, std::move(fn)});
  };

  add("Read_YUV", 1, false, [params, w, h](FireContext &ctx) {
    auto frame = params.frames(ctx.iteration());
    if (frame.y.width != w || frame.y.height != h) {
      throw Error(Errc::SizeMismatch, "frame is " + std::to_string(frame.y.width) + "x" +
                                          std::to_string(frame.y.height) + ", expected " +
                                          std::to_string(w) + "x" + std::to_string(h));
    }
    ctx.work(pixels(frame.y) + frame.u.size() + frame.v.size());
    Image y = std::move(frame.y);
    frame.y = Image();
    ctx.output("y", std::move(y));
    ctx.output("uv", std::move(frame));
  });
  add("IdSetter", 1, false, [params](FireContext &ctx) {
    auto kernel = params.kernel(ctx.iteration());
    edgedetect::parse_kernel(kernel);
    ctx.work(1);
    ctx.output("id", std::move(kernel));
  });
  add("Broadcast", 1, false, [blocks](FireContext &ctx) {
    const auto &id = ctx.input_as<std::string>("id");
    ctx.output("init", id);
    ctx.output("display", id);
    for (int i = 0; i < blocks; ++i) ctx.output("hw", id);
    ctx.work(static_cast<std::uint64_t>(blocks) + 2);
  });
  add("Split", 1, false, [](FireContext &ctx) {
    // One slice: the accelerator is the only filtering resource.
    const auto &y = ctx.input_as<Image>("y");
    ctx.work(pixels(y));
    ctx.output("slice", y);
  });
  add("EdgeMDC_1", 1, false, [bs](FireContext &ctx) {
    edgedetect::parse_kernel(ctx.input_as<std::string>("id"));
    const auto &slice = ctx.input_as<Image>("slice");
    ctx.work(pixels(slice));
    for (auto &b : edgedetect::split_blocks(slice, bs, bs)) ctx.output("blocks", std::move(b));
  });
  add("EdgeMDC_2", blocks, false, [](FireContext &ctx) {
    const auto &b = ctx.input_as<Image>("block");
    ctx.work(pixels(b));
    ctx.output("block", b);
  });
  add(std::string(kHwFilter), blocks, true, [](FireContext &ctx) {
    const auto &b = ctx.input_as<Image>("block");
    const auto &kernel = ctx.input_as<std::string>("id");
    auto out = ctx.invoke(kernel,
                          {{"in_size", {b.height, b.width}},
                           {"in_data", driver::Words(b.data.begin(), b.data.end())}},
                          {{"out_data", b.data.size()}});
    ctx.output("result", std::make_pair(std::move(out.at("out_data")), std::make_pair(b.width, b.height)));
  });
  add("EdgeMDC_3", blocks, false, [](FireContext &ctx) {
    const auto &[words, dims] =
        ctx.input_as<std::pair<driver::Words, std::pair<int, int>>>("result");
    Image b(dims.first, dims.second);
    std::transform(words.begin(), words.end(), b.data.begin(),
                   [](std::int32_t v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); });
    ctx.work(pixels(b));
    ctx.output("block", std::move(b));
  });
  add("EdgeMDC_4", 1, false, [w, h](FireContext &ctx) {
    std::vector<Image> parts;
    for (const auto &t : ctx.input("blocks")) parts.push_back(std::any_cast<const Image &>(t));
    auto slice = edgedetect::merge_blocks(parts, w, h);
    ctx.work(pixels(slice));
    ctx.output("slice", std::move(slice));
  });
  add("Merge", 1, false, [](FireContext &ctx) {
    const auto &slice = ctx.input_as<Image>("slice");
    ctx.work(pixels(slice));
    ctx.output("y", slice);
  });
  add("display", 1, false, [params](FireContext &ctx) {
    YuvFrame frame = ctx.input_as<YuvFrame>("uv");
    frame.y = ctx.input_as<Image>("y");
    ctx.work(pixels(frame.y) + frame.u.size() + frame.v.size());
    params.display(ctx.iteration(), frame, ctx.input_as<std::string>("id"));
  });

  const std::string hw(kHwFilter);
  app.edges = {
      {"IdSetter", "id", "Broadcast", "id", 1, 1},
      {"Broadcast", "init", "EdgeMDC_1", "id", 1, 1},
      {"Broadcast", "hw", hw, "id", blocks, 1},
      {"Broadcast", "display", "display", "id", 1, 1},
      {"Read_YUV", "y", "Split", "y", 1, 1},
      {"Read_YUV", "uv", "display", "uv", 1, 1},
      {"Split", "slice", "EdgeMDC_1", "slice", 1, 1},
      {"EdgeMDC_1", "blocks", "EdgeMDC_2", "block", blocks, 1},
      {"EdgeMDC_2", "block", hw, "block", 1, 1},
      {hw, "result", "EdgeMDC_3", "result", 1, 1},
      {"EdgeMDC_3", "block", "EdgeMDC_4", "blocks", 1, blocks},
      {"EdgeMDC_4", "slice", "Merge", "slice", 1, 1},
      {"Merge", "y", "display", "y", 1, 1},
  };
  app.validate();
  return app;
}

Constraints assessment_constraints(const Platform &platform) {
  Constraints c;
  std::vector<int> cores;
  for (const auto &core : platform.cores) cores.push_back(core.pe_id);
  std::sort(cores.begin(), cores.end());
  if (cores.empty()) throw Error(Errc::Unsatisfiable, "platform has no cores");
  const int first = cores.front();
  const int second = cores.size() > 1 ? cores[1] : first;
  c.allowed["display"] = {first};
  c.allowed["Read_YUV"] = {first};
  std::set<int> rest{second};
  for (const auto &a : platform.accelerators) rest.insert(a.pe_id);
  c.allowed[std::string(kAnyActor)] = rest;
  c.colocate = {{"Split", "Merge"}};
  return c;
}

Platform assessment_platform(device::VrcDevice &device,
                             std::shared_ptr<papify::SoftwareCoreComponent> core_counters) {
  Platform p;
  p.cores = {{"Core0", 0}, {"Core1", 1}};
  p.accelerators = {{"ACC0", 2, &device, driver::generate_drivers(device)}};
  p.core_counters = std::move(core_counters);
  return p;
}

YuvFrame synthetic_frame(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-12, 12);
  std::uniform_int_distribution<int> pos(0, std::max(width, height));
  YuvFrame f;
  f.y = Image(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      f.y.at(r, c) = static_cast<std::uint8_t>(std::clamp((r * 255) / std::max(1, height - 1) / 2 + noise(rng), 0, 255));
    }
  }
  for (int k = 0; k < 6; ++k) {
    const int r0 = pos(rng) % height;
    const int c0 = pos(rng) % width;
    const int r1 = std::min(height, r0 + 8 + pos(rng) % std::max(1, height / 2));
    const int c1 = std::min(width, c0 + 8 + pos(rng) % std::max(1, width / 2));
    const auto level = static_cast<std::uint8_t>(pos(rng) % 256);
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) f.y.at(r, c) = level;
    }
  }
  const auto chroma = static_cast<std::size_t>(width / 2) * static_cast<std::size_t>(height / 2);
  f.u.assign(chroma, static_cast<std::uint8_t>(seed % 256));
  f.v.assign(chroma, static_cast<std::uint8_t>((seed * 7 + 128) % 256));
  return f;
}

Image reference_filter(const Image &y, const std::string &kernel, int block) {
  const auto spec = edgedetect::KernelSpec::of(edgedetect::parse_kernel(kernel));
  auto blocks = edgedetect::split_blocks(y, block, block);
  for (auto &b : blocks) b = edgedetect::oracle_edge_detect(b, spec);
  return edgedetect::merge_blocks(blocks, y.width, y.height);
}

} // namespace vrcmon::runtime
