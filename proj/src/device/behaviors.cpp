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

#include "vrcmon/common/error.hpp"
#include "vrcmon/dataflow/kinds.hpp"
#include "vrcmon/device/engine.hpp"

#include <cstdlib>
#include <functional>

namespace vrcmon::device {

namespace {

Token wrap(std::int64_t v) { return static_cast<Token>(v); }

/// Reads the [height, width] header shared by the image actors and forwards
/// it when `fwd` is set.
class SizeHeader {
public:
  SizeHeader(std::size_t in, std::optional<std::size_t> out) : in_(in), out_(out) {}

  bool ready() const { return total_ > 0; }
  std::int64_t height() const { return height_; }
  std::int64_t width() const { return width_; }
  std::int64_t total() const { return total_; }
  void reset() { total_ = 0; }

  bool try_read(FiringContext &ctx) {
    if (ctx.available(in_) < 2) return false;
    if (out_ && ctx.space(*out_) < 2) return false;
    height_ = ctx.pop(in_);
    width_ = ctx.pop(in_);
    if (out_) {
      ctx.push(*out_, wrap(height_));
      ctx.push(*out_, wrap(width_));
    }
    total_ = height_ > 0 && width_ > 0 ? height_ * width_ : 0;
    return true;
  }

private:
  std::size_t in_;
  std::optional<std::size_t> out_;
  std::int64_t height_ = 0;
  std::int64_t width_ = 0;
  std::int64_t total_ = 0;
};

std::optional<std::size_t> fwd_port(const dataflow::Actor &a, std::size_t index) {
  if (a.params.at("fwd") == 0) return std::nullopt;
  return index;
}

/// offset +1: pairs each pixel with the one a row below (0 past the last row).
class LookaheadLine : public Behavior {
public:
  explicit LookaheadLine(const dataflow::Actor &a) : header_(0, fwd_port(a, 2)) {}

  bool fire(FiringContext &ctx) override {
    if (!header_.ready()) return header_.try_read(ctx);
    const auto n = header_.total();
    const auto w = header_.width();
    bool fired = false;
    if (received_ < n && ctx.available(1) > 0 && received_ - emitted_ <= w) {
      buf_.push_back(ctx.pop(1));
      ++received_;
      fired = true;
    }
    const bool ahead = received_ > emitted_ + w || (received_ == n && received_ > emitted_);
    if (ahead && ctx.space(0) > 0 && ctx.space(1) > 0) {
      ctx.push(0, buf_.front());
      ctx.push(1, emitted_ + w < n ? buf_[static_cast<std::size_t>(w)] : 0);
      buf_.pop_front();
      ++emitted_;
      fired = true;
      if (emitted_ == n) restart();
    }
    return fired;
  }

private:
  void restart() {
    header_.reset();
    buf_.clear();
    received_ = emitted_ = 0;
  }

  SizeHeader header_;
  std::deque<Token> buf_;
  std::int64_t received_ = 0;
  std::int64_t emitted_ = 0;
};

/// offset -1: pairs each pixel with the one a row above (0 on the first row).
class LagLine : public Behavior {
public:
  explicit LagLine(const dataflow::Actor &a) : header_(0, fwd_port(a, 2)) {}

  bool fire(FiringContext &ctx) override {
    if (!header_.ready()) return header_.try_read(ctx);
    if (ctx.available(1) == 0 || ctx.space(0) == 0 || ctx.space(1) == 0) return false;
    const Token x = ctx.pop(1);
    history_.push_back(x);
    Token above = 0;
    if (static_cast<std::int64_t>(history_.size()) > header_.width()) {
      above = history_.front();
      history_.pop_front();
    }
    ctx.push(0, x);
    ctx.push(1, above);
    if (++seen_ == header_.total()) {
      header_.reset();
      history_.clear();
      seen_ = 0;
    }
    return true;
  }

private:
  SizeHeader header_;
  std::deque<Token> history_;
  std::int64_t seen_ = 0;
};

/// Emits the horizontal window [c-left, c+right] of every pixel twice (x and
/// y copies). Windows that leave the valid region are emitted as zeros.
class Delay : public Behavior {
public:
  explicit Delay(const dataflow::Actor &a)
      : left_(a.params.at("left")), right_(a.params.at("right")), top_(a.params.at("top")),
        bottom_(a.params.at("bottom")), taps_(static_cast<std::size_t>(left_ + 1 + right_)),
        header_(0, fwd_port(a, 2 * static_cast<std::size_t>(left_ + 1 + right_))) {}

  bool fire(FiringContext &ctx) override {
    if (!header_.ready()) return header_.try_read(ctx);
    const auto n = header_.total();
    bool fired = false;
    if (received_ < n && ctx.available(1) > 0 && received_ - emitted_ <= right_) {
      buf_.push_back(ctx.pop(1));
      ++received_;
      fired = true;
    }
    const bool ready = emitted_ < n && (received_ > emitted_ + right_ || received_ == n);
    if (ready && has_space(ctx)) {
      emit(ctx);
      fired = true;
    }
    return fired;
  }

private:
  bool has_space(const FiringContext &ctx) const {
    for (std::size_t i = 0; i < 2 * taps_; ++i) {
      if (ctx.space(i) == 0) return false;
    }
    return true;
  }

  void emit(FiringContext &ctx) {
    const auto w = header_.width();
    const auto h = header_.height();
    const auto row = emitted_ / w;
    const auto col = emitted_ % w;
    const bool valid = row >= top_ && row < h - bottom_ && col >= left_ && col < w - right_;
    for (std::size_t j = 0; j < taps_; ++j) {
      Token v = 0;
      if (valid) v = buf_[static_cast<std::size_t>(emitted_ - left_ + static_cast<std::int64_t>(j) - base_)];
      ctx.push(j, v);
      ctx.push(taps_ + j, v);
    }
    ++emitted_;
    while (!buf_.empty() && base_ < emitted_ - left_) {
      buf_.pop_front();
      ++base_;
    }
    if (emitted_ == header_.total()) {
      header_.reset();
      buf_.clear();
      received_ = emitted_ = base_ = 0;
    }
  }

  std::int64_t left_, right_, top_, bottom_;
  std::size_t taps_;
  SizeHeader header_;
  std::deque<Token> buf_;
  std::int64_t base_ = 0;
  std::int64_t received_ = 0;
  std::int64_t emitted_ = 0;
};

/// Pops one token from every input and pushes f(inputs) to every output.
class Combinational : public Behavior {
public:
  using Fn = std::function<void(const std::vector<Token> &, std::vector<Token> &)>;

  Combinational(std::size_t ins, std::size_t outs, Fn fn)
      : ins_(ins), outs_(outs), args_(ins), results_(outs), fn_(std::move(fn)) {}

  bool fire(FiringContext &ctx) override {
    for (std::size_t i = 0; i < ins_; ++i) {
      if (ctx.available(i) == 0) return false;
    }
    for (std::size_t o = 0; o < outs_; ++o) {
      if (ctx.space(o) == 0) return false;
    }
    for (std::size_t i = 0; i < ins_; ++i) args_[i] = ctx.pop(i);
    fn_(args_, results_);
    for (std::size_t o = 0; o < outs_; ++o) ctx.push(o, results_[o]);
    return true;
  }

private:
  std::size_t ins_, outs_;
  std::vector<Token> args_, results_;
  Fn fn_;
};

std::unique_ptr<Behavior> unary(std::function<std::int64_t(std::int64_t)> f) {
  return std::make_unique<Combinational>(
      1, 1, [f = std::move(f)](const std::vector<Token> &in, std::vector<Token> &out) {
        out[0] = wrap(f(in[0]));
      });
}

std::unique_ptr<Behavior> binary(std::function<std::int64_t(std::int64_t, std::int64_t)> f) {
  return std::make_unique<Combinational>(
      2, 1, [f = std::move(f)](const std::vector<Token> &in, std::vector<Token> &out) {
        out[0] = wrap(f(in[0], in[1]));
      });
}

class Route : public Behavior {
public:
  Route(std::size_t in, std::size_t out) : in_(in), out_(out) {}

  bool fire(FiringContext &ctx) override {
    if (ctx.available(in_) == 0 || ctx.space(out_) == 0) return false;
    ctx.push(out_, ctx.pop(in_));
    return true;
  }

private:
  std::size_t in_, out_;
};

class Accumulate : public Behavior {
public:
  bool fire(FiringContext &ctx) override {
    if (ctx.available(0) == 0 || ctx.space(0) == 0) return false;
    sum_ = wrap(static_cast<std::int64_t>(sum_) + ctx.pop(0));
    ctx.push(0, sum_);
    return true;
  }

private:
  Token sum_ = 0;
};

class Decimate : public Behavior {
public:
  explicit Decimate(std::int64_t factor) : factor_(factor) {}

  bool fire(FiringContext &ctx) override {
    if (ctx.available(0) == 0) return false;
    const bool closes = count_ + 1 == factor_;
    if (closes && ctx.space(0) == 0) return false;
    sum_ += ctx.pop(0);
    if (closes) {
      ctx.push(0, wrap(sum_));
      sum_ = 0;
      count_ = 0;
    } else {
      ++count_;
    }
    return true;
  }

private:
  std::int64_t factor_;
  std::int64_t count_ = 0;
  std::int64_t sum_ = 0;
};

} // namespace

std::unique_ptr<Behavior> make_behavior(const dataflow::Actor &actor, std::optional<int> select) {
  const auto &p = actor.params;
  const auto &k = actor.kind;
  if (k == "line_buffer") {
    if (p.at("offset") > 0) return std::make_unique<LookaheadLine>(actor);
    return std::make_unique<LagLine>(actor);
  }
  if (k == "delay") return std::make_unique<Delay>(actor);
  if (k == "conv") {
    std::vector<std::int64_t> coeffs;
    for (std::size_t i = 0; i < actor.in_ports.size(); ++i) {
      coeffs.push_back(p.at("c" + std::to_string(i)));
    }
    return std::make_unique<Combinational>(
        coeffs.size(), 1, [coeffs](const std::vector<Token> &in, std::vector<Token> &out) {
          std::int64_t acc = 0;
          for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * in[i];
          out[0] = wrap(acc);
        });
  }
  if (k == "abs_sum") {
    const auto n = p.at("n");
    return binary([n](std::int64_t gx, std::int64_t gy) { return (std::llabs(gx) + std::llabs(gy)) >> n; });
  }
  if (k == "thr") {
    const auto t = p.at("threshold");
    return unary([t](std::int64_t x) -> std::int64_t { return x > t ? 255 : 0; });
  }
  if (dataflow::is_sbox(actor)) {
    const auto sel = static_cast<std::size_t>(select.value_or(static_cast<int>(p.at("sel"))));
    const bool mux = p.at("outputs") == 1;
    const auto width = static_cast<std::size_t>(mux ? p.at("inputs") : p.at("outputs"));
    if (sel >= width) {
      throw Error(Errc::OutOfRange, "select " + std::to_string(sel) + " out of range for '" +
                                        actor.name + "'");
    }
    return mux ? std::make_unique<Route>(sel, 0) : std::make_unique<Route>(0, sel);
  }
  if (k == "offset") {
    const auto v = p.at("value");
    return unary([v](std::int64_t x) { return x + v; });
  }
  if (k == "scale") {
    const auto f = p.at("factor");
    return unary([f](std::int64_t x) { return x * f; });
  }
  if (k == "negate") return unary([](std::int64_t x) { return -x; });
  if (k == "absval") return unary([](std::int64_t x) { return std::llabs(x); });
  if (k == "shr") {
    const auto n = p.at("n");
    return unary([n](std::int64_t x) { return x >> n; });
  }
  if (k == "clamp") {
    const auto lo = p.at("lo");
    const auto hi = p.at("hi");
    return unary([lo, hi](std::int64_t x) { return std::min(std::max(x, lo), hi); });
  }
  if (k == "accum") return std::make_unique<Accumulate>();
  if (k == "decimate") return std::make_unique<Decimate>(p.at("factor"));
  if (k == "add") return binary([](std::int64_t a, std::int64_t b) { return a + b; });
  if (k == "sub") return binary([](std::int64_t a, std::int64_t b) { return a - b; });
  if (k == "max") return binary([](std::int64_t a, std::int64_t b) { return std::max(a, b); });
  if (k == "dup") {
    return std::make_unique<Combinational>(
        1, 2, [](const std::vector<Token> &in, std::vector<Token> &out) { out[0] = out[1] = in[0]; });
  }
  throw Error(Errc::SemanticError, "no behavior for kind '" + k + "' of actor '" + actor.name + "'");
}

} // namespace vrcmon::device
