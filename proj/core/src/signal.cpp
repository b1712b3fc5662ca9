#include "gaitmp/signal.hpp"

#include <algorithm>
#include <cmath>

#include "gaitmp/errors.hpp"

namespace gaitmp {

double project(const Vec3& v, Channel channel) noexcept {
  switch (channel) {
    case Channel::x: return v[0];
    case Channel::y: return v[1];
    case Channel::z: return v[2];
    case Channel::l1: return std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
    case Channel::l2: return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    case Channel::linf: return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  }
  return 0.0;
}

double project(const SensorSample& sample, const SignalSelector& sel) {
  switch (sel.source) {
    case Source::accel: return project(sample.accel, sel.channel);
    case Source::gyro: return project(sample.gyro, sel.channel);
    case Source::both: break;
  }
  throw UsageError("source 'both' yields two streams; project each source separately");
}

std::vector<double> project_sources(const SensorSample& sample, const SignalSelector& sel) {
  if (sel.source == Source::both)
    return {project(sample.gyro, sel.channel), project(sample.accel, sel.channel)};
  return {project(sample, sel)};
}

std::size_t stream_count(const SignalSelector& sel) noexcept {
  return sel.source == Source::both ? 2 : 1;
}

std::string to_string(Source s) {
  switch (s) {
    case Source::accel: return "accel";
    case Source::gyro: return "gyro";
    case Source::both: return "both";
  }
  return "?";
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::x: return "x";
    case Channel::y: return "y";
    case Channel::z: return "z";
    case Channel::l1: return "L1";
    case Channel::l2: return "L2";
    case Channel::linf: return "Linf";
  }
  return "?";
}

Source parse_source(std::string_view text) {
  if (text == "accel") return Source::accel;
  if (text == "gyro") return Source::gyro;
  if (text == "both") return Source::both;
  throw UsageError("unknown signal source '" + std::string(text) + "'");
}

Channel parse_channel(std::string_view text) {
  if (text == "x") return Channel::x;
  if (text == "y") return Channel::y;
  if (text == "z") return Channel::z;
  if (text == "L1" || text == "l1") return Channel::l1;
  if (text == "L2" || text == "l2") return Channel::l2;
  if (text == "Linf" || text == "linf" || text == "Linfinity") return Channel::linf;
  throw UsageError("unknown signal channel '" + std::string(text) + "'");
}

std::size_t envelope_width(double window_ms, double sample_rate_hz) {
  if (!(window_ms > 0.0)) throw UsageError("envelope window must be positive");
  const double w = std::round(window_ms * sample_rate_hz / 1000.0);
  if (w < 1.0) throw UsageError("envelope window shorter than one sample");
  return static_cast<std::size_t>(w);
}

TimeSeries envelope(const TimeSeries& series, double window_ms) {
  EnvelopeFollower follower(envelope_width(window_ms, series.sample_rate_hz()));
  std::vector<double> out(series.size());
  for (double x : series.values()) {
    if (auto o = follower.push(x)) out[o->index] = o->value;
  }
  for (const auto& o : follower.flush()) out[o.index] = o.value;
  return TimeSeries(std::move(out), series.sample_rate_hz());
}

EnvelopeFollower::EnvelopeFollower(std::size_t width) : width_(width) {
  if (width_ == 0) throw UsageError("envelope width must be at least one sample");
}

EnvelopeFollower::Output EnvelopeFollower::emit_next() {
  const std::size_t back = width_ / 2;
  const std::size_t first = next_out_ >= back ? next_out_ - back : 0;
  while (window_.front().first < first) window_.pop_front();
  return {next_out_++, window_.front().second};
}

std::optional<EnvelopeFollower::Output> EnvelopeFollower::push(double x) {
  const double a = std::abs(x);
  while (!window_.empty() && window_.back().second <= a) window_.pop_back();
  window_.emplace_back(pushed_, a);
  ++pushed_;
  if (pushed_ > next_out_ + lookahead()) return emit_next();
  return std::nullopt;
}

std::vector<EnvelopeFollower::Output> EnvelopeFollower::flush() {
  std::vector<Output> out;
  while (next_out_ < pushed_) out.push_back(emit_next());
  return out;
}

}  // namespace gaitmp
