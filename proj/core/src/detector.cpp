#include "gaitmp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gaitmp/errors.hpp"
#include "json.hpp"

namespace gaitmp {
namespace {

std::size_t seconds_to_samples(double seconds, double rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

template <typename T>
void erase_front(std::vector<T>& v, std::size_t count) {
  v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count));
}

}  // namespace

std::string to_json_line(const AlarmEvent& alarm) {
  nlohmann::ordered_json j;
  j["sample_index"] = alarm.sample_index;
  j["time_s"] = alarm.time_s;
  j["score"] = alarm.score;
  j["query_len"] = alarm.query_len;
  return j.dump();
}

AlarmEvent alarm_from_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return {j.at("sample_index").get<std::size_t>(), j.at("time_s").get<double>(),
            j.at("score").get<double>(), j.at("query_len").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed alarm record: ") + e.what());
  }
}

std::vector<AlarmEvent> alarms_at_threshold(std::span<const ScoreUpdate> trace, double threshold) {
  std::vector<AlarmEvent> alarms;
  std::set<std::size_t> fired;
  for (const auto& u : trace) {
    if (u.score > threshold && fired.insert(u.unit).second)
      alarms.push_back({u.sample_index, u.time_s, u.score, u.query_len});
  }
  return alarms;
}

double normalized_discord_score(std::span<const double> query, std::span<const double> reference,
                                double eps) {
  const auto profile = matrix_profile_ab(query, reference, query.size(), eps);
  const double bound = 2.0 * std::sqrt(static_cast<double>(query.size()));
  return std::clamp(profile.profile[0] / bound, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Naive Frame/History detector

std::size_t NaiveDetectorConfig::overlap() const {
  return static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(frame_len)));
}

void NaiveDetectorConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw UsageError("naive detector: sample rate must be positive");
  if (frame_len < 3) throw UsageError("naive detector: frame_len must be at least 3");
  if (hop < 1) throw UsageError("naive detector: hop must be at least 1");
  if (history_len < 2 * frame_len)
    throw UsageError("naive detector: history_len must be at least 2 * frame_len");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw UsageError("naive detector: overlap fraction must lie in [0, 1)");
  if (!(discord_threshold >= 0.0 && discord_threshold <= 1.0))
    throw UsageError("naive detector: discord threshold must lie in [0, 1]");
}

NaiveDetectorConfig NaiveDetectorConfig::for_rate(double sample_rate_hz) {
  NaiveDetectorConfig c;
  c.sample_rate_hz = sample_rate_hz;
  c.frame_len = std::max<std::size_t>(3, seconds_to_samples(1.0, sample_rate_hz));
  c.hop = std::max<std::size_t>(1, seconds_to_samples(0.1, sample_rate_hz));
  c.history_len = std::max(2 * c.frame_len, seconds_to_samples(10.0, sample_rate_hz));
  return c;
}

NaiveDetector::NaiveDetector(NaiveDetectorConfig config) : config_(config) { config_.validate(); }

std::size_t NaiveDetector::history_size() const noexcept {
  // the newest frame_len - overlap pushed samples belong to the frame only
  const std::size_t lead = std::min(pushed_, config_.frame_len - config_.overlap());
  return buffer_.size() > lead ? buffer_.size() - lead : 0;
}

void NaiveDetector::prime_history(std::span<const double> reference) {
  if (reference.size() < config_.frame_len)
    throw UsageError("naive detector: reference shorter than one frame");
  const std::size_t keep = std::min(reference.size(), config_.history_len);
  buffer_.insert(buffer_.begin(), reference.end() - static_cast<std::ptrdiff_t>(keep),
                 reference.end());
}

std::optional<AlarmEvent> NaiveDetector::push(double sample) {
  if (!std::isfinite(sample)) throw DataError("naive detector: non-finite sample");
  last_update_.reset();
  buffer_.push_back(sample);
  const std::size_t index = pushed_++;
  const std::size_t m = config_.frame_len;
  const std::size_t capacity = config_.history_len + m - config_.overlap();
  while (buffer_.size() > capacity) buffer_.pop_front();

  if (pushed_ < m || pushed_ % config_.hop != 0) return std::nullopt;
  const std::size_t hist = history_size();
  if (hist < m) return std::nullopt;

  // Every History window ends at most overlap() samples into the frame, so none of them is a
  // trivial match of the frame.
  const std::vector<double> data(buffer_.begin(), buffer_.end());
  const std::span<const double> all(data);
  const double score =
      normalized_discord_score(all.last(m), all.first(hist), config_.eps);
  const double time_s = static_cast<double>(index) / config_.sample_rate_hz;
  last_update_ = ScoreUpdate{index, time_s, score, m, updates_++};
  if (score > config_.discord_threshold) return AlarmEvent{index, time_s, score, m};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Step-gated detector

std::size_t StepDetectorSystemConfig::history_len() const {
  return seconds_to_samples(history_s, sample_rate_hz);
}

std::size_t StepDetectorSystemConfig::min_query_len() const {
  return std::max<std::size_t>(3, seconds_to_samples(min_query_ms / 1000.0, sample_rate_hz));
}

std::size_t StepDetectorSystemConfig::max_buffer_len() const {
  return seconds_to_samples(max_buffer_s, sample_rate_hz);
}

void StepDetectorSystemConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw UsageError("step detector: sample rate must be positive");
  if (!(discord_threshold >= 0.0 && discord_threshold <= 1.0))
    throw UsageError("step detector: discord threshold must lie in [0, 1]");
  if (!(history_guard_score >= 0.0))
    throw UsageError("step detector: history guard score must be non-negative");
  if (!(min_query_ms > 0.0)) throw UsageError("step detector: min query length must be positive");
  if (max_buffer_len() < min_query_len())
    throw UsageError("step detector: max buffer shorter than min query length");
  if (history_len() <= max_buffer_len())
    throw UsageError("step detector: history must be longer than the max step buffer");
  (void)envelope_width(envelope_window_ms, sample_rate_hz);
  step.validate();
}

StepDetectorSystemConfig StepDetectorSystemConfig::for_rate(double sample_rate_hz) {
  StepDetectorSystemConfig c;
  c.sample_rate_hz = sample_rate_hz;
  c.step.sample_rate_hz = sample_rate_hz;
  return c;
}

StepGatedDetector::StepGatedDetector(StepDetectorSystemConfig config)
    : config_([&] {
        config.step.sample_rate_hz = config.sample_rate_hz;
        config.validate();
        return config;
      }()),
      streams_(stream_count(config_.signal)),
      follower_(envelope_width(config_.envelope_window_ms, config_.sample_rate_hz)),
      step_(config_.step),
      current_(streams_),
      history_(streams_) {}

std::optional<AlarmEvent> StepGatedDetector::push(const SensorSample& sample) {
  const auto values = project_sources(sample, config_.signal);
  return push_projected(values);
}

std::optional<AlarmEvent> StepGatedDetector::push_projected(std::span<const double> values) {
  if (values.size() != streams_) throw UsageError("step detector: wrong number of streams");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("step detector: non-finite sample");
  }
  const std::size_t now = pushed_++;
  pending_.emplace_back(values.begin(), values.end());
  const auto out = follower_.push(values[0]);
  if (!out) return std::nullopt;
  const auto vals = std::move(pending_.front());
  pending_.pop_front();
  return process(out->index, out->value, vals, now);
}

std::vector<AlarmEvent> StepGatedDetector::finish() {
  std::vector<AlarmEvent> alarms;
  if (pushed_ == 0) return alarms;
  const std::size_t now = pushed_ - 1;
  for (const auto& out : follower_.flush()) {
    const auto vals = std::move(pending_.front());
    pending_.pop_front();
    if (auto a = process(out.index, out.value, vals, now)) alarms.push_back(*a);
  }
  for (const auto& e : step_.finish(pushed_)) events_.push_back(e);
  step_active_ = false;
  return alarms;
}

std::optional<AlarmEvent> StepGatedDetector::process(std::size_t index, double env,
                                                     const std::vector<double>& values,
                                                     std::size_t now) {
  if (current_env_.empty()) current_origin_ = index;
  for (std::size_t s = 0; s < streams_; ++s) current_[s].push_back(values[s]);
  current_env_.push_back(env);

  for (const auto& e : step_.feed(env, index)) {
    events_.push_back(e);
    switch (e.kind) {
      case StepEvent::Kind::started: {
        // The completed previous step (everything before this onset) goes to History.
        const std::size_t start = std::max(e.start, current_origin_);
        if (start > current_origin_) {
          if (buffer_peak_score_ > config_.history_guard_score) {
            drop_from_buffer(start - current_origin_);
          } else {
            move_to_history(start - current_origin_);
          }
        }
        buffer_peak_score_ = 0.0;
        step_active_ = true;
        latched_ = false;
        ++step_ordinal_;
        break;
      }
      case StepEvent::Kind::ended:
      case StepEvent::Kind::discarded:
        step_active_ = false;
        break;
    }
  }

  std::optional<AlarmEvent> alarm;
  const std::size_t m = current_env_.size();
  if (step_active_ && m >= config_.min_query_len() && history_env_.size() >= m) {
    double score = 0.0;
    for (std::size_t s = 0; s < streams_; ++s)
      score = std::max(score, normalized_discord_score(current_[s], history_[s], config_.eps));
    const double time_s = static_cast<double>(now) / config_.sample_rate_hz;
    trace_.push_back({now, time_s, score, m, step_ordinal_});
    buffer_peak_score_ = std::max(buffer_peak_score_, score);
    if (!latched_ && score > config_.discord_threshold) {
      latched_ = true;
      alarm = AlarmEvent{now, time_s, score, m};
    }
  }

  if (m > config_.max_buffer_len()) {
    if (buffer_peak_score_ > config_.history_guard_score) {
      drop_from_buffer(m);
    } else {
      move_to_history(m);
    }
  }
  return alarm;
}

void StepGatedDetector::drop_from_buffer(std::size_t count) {
  for (auto& c : current_) erase_front(c, count);
  erase_front(current_env_, count);
  current_origin_ += count;
}

void StepGatedDetector::move_to_history(std::size_t count) {
  std::vector<std::vector<double>> chunk(streams_);
  for (std::size_t s = 0; s < streams_; ++s) {
    chunk[s].assign(current_[s].begin(), current_[s].begin() + static_cast<std::ptrdiff_t>(count));
    erase_front(current_[s], count);
  }
  const std::vector<double> env(current_env_.begin(),
                                current_env_.begin() + static_cast<std::ptrdiff_t>(count));
  erase_front(current_env_, count);
  current_origin_ += count;
  append_history(chunk, env);
}

void StepGatedDetector::append_history(const std::vector<std::vector<double>>& streams,
                                       std::span<const double> env) {
  for (std::size_t s = 0; s < streams_; ++s)
    history_[s].insert(history_[s].end(), streams[s].begin(), streams[s].end());
  history_env_.insert(history_env_.end(), env.begin(), env.end());

  const std::size_t cap = config_.history_len();
  if (history_env_.size() > cap) {
    const std::size_t excess = history_env_.size() - cap;
    for (auto& h : history_) erase_front(h, excess);
    erase_front(history_env_, excess);
  }

  ++history_updates_;
  recompute_threshold(step_, history_env_);
}

void StepGatedDetector::prime_streams(const std::vector<std::vector<double>>& streams) {
  if (streams.size() != streams_ || streams[0].empty())
    throw UsageError("step detector: reference does not match the configured signal");
  if (streams[0].size() < config_.min_query_len())
    throw UsageError("step detector: reference shorter than the minimum query length");
  const TimeSeries lead(streams[0], config_.sample_rate_hz);
  const auto env = envelope(lead, config_.envelope_window_ms);
  append_history(streams, env.values());
}

void StepGatedDetector::prime_history(std::span<const SensorSample> reference) {
  std::vector<std::vector<double>> streams(streams_);
  for (const auto& sample : reference) {
    const auto values = project_sources(sample, config_.signal);
    for (std::size_t s = 0; s < streams_; ++s) streams[s].push_back(values[s]);
  }
  prime_streams(streams);
}

void StepGatedDetector::prime_history(const TimeSeries& reference) {
  if (streams_ != 1) throw UsageError("step detector: scalar reference needs a single stream");
  prime_streams({std::vector<double>(reference.values().begin(), reference.values().end())});
}

void StepGatedDetector::prime_history(std::span<const TimeSeries> step_waveforms) {
  if (step_waveforms.empty()) throw UsageError("step detector: empty reference");
  for (const auto& w : step_waveforms) prime_history(w);
}

ReplayResult replay(NaiveDetector& detector, std::span<const double> signal) {
  ReplayResult result;
  for (double x : signal) {
    if (auto a = detector.push(x)) result.alarms.push_back(*a);
    if (const auto& u = detector.last_update()) result.trace.push_back(*u);
  }
  return result;
}

ReplayResult replay(StepGatedDetector& detector, std::span<const SensorSample> samples) {
  ReplayResult result;
  for (const auto& s : samples) {
    if (auto a = detector.push(s)) result.alarms.push_back(*a);
  }
  for (const auto& a : detector.finish()) result.alarms.push_back(a);
  result.trace = detector.trace();
  result.step_events = detector.step_events();
  return result;
}

}  // namespace gaitmp
