#include "gaitmp/step_detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaitmp/errors.hpp"

namespace gaitmp {
namespace {

std::size_t ms_to_samples(double ms, double rate) {
  return static_cast<std::size_t>(std::llround(ms * rate / 1000.0));
}

}  // namespace

std::size_t StepDetectorParams::onset_samples() const {
  return ms_to_samples(onset_offset_ms, sample_rate_hz);
}

std::size_t StepDetectorParams::release_samples() const {
  return ms_to_samples(release_offset_ms, sample_rate_hz);
}

std::size_t StepDetectorParams::min_step_samples() const {
  return ms_to_samples(min_step_ms, sample_rate_hz);
}

void StepDetectorParams::validate() const {
  if (!(sample_rate_hz > 0.0)) throw UsageError("step detector: sample rate must be positive");
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
    throw UsageError("step detector: threshold fraction must lie in (0, 1]");
  if (!(initial_threshold >= 0.0)) throw UsageError("step detector: initial threshold < 0");
  if (!(threshold_floor >= 0.0)) throw UsageError("step detector: threshold floor < 0");
  if (!(onset_offset_ms >= 0.0 && release_offset_ms >= 0.0))
    throw UsageError("step detector: offsets must be non-negative");
  if (!(min_step_ms >= 0.0)) throw UsageError("step detector: minimum step duration < 0");
}

StepDetectorState::StepDetectorState(StepDetectorParams params)
    : params_(params), threshold_(params.initial_threshold) {
  params_.validate();
}

double StepDetectorState::effective_threshold() const noexcept {
  return std::max(threshold_, params_.threshold_floor);
}

void StepDetectorState::set_threshold(double threshold) {
  if (!(threshold >= 0.0)) throw UsageError("step threshold must be non-negative");
  threshold_ = threshold;
}

std::optional<StepEvent> StepDetectorState::confirm_close(std::size_t end) {
  const std::size_t start = *current_start_;
  current_start_.reset();
  pending_end_.reset();
  const auto kind =
      end - start < params_.min_step_samples() ? StepEvent::Kind::discarded : StepEvent::Kind::ended;
  return StepEvent{kind, start, end};
}

std::vector<StepEvent> StepDetectorState::feed(double envelope_sample, std::size_t index) {
  if (last_index_ && index <= *last_index_)
    throw UsageError("step detector: out-of-order index " + std::to_string(index));
  last_index_ = index;

  std::vector<StepEvent> events;
  const std::size_t onset = params_.onset_samples();
  const bool above = envelope_sample > effective_threshold();

  if (above && !above_) {
    const std::size_t start = index >= onset ? index - onset : 0;
    if (pending_end_ && start < *pending_end_) {
      pending_end_.reset();  // merge into the step awaiting its close
    } else {
      if (pending_end_) events.push_back(*confirm_close(*pending_end_));
      current_start_ = start;
      events.push_back({StepEvent::Kind::started, start, 0});
    }
  } else if (!above && above_) {
    pending_end_ = index + params_.release_samples();
  }
  above_ = above;

  // No later rising crossing can merge once index - onset >= pending end.
  if (pending_end_ && !above_ && index + 1 >= *pending_end_ + onset) {
    events.push_back(*confirm_close(*pending_end_));
  }
  return events;
}

std::vector<StepEvent> StepDetectorState::finish(std::size_t length) {
  std::vector<StepEvent> events;
  if (pending_end_) events.push_back(*confirm_close(std::min(*pending_end_, length)));
  return events;
}

double recompute_threshold(StepDetectorState& state, std::span<const double> history_envelope) {
  double threshold = state.params().initial_threshold;
  if (!history_envelope.empty()) {
    const double peak = *std::max_element(history_envelope.begin(), history_envelope.end());
    threshold = state.params().threshold_fraction * peak;
  }
  state.set_threshold(threshold);
  return threshold;
}

std::vector<StepSegment> detect_boundaries(std::span<const double> envelope,
                                           const StepDetectorState& state) {
  const auto& p = state.params();
  const double threshold = state.effective_threshold();
  const std::size_t n = envelope.size();
  const std::size_t onset = p.onset_samples();
  const std::size_t release = p.release_samples();

  // Raw crossings -> offset-adjusted ranges; the trailing range may be open.
  struct Range {
    std::size_t start;
    std::size_t end;
    bool open;
  };
  std::vector<Range> ranges;
  bool prev_above = false;
  for (std::size_t i = 0; i < n; ++i) {
    const bool above = envelope[i] > threshold;
    if (above && !prev_above) {
      ranges.push_back({i >= onset ? i - onset : 0, 0, true});
    } else if (!above && prev_above) {
      ranges.back().end = std::min(i + release, n);
      ranges.back().open = false;
    }
    prev_above = above;
  }

  std::vector<Range> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && !merged.back().open && r.start < merged.back().end) {
      merged.back().end = std::max(merged.back().end, r.end);
      merged.back().open = r.open;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<StepSegment> out;
  for (const auto& r : merged) {
    if (r.open || r.end - r.start < p.min_step_samples()) continue;
    out.push_back({r.start, r.end});
  }
  return out;
}

std::vector<StepSegment> detect_boundaries(const TimeSeries& envelope,
                                           const StepDetectorState& state) {
  return detect_boundaries(envelope.values(), state);
}

std::vector<StepSegment> segments_from_events(std::span<const StepEvent> events) {
  std::vector<StepSegment> out;
  for (const auto& e : events) {
    if (e.kind == StepEvent::Kind::ended) out.push_back({e.start, e.end});
  }
  return out;
}

}  // namespace gaitmp
