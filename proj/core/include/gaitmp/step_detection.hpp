#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gaitmp/signal.hpp"
#include "gaitmp/time_series.hpp"

namespace gaitmp {

/// Half-open sample range [start, end).
struct StepSegment {
  std::size_t start = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const StepSegment&, const StepSegment&) = default;
};

struct StepDetectorParams {
  double sample_rate_hz = kDefaultSampleRateHz;
  double threshold_fraction = 0.5;
  double initial_threshold = 1e12;
  double threshold_floor = 1e-6;
  double onset_offset_ms = 50.0;
  double release_offset_ms = 50.0;
  double min_step_ms = 150.0;

  [[nodiscard]] std::size_t onset_samples() const;
  [[nodiscard]] std::size_t release_samples() const;
  [[nodiscard]] std::size_t min_step_samples() const;
  void validate() const;
};

struct StepEvent {
  enum class Kind { started, ended, discarded };
  Kind kind;
  std::size_t start;
  std::size_t end;  // unused for started

  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};

/// Adaptive-threshold segmenter over an envelope signal.
///
/// A rising crossing (envelope goes from <= threshold to > threshold) opens a step at
/// crossing - onset; a falling crossing closes it at crossing + release. Steps whose adjusted
/// ranges overlap are merged, and steps shorter than the minimum duration are dropped.
/// The streaming path (feed/finish) reproduces the batch path exactly for a fixed threshold:
/// a close is confirmed only once no later onset could still merge into it.
class StepDetectorState {
 public:
  explicit StepDetectorState(StepDetectorParams params = {});

  [[nodiscard]] const StepDetectorParams& params() const noexcept { return params_; }
  [[nodiscard]] double threshold() const noexcept { return threshold_; }
  /// Threshold actually compared against, i.e. clamped below by the floor.
  [[nodiscard]] double effective_threshold() const noexcept;
  void set_threshold(double threshold);

  [[nodiscard]] bool in_step() const noexcept { return current_start_.has_value(); }
  [[nodiscard]] std::optional<std::size_t> current_start() const noexcept {
    return current_start_;
  }

  /// Streaming update with the envelope value at `index`. Indices must strictly increase.
  std::vector<StepEvent> feed(double envelope_sample, std::size_t index);

  /// End of data: resolves a close still waiting for its merge horizon. `length` is the
  /// total number of samples. A step that is still above threshold stays open.
  std::vector<StepEvent> finish(std::size_t length);

 private:
  std::optional<StepEvent> confirm_close(std::size_t end);

  StepDetectorParams params_;
  double threshold_;
  bool above_ = false;
  std::optional<std::size_t> last_index_;
  std::optional<std::size_t> current_start_;
  std::optional<std::size_t> pending_end_;
};

/// Cold start (empty history) returns initial_threshold, otherwise fraction * max(history).
/// The result is stored in `state`.
double recompute_threshold(StepDetectorState& state, std::span<const double> history_envelope);

/// Batch segmentation at the state's current effective threshold. An open step at the end of
/// the data is not reported.
[[nodiscard]] std::vector<StepSegment> detect_boundaries(const TimeSeries& envelope,
                                                         const StepDetectorState& state);
[[nodiscard]] std::vector<StepSegment> detect_boundaries(std::span<const double> envelope,
                                                         const StepDetectorState& state);

/// Closed segments reassembled from a streaming event log.
[[nodiscard]] std::vector<StepSegment> segments_from_events(std::span<const StepEvent> events);

}  // namespace gaitmp
