#pragma once

// Streaming anomaly detectors: the hop-based Frame/History detector and the step-gated
// detector with a Current step buffer. Both score a query against the History buffer by
// its nearest z-normalized match, normalized to [0, 1] by the 2*sqrt(m) bound.

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitmp/matrix_profile.hpp"
#include "gaitmp/signal.hpp"
#include "gaitmp/step_detection.hpp"
#include "gaitmp/time_series.hpp"

namespace gaitmp {

struct AlarmEvent {
  std::size_t sample_index = 0;
  double time_s = 0.0;
  double score = 0.0;
  std::size_t query_len = 0;

  friend bool operator==(const AlarmEvent&, const AlarmEvent&) = default;
};

/// One MP evaluation. `unit` groups updates that share an alarm latch: the step ordinal for
/// the step-gated detector, the update ordinal for the naive one.
struct ScoreUpdate {
  std::size_t sample_index = 0;
  double time_s = 0.0;
  double score = 0.0;
  std::size_t query_len = 0;
  std::size_t unit = 0;

  friend bool operator==(const ScoreUpdate&, const ScoreUpdate&) = default;
};

[[nodiscard]] std::string to_json_line(const AlarmEvent& alarm);
[[nodiscard]] AlarmEvent alarm_from_json_line(const std::string& line);

/// Alarms the detector would have raised at `threshold`: the first update with
/// score > threshold within each unit.
[[nodiscard]] std::vector<AlarmEvent> alarms_at_threshold(std::span<const ScoreUpdate> trace,
                                                          double threshold);

/// Nearest-match distance of `query` against every window of `reference`, divided by
/// 2*sqrt(m), so always in [0, 1].
[[nodiscard]] double normalized_discord_score(std::span<const double> query,
                                              std::span<const double> reference,
                                              double eps = kDefaultStdEps);

struct NaiveDetectorConfig {
  double sample_rate_hz = kDefaultSampleRateHz;
  std::size_t frame_len = 100;
  std::size_t hop = 10;
  std::size_t history_len = 1000;
  double overlap_fraction = 0.25;
  double discord_threshold = 0.4;
  double eps = kDefaultStdEps;

  /// Samples the History buffer shares with the Frame buffer.
  [[nodiscard]] std::size_t overlap() const;
  void validate() const;
  [[nodiscard]] static NaiveDetectorConfig for_rate(double sample_rate_hz);
};

/// Frame buffer of frame_len samples queried against a FIFO History buffer every hop samples.
/// The History holds the history_len samples ending overlap() samples into the frame.
class NaiveDetector {
 public:
  explicit NaiveDetector(NaiveDetectorConfig config);

  [[nodiscard]] const NaiveDetectorConfig& config() const noexcept { return config_; }

  std::optional<AlarmEvent> push(double sample);

  /// Pre-loads the History with an external reference (last history_len samples kept).
  void prime_history(std::span<const double> reference);

  [[nodiscard]] std::size_t history_size() const noexcept;
  [[nodiscard]] const std::optional<ScoreUpdate>& last_update() const noexcept {
    return last_update_;
  }

 private:
  NaiveDetectorConfig config_;
  std::deque<double> buffer_;  // history followed by the frame
  std::size_t pushed_ = 0;
  std::size_t updates_ = 0;
  std::optional<ScoreUpdate> last_update_;
};

struct StepDetectorSystemConfig {
  double sample_rate_hz = kDefaultSampleRateHz;
  double history_s = 10.0;
  SignalSelector signal{};
  StepDetectorParams step{};
  double envelope_window_ms = kDefaultEnvelopeWindowMs;
  double discord_threshold = 0.15;
  double min_query_ms = 250.0;
  /// A Current step buffer longer than this is flushed into History. This is also how the
  /// History first fills while the step threshold is still at its cold-start value.
  double max_buffer_s = 2.0;
  /// A step whose peak score exceeds this is dropped instead of moved into History, so a run of
  /// consecutive anomalous steps cannot match each other. Independent of discord_threshold so
  /// that the score trace does not depend on the alarm threshold. Values >= 1 disable it.
  double history_guard_score = 0.15;
  double eps = kDefaultStdEps;

  [[nodiscard]] std::size_t history_len() const;
  [[nodiscard]] std::size_t min_query_len() const;
  [[nodiscard]] std::size_t max_buffer_len() const;
  void validate() const;
  [[nodiscard]] static StepDetectorSystemConfig for_rate(double sample_rate_hz);
};

/// Step-gated detector. Samples are projected, enveloped, and segmented; when a step starts,
/// the previous Current step buffer moves into History and the step threshold is recomputed.
/// While a step is in progress and the buffer holds at least min_query_len samples, the whole
/// buffer is the query (m = buffer length). At most one alarm is raised per step.
///
/// The centered envelope needs lookahead, so decisions about sample i are made when sample
/// i + lookahead arrives; alarms carry the index of the sample that triggered them.
class StepGatedDetector {
 public:
  explicit StepGatedDetector(StepDetectorSystemConfig config);

  [[nodiscard]] const StepDetectorSystemConfig& config() const noexcept { return config_; }

  std::optional<AlarmEvent> push(const SensorSample& sample);
  /// Single-stream input that is already projected.
  std::optional<AlarmEvent> push_projected(std::span<const double> values);
  /// Drains the envelope lookahead at end of stream.
  std::vector<AlarmEvent> finish();

  void prime_history(std::span<const SensorSample> reference);
  void prime_history(const TimeSeries& reference);
  void prime_history(std::span<const TimeSeries> step_waveforms);

  [[nodiscard]] std::size_t history_size() const noexcept { return history_env_.size(); }
  [[nodiscard]] std::size_t history_updates() const noexcept { return history_updates_; }
  [[nodiscard]] double step_threshold() const noexcept { return step_.effective_threshold(); }
  [[nodiscard]] const std::vector<StepEvent>& step_events() const noexcept { return events_; }
  [[nodiscard]] const std::vector<ScoreUpdate>& trace() const noexcept { return trace_; }

 private:
  std::optional<AlarmEvent> process(std::size_t index, double env,
                                    const std::vector<double>& values, std::size_t now);
  void move_to_history(std::size_t count);
  void drop_from_buffer(std::size_t count);
  void append_history(const std::vector<std::vector<double>>& streams,
                      std::span<const double> env);
  void prime_streams(const std::vector<std::vector<double>>& streams);

  StepDetectorSystemConfig config_;
  std::size_t streams_;
  EnvelopeFollower follower_;
  StepDetectorState step_;

  std::size_t pushed_ = 0;
  std::deque<std::vector<double>> pending_;  // projected samples awaiting their envelope

  std::vector<std::vector<double>> current_;  // per stream
  std::vector<double> current_env_;
  std::size_t current_origin_ = 0;

  std::vector<std::vector<double>> history_;  // per stream, contiguous
  std::vector<double> history_env_;
  std::size_t history_updates_ = 0;

  bool step_active_ = false;
  bool latched_ = false;
  double buffer_peak_score_ = 0.0;  // of the step now in the Current step buffer
  std::size_t step_ordinal_ = 0;
  std::vector<StepEvent> events_;
  std::vector<ScoreUpdate> trace_;
};

struct ReplayResult {
  std::vector<AlarmEvent> alarms;
  std::vector<ScoreUpdate> trace;
  std::vector<StepEvent> step_events;
};

[[nodiscard]] ReplayResult replay(NaiveDetector& detector, std::span<const double> signal);
[[nodiscard]] ReplayResult replay(StepGatedDetector& detector,
                                  std::span<const SensorSample> samples);

}  // namespace gaitmp
