#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitmp/dataset.hpp"
#include "gaitmp/detector.hpp"

namespace gaitmp {

/// Step-level confusion counts.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) noexcept {
    return a += b;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// An ab segment with at least one alarm is a TP, without one an FN; an ok (or any non-ab)
/// segment with an alarm is an FP, without one a TN. Every alarm outside all segments is an
/// additional FP.
[[nodiscard]] ConfusionCounts match_alarms(std::span<const AlarmEvent> alarms,
                                           const std::vector<LabeledSegment>& truth);

[[nodiscard]] double precision(const ConfusionCounts& c) noexcept;
[[nodiscard]] double recall(const ConfusionCounts& c) noexcept;
/// 2PR/(P+R); an undefined P or R counts as 0, and F1 is 0 when P+R is 0.
[[nodiscard]] double f1(const ConfusionCounts& c) noexcept;

/// Mean latency (s) from ab-segment start to its first alarm over TP segments; nullopt when
/// there is no TP.
[[nodiscard]] std::optional<double> earliness(std::span<const AlarmEvent> alarms,
                                              const std::vector<LabeledSegment>& truth,
                                              double sample_rate_hz);

/// Latencies (s) of every TP segment, in segment order.
[[nodiscard]] std::vector<double> earliness_samples(std::span<const AlarmEvent> alarms,
                                                    const std::vector<LabeledSegment>& truth,
                                                    double sample_rate_hz);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by decreasing threshold
  double auc = 0.0;
};

struct ThresholdedAlarms {
  double threshold;
  std::vector<AlarmEvent> alarms;
};

/// `count` thresholds from 1 down to 0, strictly decreasing, both ends included.
[[nodiscard]] std::vector<double> threshold_grid(std::size_t count = 101);

/// Trapezoid area under FPR-sorted points, anchored at (0,0) and (1,1).
[[nodiscard]] double auc_trapezoid(std::vector<RocPoint> points);

/// One ROC point per threshold (thresholds must be strictly decreasing). Throws DataError when
/// the truth has no ab segment.
[[nodiscard]] RocCurve roc_sweep(std::span<const ThresholdedAlarms> runs,
                                 const std::vector<LabeledSegment>& truth);

/// ROC from pooled counts per threshold, thresholds strictly decreasing.
[[nodiscard]] RocCurve roc_from_counts(std::span<const double> thresholds,
                                       std::span<const ConfusionCounts> counts);

/// Vertical averaging: mean TPR of each curve (anchored, linearly interpolated) on an evenly
/// spaced FPR grid. Points carry a NaN threshold.
[[nodiscard]] RocCurve mean_roc(std::span<const RocCurve> curves, std::size_t grid_points = 101);

/// Median over `repeats` timed calls of `run` (after one untimed warm-up), divided by the
/// signal duration.
[[nodiscard]] double real_time_factor(const std::function<void()>& run, double duration_s,
                                      int repeats = 5);
[[nodiscard]] double real_time_factor(const StepDetectorSystemConfig& config,
                                      const Recording& recording, int repeats = 5);
[[nodiscard]] double real_time_factor(const NaiveDetectorConfig& config,
                                      const SignalSelector& signal, const Recording& recording,
                                      int repeats = 5);

// ---------------------------------------------------------------------------
// Threshold-sweep evaluation over a set of recordings

/// Scores of one recording replayed once; alarms for any threshold are derived post hoc.
struct ScoredRun {
  std::string recording_id;
  double sample_rate_hz = kDefaultSampleRateHz;
  std::vector<LabeledSegment> truth;
  std::vector<ScoreUpdate> trace;
};

struct ThresholdSummary {
  double threshold = 0.0;
  ConfusionCounts counts;
  double f1 = 0.0;
  std::optional<double> mean_earliness_s;
};

struct RecordingSummary {
  std::string recording_id;
  ConfusionCounts counts;
  double f1 = 0.0;
  std::optional<double> mean_earliness_s;
};

struct EvaluationFamily {
  std::string label;
  std::vector<ThresholdSummary> by_threshold;
  RocCurve pooled_roc;
  RocCurve mean_roc;
  /// Threshold maximizing Youden's J (TPR - FPR) on the pooled ROC; ties go to higher F1, then
  /// to the higher threshold.
  ThresholdSummary operating_point;
  ThresholdSummary best_f1_point;
  std::vector<RecordingSummary> per_recording;  // at the operating threshold, sorted by id
};

struct EvaluationReport {
  std::vector<EvaluationFamily> families;
  std::optional<double> real_time_factor;
};

/// Aggregation sorts runs by recording id, so the result does not depend on input order.
[[nodiscard]] EvaluationFamily evaluate_runs(std::string label, std::vector<ScoredRun> runs,
                                             std::span<const double> thresholds);

[[nodiscard]] ScoredRun score_recording(const StepDetectorSystemConfig& config,
                                        const Recording& recording,
                                        std::vector<LabeledSegment> truth,
                                        const Recording* prime = nullptr);
[[nodiscard]] ScoredRun score_recording(const NaiveDetectorConfig& config,
                                        const SignalSelector& signal, const Recording& recording,
                                        std::vector<LabeledSegment> truth,
                                        const Recording* prime = nullptr);

[[nodiscard]] std::string report_json(const EvaluationReport& report);
/// Writes report.json, roc.csv, f1_by_threshold.csv and earliness.csv into `dir`.
void write_report(const std::filesystem::path& dir, const EvaluationReport& report);

}  // namespace gaitmp
