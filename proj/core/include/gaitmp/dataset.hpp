#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaitmp/signal.hpp"
#include "gaitmp/step_detection.hpp"
#include "gaitmp/time_series.hpp"

namespace gaitmp {

struct RecordingMeta {
  std::string subject_id = "s00";
  std::string pathology_label = "synthetic";
  std::string recording_id;
};

/// Uniformly sampled IMU recording.
struct Recording {
  std::vector<SensorSample> samples;
  double sample_rate_hz = kDefaultSampleRateHz;
  RecordingMeta meta;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  /// Checks non-emptiness, finiteness, monotone time and uniform sampling (1% of the period).
  void validate() const;
  [[nodiscard]] TimeSeries project(const SignalSelector& sel) const;
};

inline constexpr std::string_view kLabelOk = "ok";
inline constexpr std::string_view kLabelAb = "ab";

struct LabeledSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  [[nodiscard]] bool anomalous() const noexcept { return label == kLabelAb; }
  friend bool operator==(const LabeledSegment&, const LabeledSegment&) = default;
};

/// Per-pathology counts of the reference corpus this tool set was designed around.
struct CorpusEntry {
  std::string_view pathology;
  int recordings;
  int ok_steps;
  int ab_steps;
  double duration_min;
};

inline constexpr std::array<CorpusEntry, 9> kReferenceCorpus{{
    {"Antalgic", 7, 156, 42, 6.61},
    {"Ataxic", 4, 82, 27, 3.90},
    {"Diplegic", 6, 139, 36, 6.05},
    {"Hemiplegic", 5, 100, 28, 6.61},
    {"Hyperkinetic", 4, 95, 30, 4.04},
    {"Parkinsonian", 4, 100, 30, 4.07},
    {"Slap", 5, 105, 37, 4.59},
    {"Steppage", 9, 185, 58, 7.05},
    {"Trendelenburg", 4, 85, 30, 4.13},
}};

[[nodiscard]] bool is_known_pathology(std::string_view label) noexcept;

inline constexpr std::string_view kRecordingHeader = "t,ax,ay,az,gx,gy,gz";
inline constexpr std::string_view kAnnotationHeader = "start,end,label";

[[nodiscard]] Recording read_recording(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] Recording load_recording(const std::filesystem::path& path);
void write_recording(std::ostream& out, const Recording& rec);
void save_recording(const std::filesystem::path& path, const Recording& rec);

struct AnnotationOptions {
  /// Accept labels other than ok/ab. They are carried through and treated as normal steps.
  bool allow_extra_labels = false;
};

[[nodiscard]] std::vector<LabeledSegment> read_annotations(std::istream& in,
                                                           std::string_view source = "<stream>",
                                                           AnnotationOptions options = {});
[[nodiscard]] std::vector<LabeledSegment> load_annotations(const std::filesystem::path& path,
                                                           AnnotationOptions options = {});
void write_annotations(std::ostream& out, const std::vector<LabeledSegment>& segments);
void save_annotations(const std::filesystem::path& path,
                      const std::vector<LabeledSegment>& segments);
/// Ordered, non-overlapping, start < end, known labels.
void validate_annotations(const std::vector<LabeledSegment>& segments,
                          AnnotationOptions options = {});

/// Default annotation path next to a recording: foo.csv -> foo.ann.csv.
[[nodiscard]] std::filesystem::path annotation_path_for(const std::filesystem::path& recording);

[[nodiscard]] std::vector<LabeledSegment> label_segments(const std::vector<StepSegment>& steps,
                                                         std::string_view label = kLabelOk);

// ---------------------------------------------------------------------------
// Synthetic gait

enum class AnomalyKind { amplitude_scaled, time_warped, shape_replaced };

[[nodiscard]] std::string to_string(AnomalyKind kind);
[[nodiscard]] AnomalyKind parse_anomaly_kind(std::string_view text);

/// Shape of one normal step on the gyroscope: three Gaussian-windowed sinusoid bursts
/// (toe-off, mid-swing, heel strike) placed inside the swing phase.
struct StepTemplate {
  double swing_fraction = 0.45;   // swing duration / step period
  double onset_fraction = 0.10;   // swing start within the step period
  double peak_gyro_dps = 300.0;   // mid-swing peak on the sagittal axis
  double toe_off_ratio = -0.35;   // toe-off burst amplitude relative to peak
  double heel_strike_ratio = -0.45;
  double burst_freq_hz = 2.0;     // carrier of each burst
  double accel_coupling = 0.02;   // m/s^2 per deg/s on the accelerometer
};

struct SynthConfig {
  double sample_rate_hz = kDefaultSampleRateHz;
  int n_normal_steps = 10;
  int n_anomalous_steps = 2;
  /// Number of normal steps before the anomalous block; negative places it in the middle.
  int anomaly_position = -1;
  double step_period_s = 1.1;
  StepTemplate template_{};
  AnomalyKind anomaly_kind = AnomalyKind::shape_replaced;
  double noise_std = 2.0;
  double lead_in_s = 1.0;
  double lead_out_s = 1.0;
  double period_jitter = 0.03;
  double amplitude_jitter = 0.05;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Reads flat `key = value` text whose keys are the SynthConfig field names (template
/// fields as template.<name>). '#' starts a comment. Unknown keys are errors.
[[nodiscard]] SynthConfig parse_synth_config(std::string_view text, SynthConfig base = {});
[[nodiscard]] SynthConfig load_synth_config(const std::filesystem::path& path,
                                            SynthConfig base = {});
[[nodiscard]] std::string format_synth_config(const SynthConfig& config);

struct SynthResult {
  Recording recording;
  std::vector<LabeledSegment> truth;
};

/// Deterministic recording: lead-in, steps tiling [first onset, last end) contiguously with
/// one ground-truth segment per step, lead-out.
[[nodiscard]] SynthResult generate(const SynthConfig& config);

}  // namespace gaitmp
