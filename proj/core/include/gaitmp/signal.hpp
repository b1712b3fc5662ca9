#pragma once

#include <array>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitmp/time_series.hpp"

namespace gaitmp {

using Vec3 = std::array<double, 3>;

/// One IMU reading: accelerometer in m/s^2, gyroscope in deg/s.
struct SensorSample {
  double t = 0.0;
  Vec3 accel{};
  Vec3 gyro{};
};

enum class Source { accel, gyro, both };
enum class Channel { x, y, z, l1, l2, linf };

struct SignalSelector {
  Source source = Source::gyro;
  Channel channel = Channel::linf;

  friend bool operator==(const SignalSelector&, const SignalSelector&) = default;
};

inline constexpr double kDefaultSampleRateHz = 100.0;
inline constexpr double kDefaultEnvelopeWindowMs = 100.0;

[[nodiscard]] double project(const Vec3& v, Channel channel) noexcept;

/// Scalar projection of one source. Source::both has no single scalar and throws UsageError;
/// use project_sources for it.
[[nodiscard]] double project(const SensorSample& sample, const SignalSelector& sel);

/// One value per scalar stream implied by the selector: [gyro, accel] for Source::both.
[[nodiscard]] std::vector<double> project_sources(const SensorSample& sample,
                                                  const SignalSelector& sel);
[[nodiscard]] std::size_t stream_count(const SignalSelector& sel) noexcept;

[[nodiscard]] std::string to_string(Source s);
[[nodiscard]] std::string to_string(Channel c);
[[nodiscard]] Source parse_source(std::string_view text);
[[nodiscard]] Channel parse_channel(std::string_view text);

/// Width in samples of an envelope window; at least 1 or UsageError.
[[nodiscard]] std::size_t envelope_width(double window_ms, double sample_rate_hz);

/// Centered, edge-truncated running max of |x|. Window covers [i - w/2, i - w/2 + w).
[[nodiscard]] TimeSeries envelope(const TimeSeries& series,
                                  double window_ms = kDefaultEnvelopeWindowMs);

/// Streaming form of envelope(): output for index i is released once its window is complete,
/// i.e. after lookahead() further samples, or on flush(). Outputs are identical to the batch form.
class EnvelopeFollower {
 public:
  struct Output {
    std::size_t index;
    double value;
  };

  explicit EnvelopeFollower(std::size_t width);

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t lookahead() const noexcept { return width_ - 1 - width_ / 2; }

  std::optional<Output> push(double x);
  std::vector<Output> flush();

 private:
  Output emit_next();

  std::size_t width_;
  std::size_t pushed_ = 0;
  std::size_t next_out_ = 0;
  // (index, |x|) with strictly decreasing values front to back.
  std::deque<std::pair<std::size_t, double>> window_;
};

}  // namespace gaitmp
