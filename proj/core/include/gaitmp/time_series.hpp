#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gaitmp {

/// Uniformly sampled scalar sequence. Values are finite and non-empty.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> values, double sample_rate_hz);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(values_.size()) / sample_rate_hz_;
  }

 private:
  std::vector<double> values_;
  double sample_rate_hz_;
};

}  // namespace gaitmp
