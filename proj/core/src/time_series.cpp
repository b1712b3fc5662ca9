#include "gaitmp/time_series.hpp"

#include <cmath>
#include <string>

#include "gaitmp/errors.hpp"

namespace gaitmp {

TimeSeries::TimeSeries(std::vector<double> values, double sample_rate_hz)
    : values_(std::move(values)), sample_rate_hz_(sample_rate_hz) {
  if (values_.empty()) throw UsageError("time series must contain at least one sample");
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw UsageError("sample rate must be positive and finite");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw DataError("non-finite value at sample " + std::to_string(i));
  }
}

}  // namespace gaitmp
