#pragma once

// Exact z-normalized matrix profile: distance profiles (MASS), ordered
// self-join (STOMP), AB-join, and a literal brute-force reference.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gaitmp/time_series.hpp"

namespace gaitmp {

inline constexpr double kDefaultStdEps = 1e-8;

/// Direct dot products are used below this series length, FFT convolution above.
inline constexpr std::size_t kFftCutoff = 1024;

/// Sentinel for "no valid (non-trivial) neighbor".
inline constexpr std::int64_t kNoNeighbor = -1;

struct MatrixProfileResult {
  std::vector<double> profile;       // +inf where indices[i] == kNoNeighbor
  std::vector<std::int64_t> indices;
  std::size_t m = 0;
  std::size_t exclusion = 0;

  [[nodiscard]] std::size_t size() const noexcept { return profile.size(); }
};

struct Discord {
  std::size_t index;
  double value;
};

struct Motif {
  std::size_t i;
  std::int64_t j;
  double value;
};

/// Mean and population standard deviation of every length-m window.
struct WindowStats {
  std::vector<double> mean;
  std::vector<double> stdev;
};

[[nodiscard]] WindowStats sliding_mean_std(std::span<const double> x, std::size_t m);

/// Z-score with population stdev; near-constant input (stdev <= eps) maps to zeros.
[[nodiscard]] std::vector<double> znormalize(std::span<const double> x,
                                             double eps = kDefaultStdEps);

/// Euclidean distance between z-normalized a and b, in [0, 2*sqrt(m)].
/// Both constant -> 0, exactly one constant -> sqrt(m).
[[nodiscard]] double znorm_distance(std::span<const double> a, std::span<const double> b,
                                    double eps = kDefaultStdEps);

[[nodiscard]] std::vector<double> sliding_dot_product_direct(std::span<const double> query,
                                                             std::span<const double> series);
[[nodiscard]] std::vector<double> sliding_dot_product_fft(std::span<const double> query,
                                                          std::span<const double> series);

/// output[i] = sum_k query[k] * series[i + k]; picks the direct or FFT path by kFftCutoff.
[[nodiscard]] std::vector<double> sliding_dot_product(std::span<const double> query,
                                                      std::span<const double> series);
[[nodiscard]] std::vector<double> sliding_dot_product(std::span<const double> query,
                                                      const TimeSeries& series);

/// z-normalized distance from query to every window of series (MASS).
[[nodiscard]] std::vector<double> distance_profile(std::span<const double> query,
                                                   std::span<const double> series,
                                                   double eps = kDefaultStdEps);
[[nodiscard]] std::vector<double> distance_profile(std::span<const double> query,
                                                   const TimeSeries& series,
                                                   double eps = kDefaultStdEps);

[[nodiscard]] constexpr std::size_t default_exclusion(std::size_t m) noexcept {
  return (m + 1) / 2;
}

/// Self-join with trivial-match exclusion |i - j| > exclusion, computed in STOMP order.
[[nodiscard]] MatrixProfileResult matrix_profile_self(const TimeSeries& series, std::size_t m,
                                                      std::size_t exclusion,
                                                      double eps = kDefaultStdEps);
[[nodiscard]] inline MatrixProfileResult matrix_profile_self(const TimeSeries& series,
                                                             std::size_t m) {
  return matrix_profile_self(series, m, default_exclusion(m));
}

/// For each window of query_series, the nearest window of reference_series. No exclusion.
[[nodiscard]] MatrixProfileResult matrix_profile_ab(std::span<const double> query_series,
                                                    std::span<const double> reference_series,
                                                    std::size_t m, double eps = kDefaultStdEps);
[[nodiscard]] MatrixProfileResult matrix_profile_ab(const TimeSeries& query_series,
                                                    const TimeSeries& reference_series,
                                                    std::size_t m, double eps = kDefaultStdEps);

/// O(n^2 m) nested-loop reference over znorm_distance; shares no state with the fast paths.
[[nodiscard]] MatrixProfileResult brute_force_mp(const TimeSeries& series, std::size_t m,
                                                 std::size_t exclusion,
                                                 double eps = kDefaultStdEps);

/// Largest finite profile entry, smallest index on ties. Throws DataError if none is finite.
[[nodiscard]] Discord discord(const MatrixProfileResult& result);

/// Smallest finite profile entry and its neighbor, smallest index on ties.
[[nodiscard]] Motif motif(const MatrixProfileResult& result);

}  // namespace gaitmp
