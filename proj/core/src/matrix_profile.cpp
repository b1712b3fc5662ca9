#include "gaitmp/matrix_profile.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "gaitmp/errors.hpp"

namespace gaitmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

RealBuffer alloc_real(std::size_t n) {
  return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

ComplexBuffer alloc_complex(std::size_t n) {
  return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> centered(std::span<const double> x) {
  const double mu = mean_of(x);
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [mu](double v) { return v - mu; });
  return out;
}

void require_finite(std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]))
      throw DataError(std::string(what) + ": non-finite value at index " + std::to_string(i));
  }
}

// Distance from a raw window dot product plus window moments.
double distance_from_dot(double dot, std::size_t m, double mu_a, double sd_a, double mu_b,
                         double sd_b, double eps) {
  const bool flat_a = sd_a <= eps;
  const bool flat_b = sd_b <= eps;
  const double md = static_cast<double>(m);
  if (flat_a && flat_b) return 0.0;
  if (flat_a || flat_b) return std::sqrt(md);
  double rho = (dot - md * mu_a * mu_b) / (md * sd_a * sd_b);
  rho = std::clamp(rho, -1.0, 1.0);
  return std::sqrt(std::max(0.0, 2.0 * md * (1.0 - rho)));
}

}  // namespace

WindowStats sliding_mean_std(std::span<const double> x, std::size_t m) {
  if (m == 0 || m > x.size()) throw UsageError("window length out of range");
  const std::size_t count = x.size() - m + 1;
  WindowStats stats{std::vector<double>(count), std::vector<double>(count)};
  // Two-pass per window: exact for flat stretches inside otherwise varying signals.
  for (std::size_t i = 0; i < count; ++i) {
    const auto w = x.subspan(i, m);
    const double mu = mean_of(w);
    double ss = 0.0;
    for (double v : w) ss += (v - mu) * (v - mu);
    stats.mean[i] = mu;
    stats.stdev[i] = std::sqrt(ss / static_cast<double>(m));
  }
  return stats;
}

std::vector<double> znormalize(std::span<const double> x, double eps) {
  if (x.empty()) throw UsageError("znormalize: empty input");
  if (!(eps > 0.0)) throw UsageError("znormalize: eps must be positive");
  require_finite(x, "znormalize");
  const auto stats = sliding_mean_std(x, x.size());
  const double mu = stats.mean[0];
  const double sd = stats.stdev[0];
  std::vector<double> out(x.size(), 0.0);
  if (sd <= eps) return out;
  std::transform(x.begin(), x.end(), out.begin(), [mu, sd](double v) { return (v - mu) / sd; });
  return out;
}

double znorm_distance(std::span<const double> a, std::span<const double> b, double eps) {
  if (a.size() != b.size()) throw UsageError("znorm_distance: length mismatch");
  if (a.size() < 3) throw UsageError("znorm_distance: length must be at least 3");
  const auto za = znormalize(a, eps);
  const auto zb = znormalize(b, eps);
  const bool flat_a = std::all_of(za.begin(), za.end(), [](double v) { return v == 0.0; });
  const bool flat_b = std::all_of(zb.begin(), zb.end(), [](double v) { return v == 0.0; });
  if (flat_a && flat_b) return 0.0;
  if (flat_a || flat_b) return std::sqrt(static_cast<double>(a.size()));
  double ss = 0.0;
  for (std::size_t k = 0; k < za.size(); ++k) ss += (za[k] - zb[k]) * (za[k] - zb[k]);
  return std::sqrt(ss);
}

std::vector<double> sliding_dot_product_direct(std::span<const double> query,
                                               std::span<const double> series) {
  if (query.empty()) throw UsageError("sliding_dot_product: empty query");
  if (query.size() > series.size())
    throw UsageError("sliding_dot_product: query longer than series");
  const std::size_t m = query.size();
  std::vector<double> out(series.size() - m + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) acc += query[k] * series[i + k];
    out[i] = acc;
  }
  return out;
}

std::vector<double> sliding_dot_product_fft(std::span<const double> query,
                                            std::span<const double> series) {
  if (query.empty()) throw UsageError("sliding_dot_product: empty query");
  if (query.size() > series.size())
    throw UsageError("sliding_dot_product: query longer than series");
  const std::size_t n = series.size();
  const std::size_t m = query.size();
  const std::size_t len = n + m - 1;
  const std::size_t bins = len / 2 + 1;

  auto a = alloc_real(len);
  auto b = alloc_real(len);
  auto fa = alloc_complex(bins);
  auto fb = alloc_complex(bins);
  Plan fwd_a, fwd_b, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int ilen = static_cast<int>(len);
    fwd_a.reset(fftw_plan_dft_r2c_1d(ilen, a.get(), fa.get(), FFTW_ESTIMATE));
    fwd_b.reset(fftw_plan_dft_r2c_1d(ilen, b.get(), fb.get(), FFTW_ESTIMATE));
    inv.reset(fftw_plan_dft_c2r_1d(ilen, fa.get(), a.get(), FFTW_ESTIMATE));
  }

  // Correlation as convolution with the reversed query.
  std::fill(a.get(), a.get() + len, 0.0);
  std::fill(b.get(), b.get() + len, 0.0);
  std::copy(series.begin(), series.end(), a.get());
  for (std::size_t k = 0; k < m; ++k) b[k] = query[m - 1 - k];
  fftw_execute(fwd_a.get());
  fftw_execute(fwd_b.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(fa[k][0], fa[k][1]);
    const std::complex<double> y(fb[k][0], fb[k][1]);
    const auto z = x * y;
    fa[k][0] = z.real();
    fa[k][1] = z.imag();
  }
  fftw_execute(inv.get());

  std::vector<double> out(n - m + 1);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i + m - 1] * scale;
  return out;
}

std::vector<double> sliding_dot_product(std::span<const double> query,
                                        std::span<const double> series) {
  if (series.size() < kFftCutoff) return sliding_dot_product_direct(query, series);
  return sliding_dot_product_fft(query, series);
}

std::vector<double> sliding_dot_product(std::span<const double> query, const TimeSeries& series) {
  return sliding_dot_product(query, series.values());
}

std::vector<double> distance_profile(std::span<const double> query,
                                     std::span<const double> series, double eps) {
  const std::size_t m = query.size();
  if (m < 3) throw UsageError("distance_profile: query length must be at least 3");
  if (m > series.size()) throw UsageError("distance_profile: query longer than series");
  require_finite(query, "distance_profile");
  require_finite(series, "distance_profile");

  // Centering each side changes no correlation but limits cancellation in dot - m*mu*mu.
  const auto q = centered(query);
  const auto t = centered(series);
  const auto qstats = sliding_mean_std(q, m);
  const auto tstats = sliding_mean_std(t, m);
  const auto dots = sliding_dot_product(q, t);

  std::vector<double> out(dots.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = distance_from_dot(dots[i], m, qstats.mean[0], qstats.stdev[0], tstats.mean[i],
                               tstats.stdev[i], eps);
  }
  return out;
}

std::vector<double> distance_profile(std::span<const double> query, const TimeSeries& series,
                                     double eps) {
  return distance_profile(query, series.values(), eps);
}

MatrixProfileResult matrix_profile_self(const TimeSeries& series, std::size_t m,
                                        std::size_t exclusion, double eps) {
  const std::size_t n = series.size();
  if (m < 3 || 2 * m > n)
    throw UsageError("matrix_profile_self: m must satisfy 3 <= m <= n/2 (m=" + std::to_string(m) +
                     ", n=" + std::to_string(n) + ")");
  const std::size_t count = n - m + 1;
  MatrixProfileResult result{std::vector<double>(count, kInf),
                             std::vector<std::int64_t>(count, kNoNeighbor), m, exclusion};

  const auto t = centered(series.values());
  const auto stats = sliding_mean_std(t, m);
  const std::span<const double> ts(t);

  // First row of dot products; by symmetry also the first column.
  const auto first = sliding_dot_product(ts.first(m), ts);
  std::vector<double> row = first;

  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) {
      for (std::size_t j = count - 1; j >= 1; --j) {
        row[j] = row[j - 1] - t[i - 1] * t[j - 1] + t[i + m - 1] * t[j + m - 1];
      }
      row[0] = first[i];
    }
    double best = kInf;
    std::int64_t best_j = kNoNeighbor;
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= exclusion) continue;
      const double d = distance_from_dot(row[j], m, stats.mean[i], stats.stdev[i],
                                         stats.mean[j], stats.stdev[j], eps);
      if (d < best) {
        best = d;
        best_j = static_cast<std::int64_t>(j);
      }
    }
    result.profile[i] = best;
    result.indices[i] = best_j;
  }
  return result;
}

MatrixProfileResult matrix_profile_ab(std::span<const double> query_series,
                                      std::span<const double> reference_series, std::size_t m,
                                      double eps) {
  if (m < 3) throw UsageError("matrix_profile_ab: m must be at least 3");
  if (m > query_series.size() || m > reference_series.size())
    throw UsageError("matrix_profile_ab: m exceeds a series length");
  require_finite(query_series, "matrix_profile_ab");
  require_finite(reference_series, "matrix_profile_ab");

  const std::size_t qcount = query_series.size() - m + 1;
  const std::size_t rcount = reference_series.size() - m + 1;
  MatrixProfileResult result{std::vector<double>(qcount, kInf),
                             std::vector<std::int64_t>(qcount, kNoNeighbor), m, 0};

  const auto q = centered(query_series);
  const auto r = centered(reference_series);
  const auto qstats = sliding_mean_std(q, m);
  const auto rstats = sliding_mean_std(r, m);
  const std::span<const double> qs(q);
  const std::span<const double> rs(r);

  // Row 0 against every reference window, column 0 against every query window.
  std::vector<double> row = sliding_dot_product(qs.first(m), rs);
  const auto col = sliding_dot_product(rs.first(m), qs);

  for (std::size_t i = 0; i < qcount; ++i) {
    if (i > 0) {
      for (std::size_t j = rcount - 1; j >= 1; --j) {
        row[j] = row[j - 1] - q[i - 1] * r[j - 1] + q[i + m - 1] * r[j + m - 1];
      }
      row[0] = col[i];
    }
    double best = kInf;
    std::int64_t best_j = kNoNeighbor;
    for (std::size_t j = 0; j < rcount; ++j) {
      const double d = distance_from_dot(row[j], m, qstats.mean[i], qstats.stdev[i],
                                         rstats.mean[j], rstats.stdev[j], eps);
      if (d < best) {
        best = d;
        best_j = static_cast<std::int64_t>(j);
      }
    }
    result.profile[i] = best;
    result.indices[i] = best_j;
  }
  return result;
}

MatrixProfileResult matrix_profile_ab(const TimeSeries& query_series,
                                      const TimeSeries& reference_series, std::size_t m,
                                      double eps) {
  return matrix_profile_ab(query_series.values(), reference_series.values(), m, eps);
}

MatrixProfileResult brute_force_mp(const TimeSeries& series, std::size_t m, std::size_t exclusion,
                                   double eps) {
  const std::size_t n = series.size();
  if (m < 3 || 2 * m > n) throw UsageError("brute_force_mp: m must satisfy 3 <= m <= n/2");
  const std::size_t count = n - m + 1;
  MatrixProfileResult result{std::vector<double>(count, kInf),
                             std::vector<std::int64_t>(count, kNoNeighbor), m, exclusion};
  const auto x = series.values();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= exclusion) continue;
      const double d = znorm_distance(x.subspan(i, m), x.subspan(j, m), eps);
      if (d < result.profile[i]) {
        result.profile[i] = d;
        result.indices[i] = static_cast<std::int64_t>(j);
      }
    }
  }
  return result;
}

Discord discord(const MatrixProfileResult& result) {
  bool found = false;
  Discord best{0, 0.0};
  for (std::size_t i = 0; i < result.profile.size(); ++i) {
    const double v = result.profile[i];
    if (!std::isfinite(v)) continue;
    if (!found || v > best.value) {
      best = {i, v};
      found = true;
    }
  }
  if (!found) throw DataError("no discord: profile has no finite entries");
  return best;
}

Motif motif(const MatrixProfileResult& result) {
  bool found = false;
  Motif best{0, kNoNeighbor, 0.0};
  for (std::size_t i = 0; i < result.profile.size(); ++i) {
    const double v = result.profile[i];
    if (!std::isfinite(v)) continue;
    if (!found || v < best.value) {
      best = {i, result.indices[i], v};
      found = true;
    }
  }
  if (!found) throw DataError("no motif: profile has no finite entries");
  return best;
}

}  // namespace gaitmp
