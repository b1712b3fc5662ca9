#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gaitmp/dataset.hpp"

namespace gaitmp::testing {

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> x(n);
  double v = 0.0;
  for (auto& xi : x) xi = (v += step(rng));
  return x;
}

inline std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (auto& xi : x) xi = d(rng);
  return x;
}

inline std::vector<double> sine(std::size_t n, double period, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
  return x;
}

// |a-b| relative to max(|a|,|b|,1)
inline bool close_rel(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

// 7 normal + 2 anomalous + 3 normal
inline SynthConfig fig2_config(std::uint64_t seed = 1) {
  SynthConfig c;
  c.n_normal_steps = 10;
  c.n_anomalous_steps = 2;
  c.anomaly_position = 7;
  c.rng_seed = seed;
  return c;
}

}  // namespace gaitmp::testing
