// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gaitmp/gaitmp.hpp"

using namespace gaitmp;
using gaitmp::testing::close_rel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

// The desk-scale corpus: 50 recordings of 10 to 15 steps, anomaly kind cycling.
std::vector<SynthResult> corpus() {
  std::vector<SynthResult> out;
  for (int i = 0; i < 50; ++i) {
    SynthConfig c;
    c.rng_seed = 1000 + static_cast<std::uint64_t>(i);
    c.anomaly_kind = static_cast<AnomalyKind>(i % 3);
    const int total = 10 + i % 6;
    c.n_anomalous_steps = 1 + i % 3;
    c.n_normal_steps = total - c.n_anomalous_steps;
    c.anomaly_position = 4 + i % 4;
    out.push_back(generate(c));
  }
  return out;
}

void criterion_1(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> pick_m(4, 32);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t m = pick_m(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(4 * m, 512)(rng);
    auto x = k % 2 ? gaitmp::testing::random_walk(n, rng()) : gaitmp::testing::gaussian_noise(n, rng());
    const TimeSeries ts(std::move(x), 100.0);
    const auto fast = matrix_profile_self(ts, m);
    const auto slow = brute_force_mp(ts, m, default_exclusion(m));
    o.require(fast.size() == slow.size(), "profile sizes differ");
    for (std::size_t i = 0; i < fast.size(); ++i) {
      o.require(close_rel(fast.profile[i], slow.profile[i], 1e-9), "profile mismatch");
      if (std::isfinite(fast.profile[i]))
        worst = std::max(worst, std::abs(fast.profile[i] - slow.profile[i]) /
                                    std::max({std::abs(slow.profile[i]), 1.0}));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime");
  o.detail << "200 instances, max rel diff " << worst << ", " << secs << " s";
}

void criterion_2(Outcome& o) {
  std::size_t checked = 0;
  double worst_affine = 0.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t m = 4 + seed % 29;
    const std::size_t n = 4 * m + 13 * seed;
    const auto x = gaitmp::testing::random_walk(n, seed);
    const auto r = matrix_profile_self(TimeSeries(x, 100.0), m);
    o.require(r.size() == n - m + 1, "profile length");
    const double bound = 2.0 * std::sqrt(static_cast<double>(m));
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r.profile[i])) {
        o.require(r.indices[i] == kNoNeighbor, "infinite value with a neighbor");
        continue;
      }
      o.require(r.profile[i] >= 0.0 && r.profile[i] <= bound, "value outside [0, 2 sqrt(m)]");
      const auto gap = std::abs(static_cast<std::int64_t>(i) - r.indices[i]);
      o.require(gap > static_cast<std::int64_t>(r.exclusion), "exclusion zone violated");
      ++checked;
    }

    const double a = 0.01 + 7.0 * static_cast<double>(seed), b = -300.0 + 40.0 * static_cast<double>(seed);
    std::vector<double> y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [&](double v) { return a * v + b; });
    const auto ry = matrix_profile_self(TimeSeries(y, 100.0), m);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (std::isinf(r.profile[i]) || std::isinf(ry.profile[i])) {
        o.require(r.profile[i] == ry.profile[i], "affine sentinel mismatch");
        continue;
      }
      worst_affine = std::max(worst_affine, std::abs(r.profile[i] - ry.profile[i]));
    }
  }
  o.require(worst_affine <= 1e-7, "affine invariance");
  o.detail << checked << " entries checked, max affine diff " << worst_affine;
}

void criterion_3(Outcome& o) {
  for (auto kind : {AnomalyKind::amplitude_scaled, AnomalyKind::time_warped,
                    AnomalyKind::shape_replaced}) {
    auto c = gaitmp::testing::fig2_config(1);
    c.anomaly_kind = kind;
    const auto g = generate(c);
    StepGatedDetector d(StepDetectorSystemConfig::for_rate(c.sample_rate_hz));
    const auto r = replay(d, g.recording.samples);
    const auto counts = match_alarms(r.alarms, g.truth);
    for (const auto& a : r.alarms) {
      const bool inside = std::any_of(g.truth.begin(), g.truth.end(), [&](const LabeledSegment& s) {
        return s.anomalous() && s.start <= a.sample_index && a.sample_index < s.end;
      });
      o.require(inside, "alarm outside the anomalous span (" + to_string(kind) + ")");
    }
    o.require(f1(counts) == 1.0, "F1 below 1 (" + to_string(kind) + ")");
    o.detail << to_string(kind) << ": " << r.alarms.size() << " alarms, F1 " << f1(counts) << "; ";
  }
}

void criteria_4_5(const std::vector<SynthResult>& data, Outcome& o4, Outcome& o5) {
  const auto t0 = Clock::now();
  std::vector<ScoredRun> runs;
  for (const auto& g : data)
    runs.push_back(score_recording(StepDetectorSystemConfig::for_rate(100.0), g.recording, g.truth));
  const auto fam = evaluate_runs("step", runs, threshold_grid());
  const double secs = seconds_since(t0);
  const auto& op = fam.operating_point;

  o4.require(op.f1 >= 0.90, "F1 at the ROC-optimal threshold");
  o4.require(fam.pooled_roc.auc >= 0.95, "AUC");
  o4.require(secs < 300.0, "runtime");
  o4.detail << "threshold " << op.threshold << ", F1 " << op.f1 << " (tp " << op.counts.tp
            << ", fp " << op.counts.fp << ", fn " << op.counts.fn << "), AUC "
            << fam.pooled_roc.auc << ", " << secs << " s";

  const double period = SynthConfig{}.step_period_s;
  o5.require(op.mean_earliness_s.has_value(), "no true positives");
  const double e = op.mean_earliness_s.value_or(1e9);
  o5.require(e < period, "earliness");
  o5.detail << "mean earliness " << e << " s, step period " << period << " s";
}

void criterion_6(const std::vector<SynthResult>& data, Outcome& o) {
  std::size_t early_alarms = 0, early_events = 0;
  for (const auto& g : data) {
    auto cfg = StepDetectorSystemConfig::for_rate(100.0);
    o.require(cfg.step.initial_threshold >= 1e9, "initial threshold is not high");
    StepGatedDetector d(cfg);
    bool history_seen = false;
    for (const auto& s : g.recording.samples) {
      const auto a = d.push(s);
      if (!history_seen) {
        early_alarms += a.has_value();
        early_events += d.step_events().size();
      }
      history_seen = history_seen || d.history_updates() > 0;
    }
    o.require(history_seen, "History never filled");
  }
  o.require(early_alarms == 0, "alarm before History");
  o.require(early_events == 0, "step event before History");
  o.detail << data.size() << " recordings, " << early_alarms << " alarms and " << early_events
           << " step events before the first History update";
}

std::vector<StepSegment> streamed(std::span<const double> env, StepDetectorState state) {
  std::vector<StepEvent> events;
  for (std::size_t i = 0; i < env.size(); ++i)
    for (const auto& e : state.feed(env[i], i)) events.push_back(e);
  for (const auto& e : state.finish(env.size())) events.push_back(e);
  return segments_from_events(events);
}

void criterion_7(const std::vector<SynthResult>& data, Outcome& o) {
  std::size_t fixtures = 0, segments = 0;
  auto check = [&](std::span<const double> env, const StepDetectorState& st) {
    const auto batch = detect_boundaries(env, st);
    o.require(streamed(env, st) == batch, "stream and batch differ");
    segments += batch.size();
    ++fixtures;
  };
  for (const auto& g : data) {
    const auto env = envelope(g.recording.project({}));
    for (double frac : {0.3, 0.5, 0.7}) {
      StepDetectorParams p;
      p.threshold_fraction = frac;
      StepDetectorState st(p);
      recompute_threshold(st, env.values());
      check(env.values(), st);
    }
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto x = gaitmp::testing::gaussian_noise(500, seed, 1.0);
    for (auto& v : x) v = std::abs(v);
    StepDetectorParams p;
    p.onset_offset_ms = 10.0 * static_cast<double>(seed % 6);
    p.release_offset_ms = 10.0 * static_cast<double>(seed % 4);
    p.min_step_ms = 10.0 * static_cast<double>(seed % 5);
    StepDetectorState st(p);
    st.set_threshold(0.8 + 0.05 * static_cast<double>(seed % 12));
    check(x, st);
  }
  o.detail << fixtures << " fixtures, " << segments << " segments";
}

void criterion_8(Outcome& o) {
  SynthConfig c;
  c.lead_in_s = 1.0;
  c.lead_out_s = 1.0;
  c.period_jitter = 0.0;
  c.n_anomalous_steps = 5;
  c.n_normal_steps = static_cast<int>(std::round(58.0 / c.step_period_s)) - c.n_anomalous_steps;
  const auto g = generate(c);
  const double rtf = real_time_factor(StepDetectorSystemConfig::for_rate(100.0), g.recording, 5);
  o.require(g.recording.duration_s() >= 59.0 && g.recording.duration_s() <= 61.0,
            "recording is not 60 s");
  o.require(rtf < 1.0, "RTF");
  o.detail << "duration " << g.recording.duration_s() << " s, RTF " << rtf << " (median of 5)";
}

void criterion_9(Outcome& o) {
  o.require(f1({5, 0, 0, 0}) == 1.0, "perfect F1");
  o.require(f1({0, 3, 2, 0}) == 0.0, "zero F1");
  o.require(std::abs(f1({8, 2, 4, 0}) - 8.0 / 11.0) < 1e-12, "F1 example");

  // perfect and chance curves through the sweep
  std::vector<LabeledSegment> truth;
  std::vector<ScoreUpdate> good, flat;
  for (std::size_t k = 0; k < 12; ++k) {
    truth.push_back({k * 100, (k + 1) * 100, k % 4 == 3 ? "ab" : "ok"});
    good.push_back({k * 100 + 20, 0.0, truth.back().anomalous() ? 0.9 : 0.1, 30, k});
    flat.push_back({k * 100 + 20, 0.0, 0.5, 30, k});
  }
  const auto grid = threshold_grid();
  std::vector<ThresholdedAlarms> a, b;
  for (double t : grid) {
    a.push_back({t, alarms_at_threshold(good, t)});
    b.push_back({t, alarms_at_threshold(flat, t)});
  }
  const double perfect = roc_sweep(a, truth).auc;
  const double chance = roc_sweep(b, truth).auc;
  o.require(std::abs(perfect - 1.0) < 1e-12, "perfect AUC");
  o.require(std::abs(chance - 0.5) < 1e-12, "chance AUC");

  // hand-computed trapezoid: (0,0) (0.2,0.5) (0.6,0.75) (1,1)
  const double hand = 0.2 * 0.25 + 0.4 * 0.625 + 0.4 * 0.875;
  const double got = auc_trapezoid({{0.6, 0.75, 0.3}, {0.2, 0.5, 0.6}});
  o.require(std::abs(got - hand) < 1e-12, "trapezoid");

  const std::vector<LabeledSegment> one{{900, 1000, "ok"}, {1000, 1100, "ab"}};
  const std::vector<AlarmEvent> alarm{{1050, 10.5, 0.9, 40}};
  const auto e = earliness(alarm, one, 100.0);
  o.require(e.has_value() && std::abs(*e - 0.5) < 1e-12, "earliness example");
  o.detail << "AUC perfect " << perfect << ", chance " << chance << ", trapezoid " << got << " vs "
           << hand;
}

}  // namespace

int main() {
  const auto data = corpus();
  std::vector<std::pair<std::string, Outcome>> results(9);
  const char* names[] = {"oracle equivalence",    "matrix profile definition",
                         "two-anomaly scenario",  "desk-scale detection quality",
                         "earliness",             "cold start",
                         "batch/stream equivalence", "real-time factor",
                         "metric self-tests"};
  for (std::size_t i = 0; i < 9; ++i) results[i].first = names[i];

  auto guarded = [](Outcome& o, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& ex) {
      o.require(false, std::string("exception: ") + ex.what());
    }
  };
  guarded(results[0].second, [&] { criterion_1(results[0].second); });
  guarded(results[1].second, [&] { criterion_2(results[1].second); });
  guarded(results[2].second, [&] { criterion_3(results[2].second); });
  guarded(results[3].second, [&] { criteria_4_5(data, results[3].second, results[4].second); });
  guarded(results[5].second, [&] { criterion_6(data, results[5].second); });
  guarded(results[6].second, [&] { criterion_7(data, results[6].second); });
  guarded(results[7].second, [&] { criterion_8(results[7].second); });
  guarded(results[8].second, [&] { criterion_9(results[8].second); });

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, o] = results[i];
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, name.c_str(),
                o.detail.str().c_str());
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
