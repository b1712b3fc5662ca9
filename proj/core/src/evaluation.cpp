#include "gaitmp/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "gaitmp/errors.hpp"
#include "json.hpp"

namespace gaitmp {
namespace {

// Index of the segment containing `sample`, if any. Segments are ordered and disjoint.
std::optional<std::size_t> segment_of(const std::vector<LabeledSegment>& truth,
                                      std::size_t sample) {
  auto it = std::upper_bound(truth.begin(), truth.end(), sample,
                             [](std::size_t s, const LabeledSegment& seg) { return s < seg.start; });
  if (it == truth.begin()) return std::nullopt;
  --it;
  if (sample < it->end) return static_cast<std::size_t>(it - truth.begin());
  return std::nullopt;
}

// First alarm sample per segment (or nullopt) plus the number of alarms outside segments.
struct AlarmAssignment {
  std::vector<std::optional<std::size_t>> first_alarm;
  std::size_t outside = 0;
};

AlarmAssignment assign(std::span<const AlarmEvent> alarms,
                       const std::vector<LabeledSegment>& truth) {
  AlarmAssignment a{std::vector<std::optional<std::size_t>>(truth.size()), 0};
  for (const auto& alarm : alarms) {
    const auto seg = segment_of(truth, alarm.sample_index);
    if (!seg) {
      ++a.outside;
      continue;
    }
    auto& first = a.first_alarm[*seg];
    if (!first || alarm.sample_index < *first) first = alarm.sample_index;
  }
  return a;
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_decreasing(std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] < thresholds[i - 1]))
      throw UsageError("thresholds must be strictly decreasing");
  }
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts match_alarms(std::span<const AlarmEvent> alarms,
                             const std::vector<LabeledSegment>& truth) {
  const auto a = assign(alarms, truth);
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool hit = a.first_alarm[i].has_value();
    if (truth[i].anomalous()) {
      (hit ? c.tp : c.fn) += 1;
    } else {
      (hit ? c.fp : c.tn) += 1;
    }
  }
  c.fp += a.outside;
  return c;
}

double precision(const ConfusionCounts& c) noexcept { return safe_ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionCounts& c) noexcept { return safe_ratio(c.tp, c.tp + c.fn); }

double f1(const ConfusionCounts& c) noexcept {
  const double p = precision(c);
  const double r = recall(c);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::vector<double> earliness_samples(std::span<const AlarmEvent> alarms,
                                      const std::vector<LabeledSegment>& truth,
                                      double sample_rate_hz) {
  const auto a = assign(alarms, truth);
  std::vector<double> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth[i].anomalous() || !a.first_alarm[i]) continue;
    out.push_back(static_cast<double>(*a.first_alarm[i] - truth[i].start) / sample_rate_hz);
  }
  return out;
}

std::optional<double> earliness(std::span<const AlarmEvent> alarms,
                                const std::vector<LabeledSegment>& truth, double sample_rate_hz) {
  return mean_of(earliness_samples(alarms, truth, sample_rate_hz));
}

std::vector<double> threshold_grid(std::size_t count) {
  if (count < 2) throw UsageError("threshold grid needs at least two points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = 1.0 - static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

double auc_trapezoid(std::vector<RocPoint> points) {
  points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  points.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
  std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * 0.5 * (points[i].tpr + points[i - 1].tpr);
  return area;
}

RocCurve roc_from_counts(std::span<const double> thresholds,
                         std::span<const ConfusionCounts> counts) {
  if (thresholds.size() != counts.size()) throw UsageError("roc: thresholds/counts mismatch");
  require_decreasing(thresholds);
  RocCurve curve;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& c = counts[i];
    if (c.tp + c.fn == 0) throw DataError("roc: truth has no anomalous segment, TPR undefined");
    curve.points.push_back({safe_ratio(c.fp, c.fp + c.tn), safe_ratio(c.tp, c.tp + c.fn),
                            thresholds[i]});
  }
  curve.auc = auc_trapezoid(curve.points);
  return curve;
}

RocCurve roc_sweep(std::span<const ThresholdedAlarms> runs,
                   const std::vector<LabeledSegment>& truth) {
  std::vector<double> thresholds;
  std::vector<ConfusionCounts> counts;
  for (const auto& run : runs) {
    thresholds.push_back(run.threshold);
    counts.push_back(match_alarms(run.alarms, truth));
  }
  return roc_from_counts(thresholds, counts);
}

RocCurve mean_roc(std::span<const RocCurve> curves, std::size_t grid_points) {
  if (curves.empty()) throw UsageError("mean_roc: no curves");
  if (grid_points < 2) throw UsageError("mean_roc: grid needs at least two points");
  RocCurve out;
  std::vector<std::vector<RocPoint>> sorted;
  for (const auto& c : curves) {
    auto pts = c.points;
    pts.push_back({0.0, 0.0, 0.0});
    pts.push_back({1.0, 1.0, 0.0});
    std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
      return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
    });
    sorted.push_back(std::move(pts));
  }
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    double sum = 0.0;
    for (const auto& pts : sorted) {
      // Highest point at or left of x, first point strictly right of x.
      const auto right = std::upper_bound(pts.begin(), pts.end(), x,
                                          [](double v, const RocPoint& p) { return v < p.fpr; });
      const auto& left = *(right - 1);
      if (right == pts.end() || left.fpr == x) {
        sum += left.tpr;
      } else {
        const double w = (x - left.fpr) / (right->fpr - left.fpr);
        sum += left.tpr + w * (right->tpr - left.tpr);
      }
    }
    out.points.push_back(
        {x, sum / static_cast<double>(sorted.size()), std::numeric_limits<double>::quiet_NaN()});
  }
  out.auc = auc_trapezoid(out.points);
  std::reverse(out.points.begin(), out.points.end());
  return out;
}

double real_time_factor(const std::function<void()>& run, double duration_s, int repeats) {
  if (!(duration_s > 0.0)) throw UsageError("real_time_factor: empty recording");
  if (repeats < 1) throw UsageError("real_time_factor: repeats must be positive");
  run();
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  const double med = times.size() % 2 == 1
                         ? times[times.size() / 2]
                         : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
  // A timer tick below clock resolution would give 0; report the resolution instead.
  const double floor = std::chrono::duration<double>(std::chrono::steady_clock::duration(1)).count();
  return std::max(med, floor) / duration_s;
}

double real_time_factor(const StepDetectorSystemConfig& config, const Recording& recording,
                        int repeats) {
  return real_time_factor(
      [&] {
        StepGatedDetector detector(config);
        (void)replay(detector, recording.samples);
      },
      recording.duration_s(), repeats);
}

double real_time_factor(const NaiveDetectorConfig& config, const SignalSelector& signal,
                        const Recording& recording, int repeats) {
  return real_time_factor(
      [&] {
        const auto series = recording.project(signal);
        NaiveDetector detector(config);
        (void)replay(detector, series.values());
      },
      recording.duration_s(), repeats);
}

ScoredRun score_recording(const StepDetectorSystemConfig& config, const Recording& recording,
                          std::vector<LabeledSegment> truth, const Recording* prime) {
  StepGatedDetector detector(config);
  if (prime) detector.prime_history(prime->samples);
  auto result = replay(detector, recording.samples);
  return {recording.meta.recording_id, recording.sample_rate_hz, std::move(truth),
          std::move(result.trace)};
}

ScoredRun score_recording(const NaiveDetectorConfig& config, const SignalSelector& signal,
                          const Recording& recording, std::vector<LabeledSegment> truth,
                          const Recording* prime) {
  NaiveDetector detector(config);
  if (prime) detector.prime_history(prime->project(signal).values());
  const auto series = recording.project(signal);
  auto result = replay(detector, series.values());
  return {recording.meta.recording_id, recording.sample_rate_hz, std::move(truth),
          std::move(result.trace)};
}

EvaluationFamily evaluate_runs(std::string label, std::vector<ScoredRun> runs,
                               std::span<const double> thresholds) {
  if (runs.empty()) throw UsageError("evaluate: no recordings");
  require_decreasing(thresholds);
  std::sort(runs.begin(), runs.end(), [](const ScoredRun& a, const ScoredRun& b) {
    return a.recording_id < b.recording_id;
  });

  EvaluationFamily family;
  family.label = std::move(label);

  std::vector<ConfusionCounts> pooled(thresholds.size());
  std::vector<std::vector<ConfusionCounts>> per_run(runs.size(),
                                                    std::vector<ConfusionCounts>(thresholds.size()));
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<double> latencies;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto alarms = alarms_at_threshold(runs[r].trace, thresholds[t]);
      per_run[r][t] = match_alarms(alarms, runs[r].truth);
      pooled[t] += per_run[r][t];
      const auto e = earliness_samples(alarms, runs[r].truth, runs[r].sample_rate_hz);
      latencies.insert(latencies.end(), e.begin(), e.end());
    }
    family.by_threshold.push_back({thresholds[t], pooled[t], f1(pooled[t]), mean_of(latencies)});
  }

  family.pooled_roc = roc_from_counts(thresholds, pooled);
  std::vector<RocCurve> curves;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (std::any_of(runs[r].truth.begin(), runs[r].truth.end(),
                    [](const LabeledSegment& s) { return s.anomalous(); }))
      curves.push_back(roc_from_counts(thresholds, per_run[r]));
  }
  if (!curves.empty()) family.mean_roc = mean_roc(curves);

  std::size_t best_j = 0;
  std::size_t best_f1 = 0;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const auto& p = family.pooled_roc.points[t];
    const auto& q = family.pooled_roc.points[best_j];
    const double j = p.tpr - p.fpr;
    const double jq = q.tpr - q.fpr;
    if (j > jq || (j == jq && family.by_threshold[t].f1 > family.by_threshold[best_j].f1))
      best_j = t;
    if (family.by_threshold[t].f1 > family.by_threshold[best_f1].f1) best_f1 = t;
  }
  family.operating_point = family.by_threshold[best_j];
  family.best_f1_point = family.by_threshold[best_f1];

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto alarms = alarms_at_threshold(runs[r].trace, thresholds[best_j]);
    const auto& c = per_run[r][best_j];
    family.per_recording.push_back({runs[r].recording_id, c, f1(c),
                                    earliness(alarms, runs[r].truth, runs[r].sample_rate_hz)});
  }
  return family;
}

namespace {

nlohmann::ordered_json counts_json(const ConfusionCounts& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  return j;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json summary_json(const ThresholdSummary& s) {
  nlohmann::ordered_json j;
  j["threshold"] = s.threshold;
  j["counts"] = counts_json(s.counts);
  j["f1"] = s.f1;
  j["mean_earliness_s"] = optional_json(s.mean_earliness_s);
  return j;
}

nlohmann::ordered_json roc_json(const RocCurve& roc, bool with_threshold) {
  nlohmann::ordered_json j;
  j["auc"] = roc.auc;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : roc.points) {
    nlohmann::ordered_json pj;
    pj["fpr"] = p.fpr;
    pj["tpr"] = p.tpr;
    if (with_threshold) pj["threshold"] = p.threshold;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json root;
  auto families = nlohmann::ordered_json::array();
  for (const auto& f : report.families) {
    nlohmann::ordered_json fj;
    fj["label"] = f.label;
    fj["aggregate_f1"] = f.operating_point.f1;
    fj["auc"] = f.pooled_roc.auc;
    fj["operating_point"] = summary_json(f.operating_point);
    fj["best_f1_point"] = summary_json(f.best_f1_point);
    auto per = nlohmann::ordered_json::array();
    for (const auto& r : f.per_recording) {
      nlohmann::ordered_json rj;
      rj["recording_id"] = r.recording_id;
      rj["counts"] = counts_json(r.counts);
      rj["f1"] = r.f1;
      rj["mean_earliness_s"] = optional_json(r.mean_earliness_s);
      per.push_back(std::move(rj));
    }
    fj["per_recording"] = std::move(per);
    fj["roc"] = roc_json(f.pooled_roc, true);
    fj["mean_roc"] = roc_json(f.mean_roc, false);
    auto sweep = nlohmann::ordered_json::array();
    for (const auto& s : f.by_threshold) sweep.push_back(summary_json(s));
    fj["by_threshold"] = std::move(sweep);
    families.push_back(std::move(fj));
  }
  root["families"] = std::move(families);
  root["real_time_factor"] = optional_json(report.real_time_factor);
  return root.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const EvaluationReport& report) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "report.json");
    out << report_json(report);
  }
  auto roc = open_out(dir / "roc.csv");
  roc << "fpr,tpr,threshold,family\n";
  auto f1s = open_out(dir / "f1_by_threshold.csv");
  f1s << "threshold,tp,fp,fn,tn,f1,family\n";
  auto early = open_out(dir / "earliness.csv");
  early << "recording_id,mean_earliness_s,threshold,family\n";
  for (const auto& f : report.families) {
    for (const auto& p : f.pooled_roc.points)
      roc << p.fpr << ',' << p.tpr << ',' << p.threshold << ',' << f.label << '\n';
    for (const auto& s : f.by_threshold) {
      f1s << s.threshold << ',' << s.counts.tp << ',' << s.counts.fp << ',' << s.counts.fn << ','
          << s.counts.tn << ',' << s.f1 << ',' << f.label << '\n';
    }
    for (const auto& r : f.per_recording) {
      early << r.recording_id << ',';
      if (r.mean_earliness_s) early << *r.mean_earliness_s;
      early << ',' << f.operating_point.threshold << ',' << f.label << '\n';
    }
  }
}

}  // namespace gaitmp
