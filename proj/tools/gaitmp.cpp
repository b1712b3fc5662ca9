// gaitmp: generate synthetic gait, segment steps, compute matrix profiles, replay detectors,
// evaluate threshold sweeps and time the detectors.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaitmp/gaitmp.hpp"

namespace fs = std::filesystem;
using namespace gaitmp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

// Output goes to a file, or stdout for "-" / empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty())
      fs::create_directories(parent);
    file_.open(path);
    if (!file_) throw DataError("cannot write " + path);
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SignalOpts {
  std::string source = "gyro";
  std::string channel = "linf";

  [[nodiscard]] SignalSelector selector() const { return {parse_source(source), parse_channel(channel)}; }
};

void add_signal_options(CLI::App* cmd, SignalOpts& s) {
  cmd->add_option("--source", s.source, "accel, gyro or both")->capture_default_str();
  cmd->add_option("--channel", s.channel, "x, y, z, l1, l2 or linf")->capture_default_str();
}

struct DetectorOpts {
  std::string mode = "step";
  SignalOpts signal;
  StepDetectorSystemConfig step = StepDetectorSystemConfig::for_rate(kDefaultSampleRateHz);
  NaiveDetectorConfig naive = NaiveDetectorConfig::for_rate(kDefaultSampleRateHz);
  std::optional<double> threshold;
  std::string prime;

  // The detectors run at the recording's rate; time-valued tunables are rescaled by the core.
  [[nodiscard]] StepDetectorSystemConfig step_config(double rate) const {
    auto c = step;
    c.sample_rate_hz = rate;
    c.step.sample_rate_hz = rate;
    c.signal = signal.selector();
    if (threshold) c.discord_threshold = *threshold;
    return c;
  }
  [[nodiscard]] NaiveDetectorConfig naive_config(double rate) const {
    auto c = naive;
    c.sample_rate_hz = rate;
    if (threshold) c.discord_threshold = *threshold;
    return c;
  }
};

void add_detector_options(CLI::App* cmd, DetectorOpts& d) {
  cmd->add_option("--mode", d.mode, "Detector: naive or step")
      ->check(CLI::IsMember({"naive", "step"}))
      ->capture_default_str();
  add_signal_options(cmd, d.signal);
  cmd->add_option("--threshold", d.threshold, "Alarm threshold on the normalized score in [0, 1]");
  cmd->add_option("--prime", d.prime, "Recording CSV of normal gait preloaded into History");

  auto& s = d.step;
  cmd->add_option("--history-s", s.history_s, "History length in seconds")->capture_default_str();
  cmd->add_option("--min-query-ms", s.min_query_ms)->capture_default_str();
  cmd->add_option("--max-buffer-s", s.max_buffer_s)->capture_default_str();
  cmd->add_option("--history-guard", s.history_guard_score,
                  "Steps scoring above this are not moved into History")
      ->capture_default_str();
  cmd->add_option("--envelope-ms", s.envelope_window_ms)->capture_default_str();
  cmd->add_option("--step-fraction", s.step.threshold_fraction,
                  "Step threshold as a fraction of the History envelope peak")
      ->capture_default_str();
  cmd->add_option("--step-initial", s.step.initial_threshold)->capture_default_str();
  cmd->add_option("--onset-ms", s.step.onset_offset_ms)->capture_default_str();
  cmd->add_option("--release-ms", s.step.release_offset_ms)->capture_default_str();
  cmd->add_option("--min-step-ms", s.step.min_step_ms)->capture_default_str();

  auto& n = d.naive;
  cmd->add_option("--frame-len", n.frame_len, "Naive Frame buffer length in samples")
      ->capture_default_str();
  cmd->add_option("--hop", n.hop, "Naive hop in samples")->capture_default_str();
  cmd->add_option("--naive-history-len", n.history_len, "Naive History length in samples")
      ->capture_default_str();
  cmd->add_option("--overlap", n.overlap_fraction)->capture_default_str();
}

// A recording CSV, or a single numeric column with an optional header line.
TimeSeries load_series(const std::string& path, const SignalSelector& sel, double rate) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (first.rfind("t,", 0) == 0) return load_recording(path).project(sel);

  std::vector<double> values;
  std::string line = first;
  std::size_t row = 1;
  auto take = [&](const std::string& text, bool header_ok) {
    if (text.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      if (header_ok) return;
      throw DataError(path + " row " + std::to_string(row) + ": not a number");
    }
    if (!std::isfinite(v)) throw DataError(path + " row " + std::to_string(row) + ": not finite");
    values.push_back(v);
  };
  take(line, true);
  while (std::getline(in, line)) {
    ++row;
    take(line, false);
  }
  if (values.empty()) throw DataError(path + ": no values");
  return TimeSeries(std::move(values), rate);
}

std::vector<LabeledSegment> truth_for(const fs::path& recording, const Recording& rec) {
  auto truth = load_annotations(annotation_path_for(recording));
  if (!truth.empty() && truth.back().end > rec.size())
    throw DataError(annotation_path_for(recording).string() + ": segment ends at " +
                    std::to_string(truth.back().end) + " past the recording (" +
                    std::to_string(rec.size()) + " samples)");
  return truth;
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  std::optional<int> normal, anomalous, position;
  std::optional<std::string> kind;
  std::optional<double> period, noise, rate, jitter;
  std::optional<std::uint64_t> seed;
  std::string synth_config;
  std::string out = ".";
  std::string name = "synthetic";
};

int cmd_generate(const GenerateOpts& o) {
  SynthConfig c;
  if (!o.synth_config.empty()) c = load_synth_config(o.synth_config);
  if (o.normal) c.n_normal_steps = *o.normal;
  if (o.anomalous) c.n_anomalous_steps = *o.anomalous;
  if (o.position) c.anomaly_position = *o.position;
  if (o.kind) c.anomaly_kind = parse_anomaly_kind(*o.kind);
  if (o.period) c.step_period_s = *o.period;
  if (o.noise) c.noise_std = *o.noise;
  if (o.rate) c.sample_rate_hz = *o.rate;
  if (o.jitter) c.period_jitter = *o.jitter;
  if (o.seed) c.rng_seed = *o.seed;

  const auto g = generate(c);
  std::error_code ec;
  fs::create_directories(o.out, ec);
  const fs::path rec_path = fs::path(o.out) / (o.name + ".csv");
  save_recording(rec_path, g.recording);
  save_annotations(annotation_path_for(rec_path), g.truth);
  std::cout << "seed " << c.rng_seed << "\n"
            << rec_path.string() << "\n"
            << annotation_path_for(rec_path).string() << "\n";
  return kExitOk;
}

struct SegmentOpts {
  std::string input;
  std::string out;
  SignalOpts signal;
  StepDetectorParams step;
  double envelope_ms = kDefaultEnvelopeWindowMs;
};

int cmd_segment(const SegmentOpts& o) {
  const auto rec = load_recording(o.input);
  const auto series = rec.project(o.signal.selector());
  const auto env = envelope(series, o.envelope_ms);
  auto params = o.step;
  params.sample_rate_hz = rec.sample_rate_hz;
  StepDetectorState state(params);
  recompute_threshold(state, env.values());
  const auto segs = detect_boundaries(env, state);
  Sink sink(o.out);
  write_annotations(sink.get(), label_segments(segs));
  std::cerr << segs.size() << " steps, threshold " << state.effective_threshold() << "\n";
  return kExitOk;
}

struct MpOpts {
  std::string input;
  std::string out;
  SignalOpts signal;
  std::size_t m = 0;
  std::optional<std::size_t> exclusion;
  double rate = kDefaultSampleRateHz;
  bool oracle = false;
};

int cmd_mp(const MpOpts& o) {
  const auto series = load_series(o.input, o.signal.selector(), o.rate);
  if (o.m < 2 || o.m > series.size())
    throw UsageError("m must be in [2, " + std::to_string(series.size()) + "], got " +
                     std::to_string(o.m));
  const std::size_t excl = o.exclusion.value_or(default_exclusion(o.m));
  const auto mp = matrix_profile_self(series, o.m, excl);

  Sink sink(o.out);
  auto& out = sink.get();
  out << "index,profile,nn_index\n" << std::setprecision(17);
  for (std::size_t i = 0; i < mp.size(); ++i)
    out << i << ',' << mp.profile[i] << ',' << mp.indices[i] << '\n';

  if (o.oracle) {
    const auto ref = brute_force_mp(series, o.m, excl);
    double worst = 0.0;
    for (std::size_t i = 0; i < mp.size(); ++i) {
      const double a = mp.profile[i], b = ref.profile[i];
      if (std::isinf(a) || std::isinf(b)) {
        if (a != b) worst = std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}));
    }
    std::cerr << "oracle max relative difference " << worst << "\n";
    if (!(worst <= 1e-9)) return kExitFailed;
  }
  return kExitOk;
}

struct DetectOpts {
  std::string input;
  std::string out;
  std::string trace;
  DetectorOpts det;
};

ReplayResult run_detector(const DetectorOpts& d, const Recording& rec, const Recording* prime) {
  if (d.mode == "naive") {
    NaiveDetector det(d.naive_config(rec.sample_rate_hz));
    const auto sel = d.signal.selector();
    if (prime) det.prime_history(prime->project(sel).values());
    const auto series = rec.project(sel);
    return replay(det, series.values());
  }
  StepGatedDetector det(d.step_config(rec.sample_rate_hz));
  if (prime) det.prime_history(std::span<const SensorSample>(prime->samples));
  return replay(det, rec.samples);
}

std::optional<Recording> load_prime(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_recording(path);
}

int cmd_detect(const DetectOpts& o) {
  const auto rec = load_recording(o.input);
  const auto prime = load_prime(o.det.prime);
  const auto result = run_detector(o.det, rec, prime ? &*prime : nullptr);

  Sink sink(o.out);
  for (const auto& a : result.alarms) sink.get() << to_json_line(a) << '\n';
  if (!o.trace.empty()) {
    Sink trace(o.trace);
    auto& t = trace.get();
    t << "sample_index,time_s,score,query_len,unit\n" << std::setprecision(17);
    for (const auto& u : result.trace)
      t << u.sample_index << ',' << u.time_s << ',' << u.score << ',' << u.query_len << ','
        << u.unit << '\n';
  }
  std::cerr << result.alarms.size() << " alarms, " << result.trace.size() << " updates\n";
  return kExitOk;
}

struct EvaluateOpts {
  std::vector<std::string> inputs;
  std::string out = "report";
  DetectorOpts det;
  std::vector<double> history_lens;
  std::size_t grid = 101;
  bool rtf = false;
};

int cmd_evaluate(const EvaluateOpts& o) {
  struct Input {
    Recording rec;
    std::vector<LabeledSegment> truth;
  };
  std::vector<Input> inputs;
  for (const auto& path : o.inputs) {
    auto rec = load_recording(path);
    auto truth = truth_for(path, rec);
    inputs.push_back({std::move(rec), std::move(truth)});
  }
  const auto prime = load_prime(o.det.prime);
  const Recording* pr = prime ? &*prime : nullptr;
  const auto grid = threshold_grid(o.grid);

  std::vector<double> lens = o.history_lens;
  if (lens.empty()) lens.push_back(o.det.step.history_s);

  EvaluationReport report;
  for (double len : lens) {
    std::vector<ScoredRun> runs;
    for (const auto& in : inputs) {
      const double rate = in.rec.sample_rate_hz;
      if (o.det.mode == "naive") {
        auto c = o.det.naive_config(rate);
        c.history_len = static_cast<std::size_t>(std::llround(len * rate));
        runs.push_back(score_recording(c, o.det.signal.selector(), in.rec, in.truth, pr));
      } else {
        auto c = o.det.step_config(rate);
        c.history_s = len;
        runs.push_back(score_recording(c, in.rec, in.truth, pr));
      }
    }
    std::ostringstream label;
    label << "history_" << len << "s";
    report.families.push_back(evaluate_runs(label.str(), std::move(runs), grid));
  }

  if (o.rtf && !inputs.empty()) {
    // slowest recording, so that the figure is an upper bound
    double worst = 0.0;
    for (const auto& in : inputs) {
      const double r = o.det.mode == "naive"
                           ? real_time_factor(o.det.naive_config(in.rec.sample_rate_hz),
                                              o.det.signal.selector(), in.rec)
                           : real_time_factor(o.det.step_config(in.rec.sample_rate_hz), in.rec);
      worst = std::max(worst, r);
    }
    report.real_time_factor = worst;
  }

  write_report(o.out, report);
  for (const auto& f : report.families)
    std::cout << f.label << ": auc " << f.pooled_roc.auc << ", threshold "
              << f.operating_point.threshold << ", f1 " << f.operating_point.f1 << "\n";
  return kExitOk;
}

struct BenchOpts {
  std::string input;
  DetectorOpts det;
  double seconds = 60.0;
  int repeats = 5;
  bool assert_realtime = false;
};

int cmd_bench(const BenchOpts& o) {
  Recording rec;
  if (!o.input.empty()) {
    rec = load_recording(o.input);
  } else {
    SynthConfig c;
    c.lead_in_s = 1.0;
    c.lead_out_s = 1.0;
    const int steps = static_cast<int>((o.seconds - 2.0) / c.step_period_s);
    c.n_anomalous_steps = std::max(1, steps / 10);
    c.n_normal_steps = std::max(1, steps - c.n_anomalous_steps);
    rec = generate(c).recording;
  }
  const double rtf = o.det.mode == "naive"
                         ? real_time_factor(o.det.naive_config(rec.sample_rate_hz),
                                            o.det.signal.selector(), rec, o.repeats)
                         : real_time_factor(o.det.step_config(rec.sample_rate_hz), rec, o.repeats);
  std::cout << "mode " << o.det.mode << ", duration " << rec.duration_s() << " s, rtf " << rtf
            << "\n";
  if (o.assert_realtime && !(rtf < 1.0)) {
    std::cerr << "real-time factor " << rtf << " is not below 1\n";
    return kExitFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gait anomaly detection with the matrix profile"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file of option values; command-line flags take precedence");

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic recording and its annotations");
  g->add_option("--normal", gen.normal, "Normal steps");
  g->add_option("--anomalous", gen.anomalous, "Anomalous steps");
  g->add_option("--position", gen.position, "Normal steps before the anomalous block");
  g->add_option("--kind", gen.kind, "amplitude_scaled, time_warped or shape_replaced");
  g->add_option("--period", gen.period, "Step period in seconds");
  g->add_option("--noise", gen.noise, "Gyroscope noise standard deviation");
  g->add_option("--rate", gen.rate, "Sample rate in Hz");
  g->add_option("--jitter", gen.jitter, "Relative step period jitter");
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--synth-config", gen.synth_config, "key = value generator settings")
      ->check(CLI::ExistingFile);
  g->add_option("-o,--out", gen.out, "Output directory")->capture_default_str();
  g->add_option("--name", gen.name, "File stem")->capture_default_str();

  SegmentOpts seg;
  auto* s = app.add_subcommand("segment", "Batch step segmentation of a recording");
  s->add_option("-i,--input", seg.input)->required();
  s->add_option("-o,--out", seg.out, "Annotation CSV (default stdout)");
  add_signal_options(s, seg.signal);
  s->add_option("--envelope-ms", seg.envelope_ms)->capture_default_str();
  s->add_option("--step-fraction", seg.step.threshold_fraction)->capture_default_str();
  s->add_option("--onset-ms", seg.step.onset_offset_ms)->capture_default_str();
  s->add_option("--release-ms", seg.step.release_offset_ms)->capture_default_str();
  s->add_option("--min-step-ms", seg.step.min_step_ms)->capture_default_str();

  MpOpts mpo;
  auto* m = app.add_subcommand("mp", "Self-join matrix profile of one signal");
  m->add_option("-i,--input", mpo.input, "Recording CSV or one value per line")->required();
  m->add_option("-o,--out", mpo.out, "Profile CSV (default stdout)");
  m->add_option("-m,--window", mpo.m, "Subsequence length")->required();
  m->add_option("--exclusion", mpo.exclusion, "Exclusion zone half-width (default (m+1)/2)");
  m->add_option("--rate", mpo.rate, "Sample rate of a plain value file")->capture_default_str();
  m->add_flag("--oracle", mpo.oracle, "Cross-check against the brute-force profile");
  add_signal_options(m, mpo.signal);

  DetectOpts det;
  auto* d = app.add_subcommand("detect", "Replay a recording through a detector");
  d->add_option("-i,--input", det.input)->required();
  d->add_option("-o,--out", det.out, "Alarm JSON lines (default stdout)");
  d->add_option("--emit-trace", det.trace, "CSV of every score update");
  add_detector_options(d, det.det);

  EvaluateOpts ev;
  auto* e = app.add_subcommand("evaluate", "Threshold sweep over annotated recordings");
  e->add_option("inputs", ev.inputs, "Recording CSVs; annotations are read from <stem>.ann.csv")
      ->required();
  e->add_option("-o,--out", ev.out, "Report directory")->capture_default_str();
  e->add_option("--history-len", ev.history_lens, "History length in seconds; repeat for families");
  e->add_option("--grid", ev.grid, "Thresholds in the sweep")->capture_default_str();
  e->add_flag("--rtf", ev.rtf, "Include the real-time factor");
  add_detector_options(e, ev.det);

  BenchOpts be;
  auto* b = app.add_subcommand("bench", "Real-time factor of a detector");
  b->add_option("-i,--input", be.input, "Recording CSV (default: synthetic)");
  b->add_option("--seconds", be.seconds, "Length of the synthetic recording")->capture_default_str();
  b->add_option("--repeats", be.repeats)->capture_default_str();
  b->add_flag("--assert-realtime", be.assert_realtime, "Exit 1 unless the RTF is below 1");
  add_detector_options(b, be.det);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    (void)app.exit(ex);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_segment(seg);
    if (*m) return cmd_mp(mpo);
    if (*d) return cmd_detect(det);
    if (*e) return cmd_evaluate(ev);
    if (*b) return cmd_bench(be);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const DataError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
