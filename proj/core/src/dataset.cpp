#include "gaitmp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "gaitmp/errors.hpp"

namespace gaitmp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

std::string where(std::string_view source, std::size_t row) {
  return std::string(source) + ": row " + std::to_string(row);
}

double parse_double(std::string_view cell, std::string_view source, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError(where(source, row) + ": cannot parse number '" + std::string(cell) + "'");
  if (!std::isfinite(v)) throw DataError(where(source, row) + ": non-finite value");
  return v;
}

std::size_t parse_index(std::string_view cell, std::string_view source, std::size_t row) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError(where(source, row) + ": cannot parse sample index '" + std::string(cell) + "'");
  return v;
}

void put_double(std::ostream& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

std::string recording_id_from(const std::filesystem::path& path) { return path.stem().string(); }

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

bool is_known_pathology(std::string_view label) noexcept {
  return std::any_of(kReferenceCorpus.begin(), kReferenceCorpus.end(),
                     [&](const CorpusEntry& e) { return e.pathology == label; });
}

void Recording::validate() const {
  if (samples.empty()) throw DataError("recording is empty");
  if (!(sample_rate_hz > 0.0)) throw DataError("recording sample rate must be positive");
  const double period = 1.0 / sample_rate_hz;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    bool finite = std::isfinite(s.t);
    for (double v : s.accel) finite = finite && std::isfinite(v);
    for (double v : s.gyro) finite = finite && std::isfinite(v);
    if (!finite) throw DataError("sample " + std::to_string(i) + " is not finite");
    if (i > 0) {
      const double dt = s.t - samples[i - 1].t;
      if (!(dt > 0.0)) throw DataError("time is not increasing at sample " + std::to_string(i));
      if (std::abs(dt - period) >= 0.01 * period)
        throw DataError("non-uniform sampling at sample " + std::to_string(i));
    }
  }
}

TimeSeries Recording::project(const SignalSelector& sel) const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(gaitmp::project(s, sel));
  return TimeSeries(std::move(v), sample_rate_hz);
}

Recording read_recording(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(source) + ": empty file");
  if (trim(line) != kRecordingHeader)
    throw DataError(std::string(source) + ": expected header '" + std::string(kRecordingHeader) +
                    "'");
  Recording rec;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7)
      throw DataError(where(source, row) + ": expected 7 columns, got " +
                      std::to_string(cells.size()));
    SensorSample s;
    s.t = parse_double(cells[0], source, row);
    for (int k = 0; k < 3; ++k) s.accel[k] = parse_double(cells[1 + k], source, row);
    for (int k = 0; k < 3; ++k) s.gyro[k] = parse_double(cells[4 + k], source, row);
    if (!rec.samples.empty() && !(s.t > rec.samples.back().t))
      throw DataError(where(source, row) + ": time is not increasing");
    rec.samples.push_back(s);
  }
  if (rec.samples.empty()) throw DataError(std::string(source) + ": no samples");

  if (rec.samples.size() >= 2) {
    std::vector<double> dts;
    dts.reserve(rec.samples.size() - 1);
    for (std::size_t i = 1; i < rec.samples.size(); ++i)
      dts.push_back(rec.samples[i].t - rec.samples[i - 1].t);
    const double period = median(dts);
    for (std::size_t i = 0; i < dts.size(); ++i) {
      if (std::abs(dts[i] - period) >= 0.01 * period)
        throw DataError(where(source, i + 3) + ": non-uniform sampling");
    }
    rec.sample_rate_hz = 1.0 / period;
  }
  return rec;
}

Recording load_recording(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open recording " + path.string());
  auto rec = read_recording(in, path.string());
  rec.meta.recording_id = recording_id_from(path);
  return rec;
}

void write_recording(std::ostream& out, const Recording& rec) {
  out << kRecordingHeader << '\n';
  for (const auto& s : rec.samples) {
    put_double(out, s.t);
    for (double v : s.accel) {
      out << ',';
      put_double(out, v);
    }
    for (double v : s.gyro) {
      out << ',';
      put_double(out, v);
    }
    out << '\n';
  }
}

void save_recording(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write recording " + path.string());
  write_recording(out, rec);
  if (!out) throw DataError("failed writing recording " + path.string());
}

namespace {

// Empty string when `seg` is acceptable after `prev`.
std::string segment_problem(const LabeledSegment* prev, const LabeledSegment& seg,
                            AnnotationOptions options) {
  if (seg.start >= seg.end) return "start must be < end";
  if (seg.label.empty() || seg.label.find(',') != std::string::npos) return "invalid label";
  if (!options.allow_extra_labels && seg.label != kLabelOk && seg.label != kLabelAb)
    return "unknown label '" + seg.label + "'";
  if (prev && seg.start < prev->end) return "overlaps or precedes the previous segment";
  return {};
}

}  // namespace

void validate_annotations(const std::vector<LabeledSegment>& segments,
                          AnnotationOptions options) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto problem = segment_problem(i > 0 ? &segments[i - 1] : nullptr, segments[i], options);
    if (!problem.empty()) throw DataError("annotation " + std::to_string(i) + ": " + problem);
  }
}

std::vector<LabeledSegment> read_annotations(std::istream& in, std::string_view source,
                                             AnnotationOptions options) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(source) + ": empty file");
  if (trim(line) != kAnnotationHeader)
    throw DataError(std::string(source) + ": expected header '" +
                    std::string(kAnnotationHeader) + "'");
  std::vector<LabeledSegment> segments;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3)
      throw DataError(where(source, row) + ": expected 3 columns, got " +
                      std::to_string(cells.size()));
    LabeledSegment seg{parse_index(cells[0], source, row), parse_index(cells[1], source, row),
                       std::string(cells[2])};
    const auto problem =
        segment_problem(segments.empty() ? nullptr : &segments.back(), seg, options);
    if (!problem.empty()) throw DataError(where(source, row) + ": " + problem);
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<LabeledSegment> load_annotations(const std::filesystem::path& path,
                                             AnnotationOptions options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotations " + path.string());
  return read_annotations(in, path.string(), options);
}

void write_annotations(std::ostream& out, const std::vector<LabeledSegment>& segments) {
  out << kAnnotationHeader << '\n';
  for (const auto& s : segments) out << s.start << ',' << s.end << ',' << s.label << '\n';
}

void save_annotations(const std::filesystem::path& path,
                      const std::vector<LabeledSegment>& segments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write annotations " + path.string());
  write_annotations(out, segments);
  if (!out) throw DataError("failed writing annotations " + path.string());
}

std::filesystem::path annotation_path_for(const std::filesystem::path& recording) {
  auto p = recording;
  p.replace_extension(".ann.csv");
  return p;
}

std::vector<LabeledSegment> label_segments(const std::vector<StepSegment>& steps,
                                           std::string_view label) {
  std::vector<LabeledSegment> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back({s.start, s.end, std::string(label)});
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic gait

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::amplitude_scaled: return "amplitude-scaled";
    case AnomalyKind::time_warped: return "time-warped";
    case AnomalyKind::shape_replaced: return "shape-replaced";
  }
  return "?";
}

AnomalyKind parse_anomaly_kind(std::string_view text) {
  if (text == "amplitude-scaled" || text == "amplitude_scaled") return AnomalyKind::amplitude_scaled;
  if (text == "time-warped" || text == "time_warped") return AnomalyKind::time_warped;
  if (text == "shape-replaced" || text == "shape_replaced") return AnomalyKind::shape_replaced;
  throw UsageError("unknown anomaly kind '" + std::string(text) + "'");
}

void SynthConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw UsageError("synth: sample rate must be positive");
  if (n_normal_steps < 0 || n_anomalous_steps < 0)
    throw UsageError("synth: step counts must be non-negative");
  if (n_normal_steps + n_anomalous_steps == 0)
    throw UsageError("synth: zero steps requested, recording would be empty");
  if (anomaly_position > n_normal_steps)
    throw UsageError("synth: anomaly position beyond the normal steps");
  if (!(step_period_s > 0.0)) throw UsageError("synth: step period must be positive");
  if (!(noise_std >= 0.0)) throw UsageError("synth: noise_std must be non-negative");
  if (!(lead_in_s >= 0.0 && lead_out_s >= 0.0)) throw UsageError("synth: negative lead time");
  if (!(period_jitter >= 0.0 && period_jitter < 0.5 && amplitude_jitter >= 0.0 &&
        amplitude_jitter < 1.0))
    throw UsageError("synth: jitter out of range");
  const auto& t = template_;
  if (!(t.swing_fraction > 0.0 && t.onset_fraction >= 0.0 &&
        t.onset_fraction + t.swing_fraction < 1.0))
    throw UsageError("synth: swing must fit inside the step period");
}

namespace {

using Setter = void (*)(SynthConfig&, std::string_view);

double to_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("synth config: bad number '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int to_int(std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("synth config: bad integer '" + std::string(v) + "'");
  return out;
}

const std::map<std::string_view, Setter>& synth_setters() {
  static const std::map<std::string_view, Setter> setters{
      {"sample_rate_hz", [](SynthConfig& c, std::string_view v) { c.sample_rate_hz = to_double(v); }},
      {"n_normal_steps", [](SynthConfig& c, std::string_view v) { c.n_normal_steps = to_int<int>(v); }},
      {"n_anomalous_steps",
       [](SynthConfig& c, std::string_view v) { c.n_anomalous_steps = to_int<int>(v); }},
      {"anomaly_position",
       [](SynthConfig& c, std::string_view v) { c.anomaly_position = to_int<int>(v); }},
      {"step_period_s", [](SynthConfig& c, std::string_view v) { c.step_period_s = to_double(v); }},
      {"anomaly_kind",
       [](SynthConfig& c, std::string_view v) { c.anomaly_kind = parse_anomaly_kind(v); }},
      {"noise_std", [](SynthConfig& c, std::string_view v) { c.noise_std = to_double(v); }},
      {"rng_seed", [](SynthConfig& c, std::string_view v) { c.rng_seed = to_int<std::uint64_t>(v); }},
      {"lead_in_s", [](SynthConfig& c, std::string_view v) { c.lead_in_s = to_double(v); }},
      {"lead_out_s", [](SynthConfig& c, std::string_view v) { c.lead_out_s = to_double(v); }},
      {"period_jitter", [](SynthConfig& c, std::string_view v) { c.period_jitter = to_double(v); }},
      {"amplitude_jitter",
       [](SynthConfig& c, std::string_view v) { c.amplitude_jitter = to_double(v); }},
      {"template.swing_fraction",
       [](SynthConfig& c, std::string_view v) { c.template_.swing_fraction = to_double(v); }},
      {"template.onset_fraction",
       [](SynthConfig& c, std::string_view v) { c.template_.onset_fraction = to_double(v); }},
      {"template.peak_gyro_dps",
       [](SynthConfig& c, std::string_view v) { c.template_.peak_gyro_dps = to_double(v); }},
      {"template.toe_off_ratio",
       [](SynthConfig& c, std::string_view v) { c.template_.toe_off_ratio = to_double(v); }},
      {"template.heel_strike_ratio",
       [](SynthConfig& c, std::string_view v) { c.template_.heel_strike_ratio = to_double(v); }},
      {"template.burst_freq_hz",
       [](SynthConfig& c, std::string_view v) { c.template_.burst_freq_hz = to_double(v); }},
      {"template.accel_coupling",
       [](SynthConfig& c, std::string_view v) { c.template_.accel_coupling = to_double(v); }},
  };
  return setters;
}

}  // namespace

SynthConfig parse_synth_config(std::string_view text, SynthConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("synth config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& setters = synth_setters();
    const auto it = setters.find(key);
    if (it == setters.end())
      throw UsageError("synth config line " + std::to_string(line_no) + ": unknown key '" +
                       std::string(key) + "'");
    it->second(base, value);
  }
  return base;
}

SynthConfig load_synth_config(const std::filesystem::path& path, SynthConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open synth config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_synth_config(buf.str(), base);
}

std::string format_synth_config(const SynthConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_rate_hz = " << c.sample_rate_hz << '\n'
      << "n_normal_steps = " << c.n_normal_steps << '\n'
      << "n_anomalous_steps = " << c.n_anomalous_steps << '\n'
      << "anomaly_position = " << c.anomaly_position << '\n'
      << "step_period_s = " << c.step_period_s << '\n'
      << "anomaly_kind = " << to_string(c.anomaly_kind) << '\n'
      << "noise_std = " << c.noise_std << '\n'
      << "rng_seed = " << c.rng_seed << '\n'
      << "lead_in_s = " << c.lead_in_s << '\n'
      << "lead_out_s = " << c.lead_out_s << '\n'
      << "period_jitter = " << c.period_jitter << '\n'
      << "amplitude_jitter = " << c.amplitude_jitter << '\n'
      << "template.swing_fraction = " << c.template_.swing_fraction << '\n'
      << "template.onset_fraction = " << c.template_.onset_fraction << '\n'
      << "template.peak_gyro_dps = " << c.template_.peak_gyro_dps << '\n'
      << "template.toe_off_ratio = " << c.template_.toe_off_ratio << '\n'
      << "template.heel_strike_ratio = " << c.template_.heel_strike_ratio << '\n'
      << "template.burst_freq_hz = " << c.template_.burst_freq_hz << '\n'
      << "template.accel_coupling = " << c.template_.accel_coupling << '\n';
  return out.str();
}

namespace {

struct Burst {
  double center;     // fraction of the swing phase
  double width;      // fraction of the swing phase (Gaussian sigma)
  double amplitude;  // deg/s on the sagittal axis
  double freq_hz;
};

// Bursts making up one step's swing, in swing-phase coordinates.
std::vector<Burst> step_bursts(const StepTemplate& tpl, bool anomalous, AnomalyKind kind,
                               std::mt19937_64& rng, double amplitude_jitter) {
  std::uniform_real_distribution<double> jitter(1.0 - amplitude_jitter, 1.0 + amplitude_jitter);
  const double peak = tpl.peak_gyro_dps;
  std::vector<Burst> bursts{
      {0.10, 0.07, tpl.toe_off_ratio * peak * jitter(rng), tpl.burst_freq_hz},
      {0.50, 0.15, peak * jitter(rng), tpl.burst_freq_hz},
      {0.92, 0.06, tpl.heel_strike_ratio * peak * jitter(rng), tpl.burst_freq_hz},
  };
  if (!anomalous) return bursts;
  switch (kind) {
    case AnomalyKind::amplitude_scaled:
      // Weak swing, hard landing.
      bursts[1].amplitude *= 0.55;
      bursts[2].amplitude *= 2.0;
      break;
    case AnomalyKind::time_warped:
      // Swing duration is stretched by the caller; the peak also drifts late.
      bursts[1].center = 0.62;
      break;
    case AnomalyKind::shape_replaced:
      // Split swing with a tremor carrier.
      bursts = {
          {0.12, 0.07, tpl.toe_off_ratio * peak * jitter(rng), tpl.burst_freq_hz},
          {0.32, 0.09, 0.8 * peak * jitter(rng), 6.0},
          {0.70, 0.09, -0.75 * peak * jitter(rng), 6.0},
          {0.92, 0.06, tpl.heel_strike_ratio * peak * jitter(rng), tpl.burst_freq_hz},
      };
      break;
  }
  return bursts;
}

}  // namespace

SynthResult generate(const SynthConfig& config) {
  config.validate();
  const double rate = config.sample_rate_hz;
  const auto& tpl = config.template_;
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> period_jitter(1.0 - config.period_jitter,
                                                       1.0 + config.period_jitter);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int n_steps = config.n_normal_steps + config.n_anomalous_steps;
  const int position =
      config.anomaly_position < 0 ? config.n_normal_steps / 2 : config.anomaly_position;
  const double stretch = 1.7;

  struct StepPlan {
    std::size_t start;
    std::size_t end;
    bool anomalous;
    double swing_start_s;
    double swing_len_s;
    std::vector<Burst> bursts;
  };
  std::vector<StepPlan> plans;
  auto cursor = static_cast<std::size_t>(std::llround(config.lead_in_s * rate));
  for (int k = 0; k < n_steps; ++k) {
    const bool anomalous = k >= position && k < position + config.n_anomalous_steps;
    double period = config.step_period_s * period_jitter(rng);
    double swing = tpl.swing_fraction * period;
    if (anomalous && config.anomaly_kind == AnomalyKind::time_warped) {
      period += (stretch - 1.0) * swing;
      swing *= stretch;
    }
    const auto len = static_cast<std::size_t>(std::llround(period * rate));
    StepPlan plan{cursor,
                  cursor + len,
                  anomalous,
                  static_cast<double>(cursor) / rate + tpl.onset_fraction * config.step_period_s,
                  swing,
                  step_bursts(tpl, anomalous, config.anomaly_kind, rng, config.amplitude_jitter)};
    plans.push_back(std::move(plan));
    cursor += len;
  }
  const std::size_t total = cursor + static_cast<std::size_t>(std::llround(config.lead_out_s * rate));

  SynthResult result;
  auto& rec = result.recording;
  rec.sample_rate_hz = rate;
  rec.meta.recording_id = "synthetic_" + std::to_string(config.rng_seed);
  rec.samples.resize(total);

  std::size_t step = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const double t = static_cast<double>(i) / rate;
    while (step < plans.size() && i >= plans[step].end) ++step;
    double sagittal = 0.0;
    double lateral = 0.0;
    if (step < plans.size() && i >= plans[step].start) {
      const auto& plan = plans[step];
      const double u = (t - plan.swing_start_s) / plan.swing_len_s;
      for (const auto& b : plan.bursts) {
        const double z = (u - b.center) / b.width;
        if (std::abs(z) > 6.0) continue;
        const double dt = (u - b.center) * plan.swing_len_s;
        const double g = b.amplitude * std::exp(-0.5 * z * z) *
                         std::cos(2.0 * std::numbers::pi * b.freq_hz * dt);
        sagittal += g;
        if (&b == &plan.bursts[1]) lateral += 0.2 * g;
      }
    }
    auto& s = rec.samples[i];
    s.t = t;
    s.gyro = {lateral + config.noise_std * noise(rng), sagittal + config.noise_std * noise(rng),
              0.1 * sagittal + config.noise_std * noise(rng)};
    const double accel_noise = 0.05 * config.noise_std;
    s.accel = {tpl.accel_coupling * sagittal + accel_noise * noise(rng),
               0.5 * tpl.accel_coupling * lateral + accel_noise * noise(rng),
               9.81 + 0.5 * tpl.accel_coupling * std::abs(sagittal) + accel_noise * noise(rng)};
  }

  for (const auto& plan : plans) {
    result.truth.push_back(
        {plan.start, plan.end, std::string(plan.anomalous ? kLabelAb : kLabelOk)});
  }
  return result;
}

}  // namespace gaitmp
