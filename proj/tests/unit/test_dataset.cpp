#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "gaitmp/dataset.hpp"
#include "gaitmp/errors.hpp"

using namespace gaitmp;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gaitmp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <typename E>
std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("read a small recording") {
  std::istringstream in(
      "t,ax,ay,az,gx,gy,gz\n"
      "0.00,0,0,9.81,1,2,3\n"
      "0.01,0,0,9.81,1,2,3\n"
      "0.02,0.5,-0.5,9.7,-1,-2,-3\n");
  const auto rec = read_recording(in);
  REQUIRE(rec.size() == 3);
  CHECK(rec.sample_rate_hz == doctest::Approx(100.0));
  CHECK(rec.samples[2].gyro[2] == -3.0);
  CHECK(rec.samples[2].accel[0] == 0.5);
}

TEST_CASE("recording errors name the row") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    (void)read_recording(in, "x.csv");
  };
  const auto nan_msg = error_of<DataError>(
      [&] { parse("t,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0,0\n0.01,0,NaN,0,0,0,0\n"); });
  CHECK(nan_msg.find("row 3") != std::string::npos);

  CHECK_THROWS_AS(parse("t,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0\n"), DataError);
  CHECK_THROWS_AS(parse("time,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0,0\n"), DataError);
  CHECK_THROWS_AS(parse("t,ax,ay,az,gx,gy,gz\n0.01,0,0,0,0,0,0\n0.0,0,0,0,0,0,0\n"), DataError);
  CHECK_THROWS_AS(parse("t,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0,0\n0.01,0,0,0,0,0,0\n0.03,0,0,0,0,0,0\n"),
                  DataError);
  CHECK_THROWS_AS(parse("t,ax,ay,az,gx,gy,gz\n0,0,0,x,0,0,0\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("t,ax,ay,az,gx,gy,gz\n"), DataError);
  CHECK_THROWS_AS((void)load_recording("/nonexistent/rec.csv"), DataError);
}

TEST_CASE("recording round-trip is exact") {
  const auto g = generate(gaitmp::testing::fig2_config(4));
  const auto dir = scratch_dir("roundtrip");
  save_recording(dir / "rec.csv", g.recording);
  const auto back = load_recording(dir / "rec.csv");
  REQUIRE(back.size() == g.recording.size());
  CHECK(back.sample_rate_hz == doctest::Approx(g.recording.sample_rate_hz).epsilon(1e-9));
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& a = back.samples[i];
    const auto& b = g.recording.samples[i];
    CHECK(std::abs(a.t - b.t) <= 1e-9);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(a.accel[k] - b.accel[k]) <= 1e-9);
      CHECK(std::abs(a.gyro[k] - b.gyro[k]) <= 1e-9);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("annotations") {
  auto parse = [](const std::string& text, AnnotationOptions opt = {}) {
    std::istringstream in(text);
    return read_annotations(in, "a.csv", opt);
  };
  const auto one = parse("start,end,label\n0,100,ok\n");
  REQUIRE(one.size() == 1);
  CHECK(one[0] == LabeledSegment{0, 100, "ok"});
  CHECK_FALSE(one[0].anomalous());

  const auto overlap_msg =
      error_of<DataError>([&] { parse("start,end,label\n0,100,ok\n90,200,ab\n"); });
  CHECK(overlap_msg.find("row 3") != std::string::npos);
  CHECK_THROWS_AS(parse("start,end,label\n10,10,ok\n"), DataError);
  CHECK_THROWS_AS(parse("start,end,label\n0,10,weird\n"), DataError);
  CHECK_THROWS_AS(parse("start,end,label\n-1,10,ok\n"), DataError);
  CHECK_THROWS_AS(parse("start,end\n0,10\n"), DataError);

  AnnotationOptions extra;
  extra.allow_extra_labels = true;
  const auto e = parse("start,end,label\n0,10,shuffle\n10,20,ab\n", extra);
  REQUIRE(e.size() == 2);
  CHECK_FALSE(e[0].anomalous());
  CHECK(e[1].anomalous());

  const std::vector<LabeledSegment> segs{{0, 50, "ok"}, {50, 120, "ab"}, {130, 200, "ok"}};
  const auto dir = scratch_dir("ann");
  save_annotations(dir / "a.csv", segs);
  CHECK(load_annotations(dir / "a.csv") == segs);
  std::filesystem::remove_all(dir);

  CHECK(annotation_path_for("data/walk01.csv") == std::filesystem::path("data/walk01.ann.csv"));
}

TEST_CASE("a fixture mirroring the reference corpus counts 1047 ok and 318 ab steps") {
  int recordings = 0, total_ok = 0, total_ab = 0;
  for (const auto& row : kReferenceCorpus) {
    CHECK(is_known_pathology(row.pathology));
    // spread the row's steps over its recordings and read each back as an annotation file
    for (int r = 0; r < row.recordings; ++r) {
      const int ok = row.ok_steps / row.recordings + (r < row.ok_steps % row.recordings ? 1 : 0);
      const int ab = row.ab_steps / row.recordings + (r < row.ab_steps % row.recordings ? 1 : 0);
      std::vector<LabeledSegment> segs;
      for (int k = 0; k < ok + ab; ++k)
        segs.push_back({static_cast<std::size_t>(k) * 110, static_cast<std::size_t>(k + 1) * 110,
                        k < ok ? "ok" : "ab"});
      std::ostringstream csv;
      write_annotations(csv, segs);
      std::istringstream back(csv.str());
      const auto parsed = read_annotations(back);
      ++recordings;
      for (const auto& s : parsed) (s.anomalous() ? total_ab : total_ok) += 1;
    }
  }
  CHECK(recordings == 48);
  CHECK(total_ok == 1047);
  CHECK(total_ab == 318);
  CHECK_FALSE(is_known_pathology("Waddling"));
}

TEST_CASE("generator layout for the 7 + 2 + 3 scenario") {
  auto c = gaitmp::testing::fig2_config(1);
  const auto g = generate(c);
  REQUIRE(g.truth.size() == 12);
  for (std::size_t k = 0; k < 12; ++k) CHECK(g.truth[k].anomalous() == (k == 7 || k == 8));
  for (std::size_t k = 1; k < 12; ++k) CHECK(g.truth[k].start == g.truth[k - 1].end);
  CHECK(g.truth.front().start == 100);  // 1 s lead-in
  CHECK(g.recording.size() == g.truth.back().end + 100);
  CHECK(g.recording.sample_rate_hz == 100.0);
  CHECK(g.recording.meta.pathology_label == "synthetic");
  g.recording.validate();
  validate_annotations(g.truth);

  // step lengths follow the period within the jitter
  for (const auto& s : g.truth) {
    CHECK(s.end - s.start >= 100);
    CHECK(s.end - s.start <= 120);
  }
}

TEST_CASE("generator determinism and labels") {
  const auto a = generate(gaitmp::testing::fig2_config(9));
  const auto b = generate(gaitmp::testing::fig2_config(9));
  REQUIRE(a.recording.size() == b.recording.size());
  for (std::size_t i = 0; i < a.recording.size(); ++i) {
    CHECK(a.recording.samples[i].gyro == b.recording.samples[i].gyro);
    CHECK(a.recording.samples[i].accel == b.recording.samples[i].accel);
    CHECK(a.recording.samples[i].t == b.recording.samples[i].t);
  }
  CHECK(a.truth == b.truth);

  const auto c = generate(gaitmp::testing::fig2_config(10));
  CHECK(c.recording.samples[150].gyro != a.recording.samples[150].gyro);

  SynthConfig normal;
  normal.n_anomalous_steps = 0;
  for (const auto& s : generate(normal).truth) CHECK(s.label == "ok");

  SynthConfig none;
  none.n_normal_steps = 0;
  none.n_anomalous_steps = 0;
  CHECK_THROWS_AS((void)generate(none), UsageError);
}

TEST_CASE("anomalous steps differ from normal ones for every kind") {
  for (auto kind : {AnomalyKind::amplitude_scaled, AnomalyKind::time_warped,
                    AnomalyKind::shape_replaced}) {
    auto c = gaitmp::testing::fig2_config(2);
    c.anomaly_kind = kind;
    c.noise_std = 0.0;
    c.period_jitter = 0.0;
    c.amplitude_jitter = 0.0;
    const auto g = generate(c);
    const auto gy = g.recording.project({Source::gyro, Channel::y});
    auto energy = [&](const LabeledSegment& s) {
      double e = 0.0, peak = 0.0;
      for (std::size_t i = s.start; i < s.end; ++i) {
        e += gy[i] * gy[i];
        peak = std::max(peak, std::abs(gy[i]));
      }
      return std::pair{e, peak};
    };
    const auto n = energy(g.truth[6]);
    const auto n2 = energy(g.truth[5]);
    const auto a = energy(g.truth[7]);
    CHECK(n.first == doctest::Approx(n2.first));
    CHECK(std::abs(a.first - n.first) > 0.05 * n.first);
    CHECK(parse_anomaly_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS((void)parse_anomaly_kind("sideways"), UsageError);
}

TEST_CASE("synth config text") {
  const auto c = parse_synth_config(
      "# scenario\n"
      "n_normal_steps = 7\n"
      "n_anomalous_steps=2   # two bad ones\n"
      "anomaly_kind = time-warped\n"
      "template.peak_gyro_dps = 250.5\n"
      "rng_seed = 42\n");
  CHECK(c.n_normal_steps == 7);
  CHECK(c.n_anomalous_steps == 2);
  CHECK(c.anomaly_kind == AnomalyKind::time_warped);
  CHECK(c.template_.peak_gyro_dps == 250.5);
  CHECK(c.rng_seed == 42);
  CHECK(c.noise_std == SynthConfig{}.noise_std);

  const auto again = parse_synth_config(format_synth_config(c));
  CHECK(format_synth_config(again) == format_synth_config(c));

  CHECK_THROWS_AS((void)parse_synth_config("colour = blue\n"), UsageError);
  CHECK_THROWS_AS((void)parse_synth_config("n_normal_steps 7\n"), UsageError);
  CHECK_THROWS_AS((void)parse_synth_config("noise_std = loud\n"), UsageError);
}

TEST_CASE("label_segments") {
  const std::vector<StepSegment> steps{{0, 10}, {20, 35}};
  const auto l = label_segments(steps);
  REQUIRE(l.size() == 2);
  CHECK(l[1] == LabeledSegment{20, 35, "ok"});
}
