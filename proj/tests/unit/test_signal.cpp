#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "gaitmp/errors.hpp"
#include "gaitmp/signal.hpp"

using namespace gaitmp;

TEST_CASE("projections of (3, -4, 0)") {
  SensorSample s;
  s.gyro = {3.0, -4.0, 0.0};
  s.accel = {0.0, 0.0, 9.81};
  CHECK(project(s, {Source::gyro, Channel::l1}) == 7.0);
  CHECK(project(s, {Source::gyro, Channel::l2}) == 5.0);
  CHECK(project(s, {Source::gyro, Channel::linf}) == 4.0);
  CHECK(project(s, {Source::gyro, Channel::y}) == -4.0);
  CHECK(project(s, {Source::accel, Channel::z}) == 9.81);
  CHECK_THROWS_AS((void)project(s, {Source::both, Channel::l2}), UsageError);

  const auto both = project_sources(s, {Source::both, Channel::linf});
  REQUIRE(both.size() == 2);
  CHECK(both[0] == 4.0);
  CHECK(both[1] == 9.81);
  CHECK(stream_count({Source::both, Channel::x}) == 2);
  CHECK(stream_count({}) == 1);
}

TEST_CASE("norm ordering Linf <= L2 <= L1") {
  const auto x = gaitmp::testing::gaussian_noise(300, 8, 50.0);
  for (std::size_t i = 0; i + 3 <= x.size(); i += 3) {
    const Vec3 v{x[i], x[i + 1], x[i + 2]};
    CHECK(project(v, Channel::linf) <= project(v, Channel::l2));
    CHECK(project(v, Channel::l2) <= project(v, Channel::l1) + 1e-12);
  }
}

TEST_CASE("selector names round-trip") {
  for (auto s : {Source::accel, Source::gyro, Source::both}) CHECK(parse_source(to_string(s)) == s);
  for (auto c : {Channel::x, Channel::y, Channel::z, Channel::l1, Channel::l2, Channel::linf})
    CHECK(parse_channel(to_string(c)) == c);
  CHECK(parse_channel("Linf") == Channel::linf);
  CHECK(parse_channel("L1") == Channel::l1);
  CHECK_THROWS_AS((void)parse_channel("l3"), UsageError);
  CHECK_THROWS_AS((void)parse_source("magnetometer"), UsageError);
}

TEST_CASE("envelope examples") {
  const TimeSeries c(std::vector<double>(25, -2.5), 100.0);
  const auto ec = envelope(c);
  for (double v : ec.values()) CHECK(v == 2.5);

  std::vector<double> imp(40, 0.0);
  imp[20] = 1.0;
  const auto e = envelope(TimeSeries(imp, 100.0), 100.0);
  REQUIRE(e.size() == imp.size());
  CHECK(e.sample_rate_hz() == 100.0);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 1.0) {
      ++ones;
      CHECK(i + 5 > 20);
      CHECK(i <= 25);
    } else {
      CHECK(e[i] == 0.0);
    }
  }
  CHECK(ones == 10);

  CHECK(envelope_width(100.0, 100.0) == 10);
  CHECK(envelope_width(100.0, 50.0) == 5);
  CHECK_THROWS_AS((void)envelope_width(1.0, 100.0), UsageError);
  CHECK_THROWS_AS((void)envelope_width(0.0, 100.0), UsageError);
}

TEST_CASE("envelope properties") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gaitmp::testing::gaussian_noise(200, seed, 3.0);
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    const TimeSeries ts(x, 100.0);
    const auto e50 = envelope(ts, 50.0);
    const auto e100 = envelope(ts, 100.0);
    const auto eneg = envelope(TimeSeries(neg, 100.0), 100.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(e50[i] >= std::abs(x[i]));
      CHECK(e100[i] >= e50[i]);
      CHECK(eneg[i] == e100[i]);
    }
  }
}

TEST_CASE("streaming envelope equals batch") {
  for (double ms : {10.0, 30.0, 100.0, 170.0}) {
    const auto x = gaitmp::testing::gaussian_noise(157, static_cast<std::uint64_t>(ms), 2.0);
    const TimeSeries ts(x, 100.0);
    const auto batch = envelope(ts, ms);
    EnvelopeFollower f(envelope_width(ms, 100.0));
    std::vector<EnvelopeFollower::Output> out;
    for (double v : x) {
      if (auto o = f.push(v)) {
        CHECK(o->index == out.size());
        out.push_back(*o);
      }
    }
    for (const auto& o : f.flush()) out.push_back(o);
    REQUIRE(out.size() == x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].index == i);
      CHECK(out[i].value == batch[i]);
    }
  }
}

TEST_CASE("envelope follower latency equals its lookahead") {
  EnvelopeFollower f(10);
  CHECK(f.lookahead() == 4);
  for (int i = 0; i < 4; ++i) CHECK_FALSE(f.push(1.0).has_value());
  const auto o = f.push(1.0);
  REQUIRE(o.has_value());
  CHECK(o->index == 0);
  CHECK_THROWS_AS(EnvelopeFollower(0), UsageError);
}
