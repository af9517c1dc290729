#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "predho/streaming.hpp"

using namespace predho;

namespace {

// Drives a session: each tick the network can carry `rate(t)` Mbit/s.
void drive(StreamSession& s, double seconds, double dt,
           const std::function<double(double)>& rate,
           const std::function<void(const StreamSession&)>& check = {}) {
  const auto n = static_cast<long>(std::llround(seconds / dt));
  for (long i = 0; i < n; ++i) {
    const double demand = s.demand_bits();
    const double cap = rate(s.now()) * 1e6 * dt;
    s.advance(std::min(demand, cap), dt);
    if (check) check(s);
  }
}

}  // namespace

TEST(Stream, ConstantTopRateLocksQualityNoStalls) {
  StreamSession s;
  drive(s, 300.0, 0.1, [](double) { return 4.0; });
  const auto st = s.finalize();
  EXPECT_EQ(st.stall_count, 0u);
  const auto& seg = s.segments();
  ASSERT_GT(seg.size(), 100u);
  // After warm-up every request is at the top bitrate.
  std::size_t first_top = seg.size();
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (seg[i].bitrate == 4.0) {
      first_top = i;
      break;
    }
  }
  ASSERT_LT(first_top, 20u);
  for (std::size_t i = first_top; i < seg.size(); ++i) EXPECT_EQ(seg[i].bitrate, 4.0);
  EXPECT_EQ(st.highest_bitrate, 4.0);
  EXPECT_GT(st.hq_fraction, 0.9);
}

TEST(Stream, BufferRunsDryAfterItsLevel) {
  StreamSession s;
  drive(s, 30.0, 0.1, [](double) { return 50.0; });
  const double cut = s.now();
  const double buffered = s.buffer_level();
  ASSERT_GT(buffered, 7.9);
  double stall_at = -1.0;
  drive(s, 20.0, 0.1, [](double) { return 0.0; }, [&](const StreamSession& x) {
    if (stall_at < 0.0 && x.stalled()) stall_at = x.now();
  });
  EXPECT_NEAR(stall_at - cut, buffered, 1e-9);
  const auto st = s.finalize();
  ASSERT_EQ(st.stall_count, 1u);
  EXPECT_NEAR(st.stalls[0].start - cut, buffered, 1e-9);
}

TEST(Stream, TwoStallsMeanLength) {
  // Starve twice; resume delivery 1.00 s and 1.92 s after each stall.
  StreamSession s;
  const double dt = 0.01;
  const std::vector<double> gaps = {1.0, 1.92};
  std::size_t stall_no = 0;
  double stall_start = -1.0;
  bool feeding = true;
  double starve_from = 5.0;
  auto rate = [&](double t) {
    if (feeding && t >= starve_from) feeding = false;
    if (!feeding && stall_start >= 0.0 && t + dt >= stall_start + gaps[stall_no] - 1e-9) {
      return 1e4;  // whole segment in this tick
    }
    return feeding ? 1e4 : 0.0;
  };
  auto check = [&](const StreamSession& x) {
    if (x.stalled() && stall_start < 0.0 && !feeding) stall_start = x.now();
    if (!x.stalled() && stall_start >= 0.0) {
      ++stall_no;
      stall_start = -1.0;
      feeding = true;
      starve_from = x.now() + 0.5;
    }
  };
  const auto n = static_cast<long>(std::llround(60.0 / dt));
  for (long i = 0; i < n && stall_no < 2; ++i) {
    const double demand = s.demand_bits();
    s.advance(std::min(demand, rate(s.now()) * 1e6 * dt), dt);
    check(s);
  }
  const auto st = s.finalize();
  ASSERT_EQ(st.stall_count, 2u);
  EXPECT_NEAR(st.stalls[0].length(), 1.0, 1e-9);
  EXPECT_NEAR(st.stalls[1].length(), 1.92, 1e-9);
  EXPECT_NEAR(st.mean_stall_len, 1.46, 1e-9);
}

TEST(Stream, NoStallsMeansZeroStats) {
  StreamSession s;
  drive(s, 60.0, 0.1, [](double) { return 8.0; });
  const auto st = s.finalize();
  EXPECT_EQ(st.stall_count, 0u);
  EXPECT_EQ(st.mean_stall_len, 0.0);
  EXPECT_EQ(st.stalled_time, 0.0);
}

TEST(Stream, SingleBitrateIsAllTopQuality) {
  StreamConfig cfg;
  cfg.bitrates = {2.0};
  StreamSession s(cfg);
  drive(s, 60.0, 0.1, [](double) { return 3.0; });
  EXPECT_EQ(s.finalize().hq_fraction, 1.0);
}

TEST(Stream, InitialStallExcluded) {
  StreamSession s;
  drive(s, 20.0, 0.1, [](double t) { return t < 3.0 ? 0.0 : 5.0; });
  const auto st = s.finalize();
  EXPECT_EQ(st.stall_count, 0u);
  EXPECT_NEAR(st.initial_stall_len, 3.4, 1e-9);  // 2 Mbit segment at 5 Mbit/s
}

TEST(Stream, StallOpenAtEndIsCounted) {
  StreamSession s;
  drive(s, 10.0, 0.1, [](double) { return 10.0; });
  drive(s, 15.0, 0.1, [](double) { return 0.0; });
  const auto st = s.finalize();
  ASSERT_EQ(st.stall_count, 1u);
  EXPECT_NEAR(st.stalls[0].end, s.now(), 1e-9);
}

TEST(Stream, InvariantsUnderRandomCapacity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StreamSession s;
    double level = 3.0;
    drive(
        s, 400.0, 0.1,
        [&](double) {
          if (u(rng) < 0.02) level = u(rng) < 0.3 ? 0.0 : 6.0 * u(rng);
          return level;
        },
        [&](const StreamSession& x) {
          ASSERT_GE(x.buffer_level(), 0.0);
          ASSERT_LE(x.buffer_level(), 10.0);
        });
    const auto st = s.finalize();
    EXPECT_NEAR(st.played_time + st.stalled_time + st.initial_stall_len,
                st.session_time, 0.1 + 1e-9)
        << "seed " << seed;
    std::size_t changes = 0;
    const auto& seg = s.segments();
    for (std::size_t i = 1; i < seg.size(); ++i) {
      changes += seg[i].bitrate != seg[i - 1].bitrate;
    }
    EXPECT_EQ(st.adaptation_count, changes);
    for (const auto& r : seg) {
      EXPECT_TRUE(r.bitrate == 1.0 || r.bitrate == 2.0 || r.bitrate == 4.0);
    }
  }
}

TEST(Stream, AdaptationRules) {
  StreamSession s;
  // Fast link: steps up one level at a time.
  drive(s, 40.0, 0.1, [](double) { return 40.0; });
  const auto& seg = s.segments();
  EXPECT_EQ(seg.front().bitrate, 1.0);
  for (std::size_t i = 1; i < seg.size(); ++i) {
    EXPECT_LE(seg[i].bitrate, 2.0 * seg[i - 1].bitrate);
  }
  // Then a crawl: the buffer sinks below 4 s and quality steps down.
  drive(s, 40.0, 0.1, [](double) { return 1.5; });
  EXPECT_LT(s.segments().back().bitrate, 4.0);
}

TEST(Stream, ConfigValidation) {
  StreamConfig c;
  c.bitrates = {2.0, 1.0};
  EXPECT_THROW(StreamSession{c}, ConfigError);
  c = StreamConfig{};
  c.buffer_capacity = 1.0;
  EXPECT_THROW(StreamSession{c}, ConfigError);
  c = StreamConfig{};
  c.down_threshold = 9.0;
  EXPECT_THROW(StreamSession{c}, ConfigError);
}
