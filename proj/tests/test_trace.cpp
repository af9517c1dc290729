#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "predho/features.hpp"
#include "predho/netsim.hpp"
#include "predho/trace.hpp"

using namespace predho;

namespace {

ScenarioSpec spec_for(int id, std::uint64_t seed) {
  ScenarioSpec s;
  s.scenario_id = id;
  s.seed = seed;
  return s;
}

// Counts maximal unavailable runs by scanning a 1 s grid.
std::vector<double> scan_losses(const SensorTrace& tr) {
  std::vector<double> out;
  bool prev = true;
  for (double t = 0.0; t <= tr.duration(); t += 1.0) {
    const bool now = tr.wifi_available_at(t);
    if (prev && !now) out.push_back(t);
    prev = now;
  }
  return out;
}

std::vector<double> values_of(const SensorTrace& tr, SensorKind k) {
  std::vector<double> v;
  for (const auto& s : tr.samples()) {
    if (s.kind == k) v.push_back(s.value);
  }
  return v;
}

}  // namespace

TEST(TraceCsv, EchoesTwoSamplesAvailableThroughout) {
  const auto tr = parse_trace_csv(
      "t,kind,value\n0,wifi_rssi,-40\n1,wifi_rssi,-42\n0,wifi_available,1\n");
  ASSERT_EQ(tr.samples().size(), 2u);
  EXPECT_EQ(tr.samples()[0].value, -40.0);
  EXPECT_EQ(tr.samples()[1].value, -42.0);
  EXPECT_TRUE(tr.wifi_available_at(0.0));
  EXPECT_TRUE(tr.wifi_available_at(1.0));
  EXPECT_TRUE(wifi_loss_events(tr).empty());
}

TEST(TraceCsv, OutOfOrderRowsEqualSortedInput) {
  const auto sorted = parse_trace_csv(
      "t,kind,value\n0,pressure,1000\n1,pressure,1001\n2,wifi_rssi,-50\n");
  const auto shuffled = parse_trace_csv(
      "t,kind,value\n2,wifi_rssi,-50\n1,pressure,1001\n0,pressure,1000\n");
  EXPECT_EQ(sorted, shuffled);
}

TEST(TraceCsv, GpsKindIsSchemaError) {
  EXPECT_THROW(parse_trace_csv("t,kind,value\n0,gps_lat,48.1\n"), SchemaError);
}

TEST(TraceCsv, MalformedRowsReportLine) {
  try {
    parse_trace_csv("t,kind,value\n0,pressure,1000\n1,pressure\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_trace_csv("t,kind,value\n0,pressure,abc\n"), ParseError);
  EXPECT_THROW(parse_trace_csv("time,kind,value\n"), ParseError);
  EXPECT_THROW(parse_trace_csv("t,kind,value\n0,wifi_available,2\n"), ParseError);
}

TEST(TraceCsv, NoSamplesIsEmptyTrace) {
  EXPECT_THROW(parse_trace_csv("t,kind,value\n"), EmptyTraceError);
}

TEST(TraceCsv, MissingFileIsIoError) {
  EXPECT_THROW(load_trace_csv("/nonexistent/trace.csv"), IoError);
}

TEST(TraceCsv, RoundTripIsLossless) {
  for (int id = 1; id <= 4; ++id) {
    const auto tr = generate_scenario(spec_for(id, 11));
    const auto back = parse_trace_csv(format_trace_csv(tr));
    EXPECT_EQ(tr, back) << "scenario " << id;
  }
}

TEST(TraceCsv, FileRoundTrip) {
  const auto tr = generate_scenario(spec_for(4, 5));
  const auto path = std::filesystem::temp_directory_path() / "predho_rt.csv";
  save_trace_csv(tr, path);
  EXPECT_EQ(load_trace_csv(path), tr);
  std::filesystem::remove(path);
}

TEST(SensorTrace, ConflictingAvailabilityRejected) {
  EXPECT_THROW(SensorTrace({{0.0, SensorKind::kPressure, 1.0}},
                           {{1.0, true}, {1.0, false}}),
               SchemaError);
}

TEST(SensorTrace, RedundantAvailabilityPointsCollapse) {
  SensorTrace tr({{0.0, SensorKind::kPressure, 1.0}},
                 {{0.0, true}, {5.0, true}, {9.0, false}, {12.0, true}});
  EXPECT_EQ(tr.availability().size(), 3u);
  EXPECT_EQ(wifi_loss_events(tr), std::vector<double>{9.0});
  EXPECT_DOUBLE_EQ(tr.duration(), 12.0);
}

TEST(LossEvents, AlwaysAvailableHasNone) {
  SensorTrace tr({{0.0, SensorKind::kWifiRssi, -40.0}}, {});
  EXPECT_TRUE(wifi_loss_events(tr).empty());
}

TEST(LossEvents, MatchHandScanOnScenarioFour) {
  ScenarioSpec s = spec_for(4, 3);
  s.rssi.roaming_gaps = {3.0, 4.0, 2.0};
  const auto tr = generate_scenario(s);
  const auto events = wifi_loss_events(tr);
  EXPECT_EQ(events.size(), 3u);
  EXPECT_EQ(events, scan_losses(tr));
}

TEST(Scenario, OneDropsExactlyOnceAfterLead) {
  const auto s = spec_for(1, 7);
  const auto tr = generate_scenario(s);
  const auto events = wifi_loss_events(tr);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_GT(events[0], s.playback_lead);
  EXPECT_EQ(events, scan_losses(tr));
  // The tail after the loss lasts at least 10 s.
  EXPECT_GE(tr.duration() - events[0], 10.0);
  EXPECT_FALSE(tr.wifi_available_at(tr.duration()));
}

TEST(Scenario, TwoNeverLosesWifi) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tr = generate_scenario(spec_for(2, seed));
    EXPECT_TRUE(wifi_loss_events(tr).empty());
    for (const auto& a : tr.availability()) EXPECT_TRUE(a.available);
  }
}

TEST(Scenario, ThreeStaysAvailableWithUnusablePlateau) {
  const auto tr = generate_scenario(spec_for(3, 2));
  EXPECT_TRUE(wifi_loss_events(tr).empty());
  FeatureConfig fc;
  const auto rs = resample(tr, fc);
  const auto cap = wifi_capacity_series(tr, rs, PathModel{});
  const auto& p = rs.series(SensorKind::kPressure);
  // Upper floor = pressure well below the starting level.
  std::size_t upper = 0;
  for (std::size_t k = 0; k < rs.n_ticks; ++k) {
    if (p[k] < p[0] - 0.35) {
      ++upper;
      EXPECT_LT(cap[k], 1.0) << "t=" << k;
    }
  }
  EXPECT_GE(upper, 10u);
  // And it recovers at the end.
  EXPECT_GT(cap.back(), 4.0);
}

TEST(Scenario, FourHasSeveralGaps) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto tr = generate_scenario(spec_for(4, seed));
    EXPECT_GE(wifi_loss_events(tr).size(), 1u);
  }
}

TEST(Scenario, StepsOnlyWhileWalking) {
  for (int id = 1; id <= 4; ++id) {
    const auto tr = generate_scenario(spec_for(id, 9));
    const auto steps = values_of(tr, SensorKind::kStepDelta);
    const auto acc = values_of(tr, SensorKind::kGravityY);
    ASSERT_EQ(steps.size(), acc.size());
    std::size_t walking = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      // Walking posture holds the phone upright (gravity mostly on y).
      if (steps[i] > 0) {
        ++walking;
        EXPECT_GT(acc[i], 7.5);
      }
    }
    EXPECT_GT(walking, 10u);
    // Nobody walks during the playback lead.
    for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(steps[i], 0.0);
  }
}

TEST(Scenario, DeterministicPerSeed) {
  for (int id = 1; id <= 4; ++id) {
    EXPECT_EQ(generate_scenario(spec_for(id, 42)),
              generate_scenario(spec_for(id, 42)));
    EXPECT_NE(generate_scenario(spec_for(id, 42)),
              generate_scenario(spec_for(id, 43)));
  }
}

TEST(Scenario, StairsExitEndsInLoss) {
  ScenarioSpec s = spec_for(3, 4);
  s.stairs_exit = true;
  s.landing_seconds = 3.0;
  EXPECT_EQ(wifi_loss_events(generate_scenario(s)).size(), 1u);
}

TEST(Scenario, InvalidSpecsRejected) {
  ScenarioSpec s;
  s.scenario_id = 5;
  EXPECT_THROW(generate_scenario(s), ConfigError);
  s = ScenarioSpec{};
  s.playback_lead = -1.0;
  EXPECT_THROW(generate_scenario(s), ConfigError);
  s = ScenarioSpec{};
  s.rssi.roaming_gaps = {0.5};
  s.scenario_id = 4;
  EXPECT_THROW(generate_scenario(s), ConfigError);
}
