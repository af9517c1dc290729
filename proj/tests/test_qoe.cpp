#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "predho/qoe.hpp"

using namespace predho;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

double big_stall(const char* l, const char* n) {
  const Big L(l), N(n);
  const Big v = Big("3.5") * exp(-(Big("0.15") * L + Big("0.19")) * N) + Big("1.5");
  return v.convert_to<double>();
}

double big_quality(const char* t) {
  const Big v = Big("0.003") * exp(Big("0.064") * Big(t) * 100) + Big("2.498");
  return v.convert_to<double>();
}

}  // namespace

TEST(Mos, ExactAnchors) {
  EXPECT_EQ(mos_stall(0.0, 0.0), 5.0);
  EXPECT_EQ(mos_quality(0.0), 2.501);
  EXPECT_DOUBLE_EQ(mos_combined(5.0, 2.501), 3.7505);
}

TEST(Mos, MatchesHighPrecision) {
  EXPECT_NEAR(mos_stall(1.46, 3.0), big_stall("1.46", "3"), 1e-9);
  EXPECT_NEAR(mos_quality(0.87), big_quality("0.87"), 1e-9);
  EXPECT_NEAR(mos_quality(1.0), big_quality("1"), 1e-9);
  EXPECT_NEAR(mos_stall(1.46, 3.0), 2.526, 1e-3);
  EXPECT_NEAR(mos_quality(0.87), 3.284, 1e-3);
  EXPECT_NEAR(mos_quality(1.0), 4.3035, 1e-3);
}

TEST(Mos, StallFloor) {
  EXPECT_NEAR(mos_stall(2.0, 200.0), 1.5, 1e-12);
  EXPECT_GT(mos_stall(2.0, 200.0), 1.5 - 1e-15);
}

TEST(Mos, CombinedIsMean) {
  for (double x : {1.5, 2.501, 3.3, 5.0}) EXPECT_EQ(mos_combined(x, x), x);
  EXPECT_DOUBLE_EQ(mos_combined(4.0, 3.0), 3.5);
  // No stalls, 88 % top quality: close to 4.
  const auto r = mos_from_stats(0, 0.0, 0.88);
  EXPECT_EQ(r.stall, 5.0);
  EXPECT_NEAR(r.combined, 4.0, 0.2);
}

TEST(Mos, MonotoneOnGrid) {
  for (int i = 0; i < 100; ++i) {
    const double a = i / 100.0, b = (i + 1) / 100.0;
    EXPECT_LT(mos_quality(a), mos_quality(b)) << a;
    // Fixed L = 1 keeps the exponent small enough to resolve in double.
    EXPECT_GT(mos_stall(1.0, i + 1.0), mos_stall(1.0, i + 2.0)) << i;
    EXPECT_GT(mos_stall(1.0, i + 1.0), 1.5);
    const double L = 0.1 * i;
    EXPECT_GT(mos_stall(L, 2.0), mos_stall(L + 0.1, 2.0)) << L;
    EXPECT_LE(mos_stall(L, 2.0), 5.0);
  }
  EXPECT_LE(mos_quality(1.0), 4.305);
}

TEST(Mos, RejectsBadInputs) {
  EXPECT_THROW(mos_stall(-1.0, 1.0), Error);
  EXPECT_THROW(mos_stall(1.0, -1.0), Error);
  EXPECT_THROW(mos_stall(1.0, 0.0), Error);
  EXPECT_THROW(mos_quality(-0.01), Error);
  EXPECT_THROW(mos_quality(1.01), Error);
  EXPECT_THROW(mos_quality(std::nan("")), Error);
}

TEST(Energy, BatteryHours) {
  const PowerModel m;
  const std::vector<PowerState> dual(600, PowerState::kMptcpDual);
  const auto e = energy(dual, m);
  EXPECT_NEAR(e.battery_hours, 9660.0 / 2289.0, 1e-12);
  EXPECT_NEAR(e.battery_hours, 4.22, 0.01);
  EXPECT_NEAR(e.energy_mwh, 2289.0 * 600.0 / 3600.0, 1e-9);

  const std::vector<PowerState> base(10, PowerState::kWifiOnlyBaseline);
  EXPECT_NEAR(energy(base, m).battery_hours, 9660.0 / 1856.0, 1e-12);
  EXPECT_NEAR(energy(base, m).battery_hours, 5.20, 0.01);

  const double seamless = battery_hours(2649.0, m);
  EXPECT_NEAR(seamless, 3.65, 0.01);
  EXPECT_NEAR((e.battery_hours - seamless) * 60.0, 34.0, 1.0);
}

TEST(Energy, MixedTimelineAverages) {
  const PowerModel m;
  std::vector<PowerState> t = {PowerState::kSeamlessWifiOnlyPredicting,
                               PowerState::kSeamlessDualPredicting,
                               PowerState::kSeamlessTransition,
                               PowerState::kSeamlessWifiOnlyPredicting};
  const auto e = energy(t, m, 0.5);
  EXPECT_NEAR(e.avg_mw, (2420.0 * 2 + 2792.0 + 2843.0) / 4.0, 1e-9);
  EXPECT_NEAR(e.energy_mwh, (2420.0 * 2 + 2792.0 + 2843.0) * 0.5 / 3600.0, 1e-12);

  const std::vector<std::string> labels = {
      std::string(power_state_name(PowerState::kMptcpDual)),
      std::string(power_state_name(PowerState::kWifiOnlyBaseline))};
  EXPECT_NEAR(energy_from_labels(labels, m).avg_mw, (2289.0 + 1856.0) / 2.0, 1e-9);
}

TEST(Energy, Overhead) {
  EXPECT_NEAR(overhead_percent(2420.0, 2289.0), 5.72, 0.01);
  EXPECT_NEAR(overhead_percent(2649.0, 2289.0), 15.73, 0.01);
  EXPECT_DOUBLE_EQ(overhead_percent(3.0, 2.0), 50.0);
}

TEST(Energy, Errors) {
  const PowerModel m;
  EXPECT_THROW(energy(std::vector<PowerState>{}, m), Error);
  EXPECT_THROW(battery_hours(0.0, m), NumericError);
  PowerModel bad;
  bad.milliwatts[2] = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(power_state_from_name("warp"), SchemaError);
}

TEST(Energy, PowerStateMapping) {
  HandoverState s;
  EXPECT_EQ(power_state(ConnectivityMode::kStock, s), PowerState::kWifiOnlyBaseline);
  EXPECT_EQ(power_state(ConnectivityMode::kAlwaysMptcp, s), PowerState::kMptcpDual);
  EXPECT_EQ(power_state(ConnectivityMode::kSeamless, s),
            PowerState::kSeamlessWifiOnlyPredicting);
  s.subflow_age = 0.0;
  EXPECT_EQ(power_state(ConnectivityMode::kSeamless, s),
            PowerState::kSeamlessDualPredicting);
  s.subflow_age.reset();
  s.torn_down = true;
  EXPECT_EQ(power_state(ConnectivityMode::kSeamless, s), PowerState::kSeamlessTransition);
  for (std::size_t i = 0; i < kPowerStateCount; ++i) {
    const auto p = static_cast<PowerState>(i);
    EXPECT_EQ(power_state_from_name(power_state_name(p)), p);
  }
}
