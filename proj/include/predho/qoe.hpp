#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "predho/handover.hpp"

namespace predho {

// L mean stall seconds, N stall count.
double mos_stall(double mean_stall_len, double stall_count);
// t is the fraction of play time spent at the top bitrate.
double mos_quality(double hq_fraction);
double mos_combined(double stall, double quality);

struct MosResult {
  double stall = 5.0;
  double quality = 2.501;
  double combined = 3.7505;

  friend bool operator==(const MosResult&, const MosResult&) = default;
};

MosResult mos_from_stats(std::size_t stall_count, double mean_stall_len,
                         double hq_fraction);

enum class PowerState : std::uint8_t {
  kWifiOnlyBaseline,
  kMptcpDual,
  kSeamlessDualPredicting,
  kSeamlessTransition,
  kSeamlessWifiOnlyPredicting,
};

inline constexpr std::size_t kPowerStateCount = 5;

std::string_view power_state_name(PowerState s);
PowerState power_state_from_name(std::string_view name);

struct PowerModel {
  // mW, indexed by PowerState.
  std::array<double, kPowerStateCount> milliwatts = {1856.0, 2289.0, 2792.0,
                                                     2843.0, 2420.0};
  double battery_mwh = 9660.0;

  double power(PowerState s) const {
    return milliwatts[static_cast<std::size_t>(s)];
  }
  void validate() const;
};

// Which table row a second of the session falls in.
PowerState power_state(ConnectivityMode mode, const HandoverState& state);

struct EnergyResult {
  double energy_mwh = 0.0;
  double avg_mw = 0.0;
  double battery_hours = 0.0;
};

// Each entry covers dt seconds.
EnergyResult energy(std::span<const PowerState> timeline,
                    const PowerModel& model, double dt = 1.0);
EnergyResult energy_from_labels(std::span<const std::string> labels,
                                const PowerModel& model, double dt = 1.0);
double battery_hours(double avg_mw, const PowerModel& model);

// Relative increase a / b - 1, in percent.
double overhead_percent(double a, double b);

}  // namespace predho
