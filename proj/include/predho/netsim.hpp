#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "predho/features.hpp"
#include "predho/handover.hpp"

namespace predho {

enum class LinkKind : std::uint8_t { kWifi, kCellular };

struct LinkState {
  LinkKind kind = LinkKind::kWifi;
  bool up = false;
  double capacity = 0.0;    // Mbit/s available this tick, after the ramp
  double ramp_state = 0.0;  // slow-start fraction in [0, 1]
  double rtt = 0.0;         // ms, informational only
};

struct PathModel {
  // (dBm, Mbit/s) points, ascending in dBm and non-decreasing in rate.
  // Linear in between; flat beyond the ends; 0 below the lowest point.
  std::vector<std::pair<double, double>> wifi_table = {
      {-90.0, 0.0}, {-85.0, 0.5}, {-75.0, 2.0}, {-65.0, 4.0}, {-50.0, 6.0}};
  // TCP goodput rarely exceeds about half of the reported PHY rate.
  double goodput_fraction = 0.5;
  double cellular_peak = 8.0;  // Mbit/s
  double ramp_time = 5.0;      // cellular slow-start time constant, s
  double wifi_ramp_time = 1.0;
  double wifi_rtt = 8.0;
  double cellular_rtt = 45.0;

  void validate() const;
};

enum class Scheduler : std::uint8_t { kDefault, kRedundant };

std::string_view scheduler_name(Scheduler s);
Scheduler scheduler_from_name(std::string_view name);

// Mapping from RSSI to nominal Wi-Fi rate.
double wifi_capacity(const PathModel& model, double rssi_dbm);

// Nominal Wi-Fi capacity at t: table applied to the resampled RSSI, clamped
// by goodput_fraction * wifi_speed, 0 while Wi-Fi is unavailable.
double wifi_capacity_from_trace(const SensorTrace& trace,
                                const ResampledSeries& series, double t,
                                const PathModel& model);

// The same for every tick of `series`.
std::vector<double> wifi_capacity_series(const SensorTrace& trace,
                                         const ResampledSeries& series,
                                         const PathModel& model);

struct NetTick {
  double delivered_bits = 0.0;
  double cellular_bits = 0.0;
};

// Both links plus the aggregation rule.
class Network {
 public:
  Network(PathModel model, Scheduler scheduler);

  // wifi_nominal: Mbit/s from the trace; the handover state decides which
  // links are usable. Advances the slow-start ramps by dt seconds.
  NetTick step(double wifi_nominal, ActivePath active, double demand_bits,
               double dt);

  const LinkState& wifi() const { return wifi_; }
  const LinkState& cellular() const { return cellular_; }
  const PathModel& model() const { return model_; }
  Scheduler scheduler() const { return scheduler_; }

 private:
  PathModel model_;
  Scheduler scheduler_;
  LinkState wifi_;
  LinkState cellular_;
};

// One tick of the aggregation rule given effective link capacities (Mbit/s).
NetTick schedule(Scheduler scheduler, double wifi_mbps, double cellular_mbps,
                 double demand_bits, double dt);

}  // namespace predho
