#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "predho/predictor.hpp"

namespace predho {

enum class ConnectivityMode : std::uint8_t { kStock, kAlwaysMptcp, kSeamless };

std::string_view mode_name(ConnectivityMode mode);
ConnectivityMode mode_from_name(std::string_view name);

enum class ActivePath : std::uint8_t {
  kWifiOnly,
  kDual,
  kCellOnly,
  kDisconnected
};

std::string_view path_name(ActivePath path);

enum class HandoverEvent : std::uint8_t {
  kSubflowUp,
  kSubflowDown,
  kWifiLost,
  kWifiBack,
  kModeChange
};

std::string_view event_name(HandoverEvent event);
HandoverEvent event_from_name(std::string_view name);

struct HandoverConfig {
  double establish_delay = 1.0;  // subflow handshake
  double detection_delay = 3.0;  // until the OS reports a lost AP
  int stable_seconds = 5;        // hysteresis before teardown

  void validate() const;
};

struct HandoverState {
  ActivePath active = ActivePath::kWifiOnly;
  bool wifi = true;  // Wi-Fi availability seen at the previous step
  // Seconds since cellular establishment began; empty without a subflow.
  std::optional<double> subflow_age;
  int stable_streak = 0;
  // Seconds since Wi-Fi went down; empty while it is up.
  std::optional<double> reactive_timer;
  bool torn_down = false;  // the subflow was removed in the last step

  bool subflow_ready(const HandoverConfig& config) const {
    return subflow_age && *subflow_age >= config.establish_delay;
  }
  friend bool operator==(const HandoverState&, const HandoverState&) = default;
};

struct StepResult {
  HandoverState state;
  std::vector<HandoverEvent> events;
};

// State before the first step; no subflow yet in any mode.
HandoverState initial_handover_state(bool wifi_available);

// One-second transition. Total and deterministic.
//
// Per step: age the subflow and the outage timer, open a subflow (Seamless on
// LOSS or after detection_delay without Wi-Fi, AlwaysMPTCP whenever none
// exists), update the stable streak, tear down after stable_seconds, then
// derive the active path from Wi-Fi and subflow readiness.
StepResult handover_step(const HandoverState& state, ConnectivityMode mode,
                         bool wifi_available, Decision decision,
                         const HandoverConfig& config, double dt = 1.0);

}  // namespace predho
