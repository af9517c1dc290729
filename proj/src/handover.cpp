#include "predho/handover.hpp"

#include <algorithm>
#include <string>

namespace predho {

std::string_view mode_name(ConnectivityMode mode) {
  switch (mode) {
    case ConnectivityMode::kStock:
      return "Stock";
    case ConnectivityMode::kAlwaysMptcp:
      return "MPTCP";
    case ConnectivityMode::kSeamless:
      break;
  }
  return "Seamless";
}

ConnectivityMode mode_from_name(std::string_view name) {
  if (name == "Stock" || name == "stock") return ConnectivityMode::kStock;
  if (name == "MPTCP" || name == "mptcp" || name == "AlwaysMPTCP") {
    return ConnectivityMode::kAlwaysMptcp;
  }
  if (name == "Seamless" || name == "seamless") {
    return ConnectivityMode::kSeamless;
  }
  throw ConfigError("unknown connectivity mode '" + std::string(name) +
                    "' (expected Stock, MPTCP or Seamless)");
}

std::string_view path_name(ActivePath path) {
  switch (path) {
    case ActivePath::kWifiOnly:
      return "WIFI_ONLY";
    case ActivePath::kDual:
      return "DUAL";
    case ActivePath::kCellOnly:
      return "CELL_ONLY";
    case ActivePath::kDisconnected:
      break;
  }
  return "DISCONNECTED";
}

std::string_view event_name(HandoverEvent event) {
  switch (event) {
    case HandoverEvent::kSubflowUp:
      return "SUBFLOW_UP";
    case HandoverEvent::kSubflowDown:
      return "SUBFLOW_DOWN";
    case HandoverEvent::kWifiLost:
      return "WIFI_LOST";
    case HandoverEvent::kWifiBack:
      return "WIFI_BACK";
    case HandoverEvent::kModeChange:
      break;
  }
  return "MODE_CHANGE";
}

HandoverEvent event_from_name(std::string_view name) {
  for (auto e : {HandoverEvent::kSubflowUp, HandoverEvent::kSubflowDown,
                 HandoverEvent::kWifiLost, HandoverEvent::kWifiBack,
                 HandoverEvent::kModeChange}) {
    if (event_name(e) == name) return e;
  }
  throw SchemaError("unknown handover event '" + std::string(name) + "'");
}

void HandoverConfig::validate() const {
  if (!(establish_delay >= 0.0)) {
    throw ConfigError("establish_delay must be >= 0");
  }
  if (!(detection_delay >= 0.0)) {
    throw ConfigError("detection_delay must be >= 0");
  }
  if (stable_seconds < 1) throw ConfigError("stable_seconds must be >= 1");
}

HandoverState initial_handover_state(bool wifi_available) {
  HandoverState s;
  s.wifi = wifi_available;
  s.active = wifi_available ? ActivePath::kWifiOnly : ActivePath::kDisconnected;
  return s;
}

StepResult handover_step(const HandoverState& state, ConnectivityMode mode,
                         bool wifi_available, Decision decision,
                         const HandoverConfig& config, double dt) {
  StepResult r;
  HandoverState& s = r.state;
  s = state;
  s.torn_down = false;
  const bool w = wifi_available;
  const bool was_ready = state.subflow_ready(config);

  if (s.subflow_age) *s.subflow_age += dt;

  if (w) {
    s.reactive_timer.reset();
  } else {
    s.reactive_timer =
        state.reactive_timer ? *state.reactive_timer + dt : 0.0;
  }

  switch (mode) {
    case ConnectivityMode::kStock:
      s.subflow_age.reset();
      break;
    case ConnectivityMode::kAlwaysMptcp:
      if (!s.subflow_age) s.subflow_age = 0.0;
      break;
    case ConnectivityMode::kSeamless:
      if (!s.subflow_age) {
        const bool predicted = decision == Decision::kLoss;
        const bool detected =
            !w && s.reactive_timer && *s.reactive_timer >= config.detection_delay;
        if (predicted || detected) s.subflow_age = 0.0;
      }
      break;
  }

  if (w && decision == Decision::kStable) {
    s.stable_streak = std::min(s.stable_streak + 1, config.stable_seconds);
  } else {
    s.stable_streak = 0;
  }

  if (mode == ConnectivityMode::kSeamless && s.subflow_age &&
      s.stable_streak >= config.stable_seconds) {
    s.subflow_age.reset();
    s.stable_streak = 0;
    s.torn_down = true;
  }

  const bool ready = s.subflow_ready(config);
  if (w) {
    s.active = ready ? ActivePath::kDual : ActivePath::kWifiOnly;
  } else {
    s.active = ready ? ActivePath::kCellOnly : ActivePath::kDisconnected;
  }
  s.wifi = w;

  if (state.wifi && !w) r.events.push_back(HandoverEvent::kWifiLost);
  if (!state.wifi && w) r.events.push_back(HandoverEvent::kWifiBack);
  if (!was_ready && ready) r.events.push_back(HandoverEvent::kSubflowUp);
  if (s.torn_down) r.events.push_back(HandoverEvent::kSubflowDown);
  if (state.active != s.active) r.events.push_back(HandoverEvent::kModeChange);
  return r;
}

}  // namespace predho
