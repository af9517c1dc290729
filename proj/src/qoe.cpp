#include "predho/qoe.hpp"

#include <cmath>

namespace predho {

double mos_stall(double mean_stall_len, double stall_count) {
  if (!(mean_stall_len >= 0.0) || !(stall_count >= 0.0)) {
    throw Error("mos_stall needs L >= 0 and N >= 0");
  }
  if (stall_count == 0.0 && mean_stall_len != 0.0) {
    throw Error("mos_stall: L must be 0 when N = 0");
  }
  return 3.5 * std::exp(-(0.15 * mean_stall_len + 0.19) * stall_count) + 1.5;
}

double mos_quality(double hq_fraction) {
  if (!(hq_fraction >= 0.0 && hq_fraction <= 1.0)) {
    throw Error("mos_quality needs t in [0, 1]");
  }
  // Same curve, rearranged so t = 0 gives 2.501 without rounding.
  return 0.003 * std::expm1(0.064 * hq_fraction * 100.0) + 2.501;
}

double mos_combined(double stall, double quality) {
  return (stall + quality) / 2.0;
}

MosResult mos_from_stats(std::size_t stall_count, double mean_stall_len,
                         double hq_fraction) {
  MosResult r;
  r.stall = mos_stall(mean_stall_len, static_cast<double>(stall_count));
  r.quality = mos_quality(hq_fraction);
  r.combined = mos_combined(r.stall, r.quality);
  return r;
}

std::string_view power_state_name(PowerState s) {
  switch (s) {
    case PowerState::kWifiOnlyBaseline:
      return "wifi_only_baseline";
    case PowerState::kMptcpDual:
      return "mptcp_dual";
    case PowerState::kSeamlessDualPredicting:
      return "seamless_dual_predicting";
    case PowerState::kSeamlessTransition:
      return "seamless_transition";
    case PowerState::kSeamlessWifiOnlyPredicting:
      break;
  }
  return "seamless_wifi_only_predicting";
}

PowerState power_state_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kPowerStateCount; ++i) {
    const auto s = static_cast<PowerState>(i);
    if (power_state_name(s) == name) return s;
  }
  throw SchemaError("unknown power state '" + std::string(name) + "'");
}

void PowerModel::validate() const {
  for (double mw : milliwatts) {
    if (!(mw > 0.0)) throw ConfigError("power table entries must be > 0");
  }
  if (!(battery_mwh > 0.0)) throw ConfigError("battery_mwh must be > 0");
}

PowerState power_state(ConnectivityMode mode, const HandoverState& state) {
  switch (mode) {
    case ConnectivityMode::kStock:
      return PowerState::kWifiOnlyBaseline;
    case ConnectivityMode::kAlwaysMptcp:
      return PowerState::kMptcpDual;
    case ConnectivityMode::kSeamless:
      break;
  }
  if (state.torn_down) return PowerState::kSeamlessTransition;
  if (state.subflow_age) return PowerState::kSeamlessDualPredicting;
  return PowerState::kSeamlessWifiOnlyPredicting;
}

double battery_hours(double avg_mw, const PowerModel& model) {
  if (!(avg_mw > 0.0)) throw NumericError("average power must be > 0");
  return model.battery_mwh / avg_mw;
}

EnergyResult energy(std::span<const PowerState> timeline,
                    const PowerModel& model, double dt) {
  if (timeline.empty()) throw Error("energy needs a non-empty timeline");
  double mws = 0.0;  // mW * s
  for (PowerState s : timeline) mws += model.power(s) * dt;
  EnergyResult r;
  const double seconds = static_cast<double>(timeline.size()) * dt;
  r.energy_mwh = mws / 3600.0;
  r.avg_mw = mws / seconds;
  r.battery_hours = battery_hours(r.avg_mw, model);
  return r;
}

EnergyResult energy_from_labels(std::span<const std::string> labels,
                                const PowerModel& model, double dt) {
  std::vector<PowerState> states;
  states.reserve(labels.size());
  for (const auto& l : labels) states.push_back(power_state_from_name(l));
  return energy(states, model, dt);
}

double overhead_percent(double a, double b) { return (a / b - 1.0) * 100.0; }

}  // namespace predho
