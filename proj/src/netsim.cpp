#include "predho/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace predho {
namespace {

constexpr double kBitsPerMbit = 1e6;

void advance_ramp(LinkState& link, bool up, double tau, double dt) {
  if (!up) {
    link.up = false;
    link.ramp_state = 0.0;
    return;
  }
  link.up = true;
  const double step = tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0;
  link.ramp_state = std::min(1.0, link.ramp_state + (1.0 - link.ramp_state) * step);
}

}  // namespace

void PathModel::validate() const {
  if (wifi_table.empty()) throw ConfigError("wifi_table must not be empty");
  for (std::size_t i = 0; i < wifi_table.size(); ++i) {
    if (wifi_table[i].second < 0.0) {
      throw ConfigError("wifi_table rates must be >= 0");
    }
    if (i > 0 && (wifi_table[i].first <= wifi_table[i - 1].first ||
                  wifi_table[i].second < wifi_table[i - 1].second)) {
      throw ConfigError("wifi_table must be ascending and monotone");
    }
  }
  if (!(goodput_fraction > 0.0)) {
    throw ConfigError("goodput_fraction must be > 0");
  }
  if (!(cellular_peak >= 0.0)) throw ConfigError("cellular_peak must be >= 0");
  if (!(ramp_time >= 0.0) || !(wifi_ramp_time >= 0.0)) {
    throw ConfigError("ramp times must be >= 0");
  }
}

std::string_view scheduler_name(Scheduler s) {
  return s == Scheduler::kDefault ? "default" : "redundant";
}

Scheduler scheduler_from_name(std::string_view name) {
  if (name == "default") return Scheduler::kDefault;
  if (name == "redundant") return Scheduler::kRedundant;
  throw ConfigError("unknown scheduler '" + std::string(name) +
                    "' (expected default or redundant)");
}

double wifi_capacity(const PathModel& model, double rssi_dbm) {
  const auto& tab = model.wifi_table;
  if (std::isnan(rssi_dbm) || rssi_dbm < tab.front().first) return 0.0;
  if (rssi_dbm >= tab.back().first) return tab.back().second;
  auto hi = std::upper_bound(
      tab.begin(), tab.end(), rssi_dbm,
      [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto lo = hi - 1;
  const double f = (rssi_dbm - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

double wifi_capacity_from_trace(const SensorTrace& trace,
                                const ResampledSeries& series, double t,
                                const PathModel& model) {
  if (!trace.wifi_available_at(t)) return 0.0;
  auto k = static_cast<std::size_t>(std::floor(t * series.sampling_rate));
  k = std::min(k, series.n_ticks - 1);
  double cap = wifi_capacity(model, series.series(SensorKind::kWifiRssi)[k]);
  const auto& speed = series.series(SensorKind::kWifiSpeed);
  if (!speed.empty()) cap = std::min(cap, model.goodput_fraction * speed[k]);
  return std::max(0.0, cap);
}

std::vector<double> wifi_capacity_series(const SensorTrace& trace,
                                         const ResampledSeries& series,
                                         const PathModel& model) {
  std::vector<double> out(series.n_ticks);
  for (std::size_t k = 0; k < series.n_ticks; ++k) {
    out[k] = wifi_capacity_from_trace(trace, series, series.tick_time(k), model);
  }
  return out;
}

NetTick schedule(Scheduler scheduler, double wifi_mbps, double cellular_mbps,
                 double demand_bits, double dt) {
  NetTick r;
  if (!(demand_bits > 0.0)) return r;
  const double wifi_bits = std::max(0.0, wifi_mbps) * kBitsPerMbit * dt;
  const double cell_bits = std::max(0.0, cellular_mbps) * kBitsPerMbit * dt;
  if (scheduler == Scheduler::kDefault) {
    const double via_wifi = std::min(demand_bits, wifi_bits);
    const double via_cell = std::min(demand_bits - via_wifi, cell_bits);
    r.delivered_bits = via_wifi + via_cell;
    r.cellular_bits = via_cell;
  } else {
    // Every packet goes out on both subflows; the faster copy wins.
    r.delivered_bits = std::min(demand_bits, std::max(wifi_bits, cell_bits));
    r.cellular_bits = std::min(demand_bits, cell_bits);
  }
  return r;
}

Network::Network(PathModel model, Scheduler scheduler)
    : model_(std::move(model)), scheduler_(scheduler) {
  model_.validate();
  wifi_.kind = LinkKind::kWifi;
  wifi_.rtt = model_.wifi_rtt;
  cellular_.kind = LinkKind::kCellular;
  cellular_.rtt = model_.cellular_rtt;
}

NetTick Network::step(double wifi_nominal, ActivePath active,
                      double demand_bits, double dt) {
  const bool wifi_up = (active == ActivePath::kWifiOnly ||
                        active == ActivePath::kDual) &&
                       wifi_nominal > 0.0;
  const bool cell_up =
      active == ActivePath::kDual || active == ActivePath::kCellOnly;
  advance_ramp(wifi_, wifi_up, model_.wifi_ramp_time, dt);
  advance_ramp(cellular_, cell_up, model_.ramp_time, dt);
  wifi_.capacity = wifi_up ? wifi_nominal * wifi_.ramp_state : 0.0;
  cellular_.capacity = cell_up ? model_.cellular_peak * cellular_.ramp_state : 0.0;
  return schedule(scheduler_, wifi_.capacity, cellular_.capacity, demand_bits,
                  dt);
}

}  // namespace predho
