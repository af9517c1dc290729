#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "predho/bundle.hpp"
#include "predho/handover.hpp"
#include "predho/netsim.hpp"
#include "predho/predictor.hpp"
#include "predho/qoe.hpp"
#include "predho/streaming.hpp"

namespace predho {

struct SimConfig {
  HandoverConfig handover;
  PathModel path;
  StreamConfig stream;
  PowerModel power;
  Scheduler scheduler = Scheduler::kRedundant;
  double tick = 0.1;  // network/streaming step, s
  double threshold = 0.5;

  void validate() const;
};

struct TelemetryRow {
  double t = 0.0;
  double wifi_capacity = 0.0;  // effective Mbit/s
  double cell_capacity = 0.0;
  double delivered = 0.0;      // bits this tick
  double cellular_bytes_cum = 0.0;
  double buffer = 0.0;         // s

  friend bool operator==(const TelemetryRow&, const TelemetryRow&) = default;
};

struct EventRecord {
  double t = 0.0;
  HandoverEvent event = HandoverEvent::kModeChange;
  ActivePath path = ActivePath::kWifiOnly;  // path after the step

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline constexpr int kReportFormatVersion = 1;

struct SessionReport {
  int scenario = 0;
  ConnectivityMode mode = ConnectivityMode::kStock;
  int repetition = 0;
  std::uint64_t seed = 0;
  double duration = 0.0;

  SessionStats stats;
  MosResult mos;
  double cellular_bytes = 0.0;
  EnergyResult energy;
  std::array<double, kPowerStateCount> seconds_in_state{};
  double disconnected_seconds = 0.0;

  std::vector<EventRecord> events;
  std::vector<SegmentRecord> segments;
  std::vector<Prediction> predictions;  // Seamless only
  std::vector<TelemetryRow> telemetry;

  std::string run_id() const;  // e.g. s1_Seamless_r0
};

// Per-second decisions for a Seamless run, from the online predictor.
std::vector<Decision> decisions_from_predictions(
    std::span<const Prediction> predictions, double sampling_rate,
    std::size_t seconds);

// Simulates one streaming session over the trace. `decisions` holds one
// entry per second (needed for Seamless, ignored otherwise).
SessionReport run_session(const SensorTrace& trace, ConnectivityMode mode,
                          const SimConfig& config,
                          std::span<const Decision> decisions = {});

// Seamless convenience: runs the predictor from the bundle first.
SessionReport run_session(const SensorTrace& trace, ConnectivityMode mode,
                          const SimConfig& config, const ModelBundle& bundle);

// Versioned JSON document; doubles round-trip exactly.
std::string report_to_text(const SessionReport& report);
SessionReport report_from_text(std::string_view text);
void save_report(const SessionReport& report, const std::filesystem::path& path);
SessionReport load_report(const std::filesystem::path& path);

// One row per run: stalls, mean stall, adaptations, HQ share, cellular MB, MOS.
std::string format_runs_csv(std::span<const SessionReport> reports);
// Means per (scenario, mode), sorted by scenario then mode.
std::string format_summary_csv(std::span<const SessionReport> reports);
// mode,scenario,repetition,mos_stall,mos_quality,mos_combined
std::string format_mos_csv(std::span<const SessionReport> reports);
std::string format_telemetry_csv(const SessionReport& report);

}  // namespace predho
