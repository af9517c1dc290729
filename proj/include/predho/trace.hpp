#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace predho {

// Sensor catalog. The first 25 entries are the feature kinds in the order
// of the full feature vector; kStepCount is the raw cumulative step counter
// that step_delta can be derived from.
enum class SensorKind : std::uint8_t {
  kPressure,
  kPressureDelta,
  kLinaccX,
  kLinaccY,
  kLinaccZ,
  kLinaccLength,
  kStepDelta,
  kIsCharging,
  kBatteryPct,
  kGravityX,
  kGravityY,
  kGravityZ,
  kGyroLength,
  kMagX,
  kMagY,
  kMagZ,
  kOrientX,
  kOrientY,
  kOrientZ,
  kRotX,
  kRotY,
  kRotZ,
  kWifiFrequency,
  kWifiSpeed,
  kWifiRssi,
  kStepCount,
};

inline constexpr std::size_t kSensorKindCount = 26;

std::string_view kind_name(SensorKind kind);
// Returns nullopt for names outside the catalog (e.g. "gps_lat").
std::optional<SensorKind> kind_from_name(std::string_view name);
bool is_boolean_kind(SensorKind kind);
std::array<SensorKind, kSensorKindCount> all_kinds();

struct SensorSample {
  double t = 0.0;
  SensorKind kind = SensorKind::kPressure;
  double value = 0.0;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct AvailabilityChange {
  double t = 0.0;
  bool available = true;

  friend bool operator==(const AvailabilityChange&,
                         const AvailabilityChange&) = default;
};

// Immutable, validated sensor trace.
//
// Samples are sorted by (t, kind). The availability timeline is a list of
// change points with strictly increasing t and alternating values; before
// the first change point the first point's value holds, and an empty
// timeline means Wi-Fi is available throughout.
class SensorTrace {
 public:
  SensorTrace() = default;
  // Sorts samples, collapses redundant availability points and validates.
  // Throws SchemaError on invariant violations.
  SensorTrace(std::vector<SensorSample> samples,
              std::vector<AvailabilityChange> availability);

  const std::vector<SensorSample>& samples() const { return samples_; }
  const std::vector<AvailabilityChange>& availability() const {
    return availability_;
  }
  // Largest timestamp among samples and availability change points.
  double duration() const { return duration_; }
  bool empty() const { return samples_.empty(); }

  bool wifi_available_at(double t) const;

  friend bool operator==(const SensorTrace&, const SensorTrace&) = default;

 private:
  std::vector<SensorSample> samples_;
  std::vector<AvailabilityChange> availability_;
  double duration_ = 0.0;
};

bool available_at(std::span<const AvailabilityChange> timeline, double t);

// Start time of every maximal unavailable interval, ascending.
std::vector<double> wifi_loss_events(const SensorTrace& trace);

// Long-format CSV: header `t,kind,value`, plus `wifi_available` rows at
// availability change points.
SensorTrace load_trace_csv(const std::filesystem::path& path);
SensorTrace parse_trace_csv(std::string_view text);
void save_trace_csv(const SensorTrace& trace, const std::filesystem::path& path);
std::string format_trace_csv(const SensorTrace& trace);

struct RssiProfile {
  double start_dbm = -45.0;
  double decay_rate = 0.8;  // dBm/s while walking away from the AP
  double loss_threshold = -88.0;
  double noise_db = 1.5;
  // Scenario 4 only. Empty -> four gaps of 2..6 s drawn from the seed.
  std::vector<double> roaming_gaps;
  double dip_dbm = -70.0;      // scenario 2 turnaround level
  double plateau_dbm = -87.0;  // scenario 3 level on the upper floor
  double stair_start_dbm = -55.0;
  double collapse_dbm = -75.0;  // scenario 3: link unusable below this
  double cell_seconds = 50.0;  // walking time through an intermediate AP cell
};

struct MotionProfile {
  double step_rate = 1.8;  // steps/s while walking
  double accel_noise = 1.2;
};

struct PressureProfile {
  double ramp_hpa = -0.42;  // one floor up
  double ramp_seconds = 15.0;
};

struct ScenarioSpec {
  int scenario_id = 1;
  double playback_lead = 120.0;
  RssiProfile rssi;
  MotionProfile motion;
  PressureProfile pressure;
  double tail_seconds = 20.0;
  // Scenario 3 only: instead of going back down, keep walking away on the
  // upper floor until Wi-Fi drops.
  bool stairs_exit = false;
  double landing_seconds = 10.0;  // scenario 3: time spent on the upper floor
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic synthetic trace for one of the four routes:
//  1 leaving the office until Wi-Fi drops,
//  2 short walk inside Wi-Fi range,
//  3 staircase with an available but unusable Wi-Fi plateau,
//  4 roaming across APs with short unavailability gaps.
SensorTrace generate_scenario(const ScenarioSpec& spec);

}  // namespace predho
