#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "predho/common.hpp"
#include "predho/trace.hpp"

namespace predho {

enum class FeatureSet { kFull, kReduced };

std::string_view feature_set_name(FeatureSet set);
FeatureSet feature_set_from_name(std::string_view name);

// Feature kinds in vector order.
//   Full (25):   pressure, pressure_delta, linacc_x/y/z/length, step_delta,
//                is_charging, battery_pct, gravity_x/y/z, gyro_length,
//                mag_x/y/z, orient_x/y/z, rot_x/y/z, wifi_frequency,
//                wifi_speed, wifi_rssi
//   Reduced (8): pressure_delta, linacc_length, step_delta, is_charging,
//                gravity_z, wifi_frequency, wifi_speed, wifi_rssi
std::span<const SensorKind> feature_kinds(FeatureSet set);

struct FeatureConfig {
  double sampling_rate = 1.0;  // samples per second
  double observation_window = 60.0;
  double prediction_window = 15.0;
  FeatureSet feature_set = FeatureSet::kReduced;

  void validate() const;
  // OW * SR, the number of values each feature contributes.
  std::size_t ticks_per_window() const;
  std::size_t vector_length() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// One regular series per feature kind on the tick grid t_k = k / SR.
struct ResampledSeries {
  double sampling_rate = 1.0;
  std::size_t n_ticks = 0;
  // Indexed by SensorKind; only the 25 feature kinds are populated.
  std::vector<std::vector<double>> values;
  std::vector<std::string> warnings;

  double tick_time(std::size_t k) const {
    return static_cast<double>(k) / sampling_rate;
  }
  const std::vector<double>& series(SensorKind kind) const {
    return values[static_cast<std::size_t>(kind)];
  }
  // Values of the given feature set at tick k, in feature order.
  std::vector<double> row(std::size_t k, FeatureSet set) const;
};

// Last-observation-carried-forward resampling. Ticks before a kind's first
// sample take that first value. pressure_delta/step_delta are differences of
// the resampled pressure/step_count; if only explicit delta samples exist
// they are summed per tick. Kinds absent from the trace are zero-filled and
// reported in `warnings`.
ResampledSeries resample(const SensorTrace& trace, const FeatureConfig& config);

enum class Label : std::uint8_t { kStable, kLoss, kUnknown };

std::string_view label_name(Label label);
Label label_from_name(std::string_view name);

struct FeatureWindow {
  double end_time = 0.0;
  std::vector<double> values;
  Label label = Label::kUnknown;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

// Concatenates, feature by feature, the OW*SR values ending at end_time
// (inclusive). Throws InsufficientHistoryError if end_time < OW.
FeatureWindow assemble(const ResampledSeries& series, double end_time,
                       const FeatureConfig& config);

// Every window with stride one tick, from end_time = OW to the last tick.
std::vector<FeatureWindow> sliding_windows(const ResampledSeries& series,
                                           const FeatureConfig& config);

// A window ending at e is LOSS iff some loss event l has e < l <= e + PW,
// otherwise STABLE. Windows ending while Wi-Fi is unavailable are dropped.
std::vector<FeatureWindow> label_windows(
    std::vector<FeatureWindow> windows, std::span<const double> loss_events,
    std::span<const AvailabilityChange> availability,
    const FeatureConfig& config);

struct Dataset {
  FeatureConfig config;
  std::vector<FeatureWindow> windows;
  std::vector<std::string> users;  // provenance, one per window

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  std::size_t count(Label label) const;
  void add(FeatureWindow window, std::string user);
  void append(const Dataset& other);
  // Homogeneous lengths and known labels; throws SchemaError.
  void validate() const;
};

// Resample, window and label one trace.
Dataset windows_from_trace(const SensorTrace& trace,
                           const FeatureConfig& config,
                           const std::string& user);

// Standardization with population standard deviation; zero-variance
// columns get scale 1.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  std::vector<double> apply(std::span<const double> v) const;
  void apply_in_place(std::span<double> v) const;
  std::vector<double> inverse(std::span<const double> v) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

Scaler fit_scaler(const Dataset& dataset);
Dataset apply_scaler(const Scaler& scaler, Dataset dataset);

struct RandomSplit {
  double train_frac = 0.7;
  std::uint64_t seed = 0;
};

struct ByUserSplit {
  std::vector<std::string> test_users;
};

using SplitMode = std::variant<RandomSplit, ByUserSplit>;

struct SplitResult {
  Dataset train;
  Dataset test;
};

SplitResult split(const Dataset& dataset, const SplitMode& mode);

// CSV with columns f0..f{n-1},label,user,end_time.
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path,
                         const FeatureConfig& config);

}  // namespace predho
