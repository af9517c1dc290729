#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "predho/bundle.hpp"

namespace predho {

enum class Decision : std::uint8_t { kStable, kLoss, kWarmup, kSuspended };

std::string_view decision_name(Decision d);
Decision decision_from_name(std::string_view name);

struct Prediction {
  double t = 0.0;
  double p_loss = 0.0;  // 0 while warming up
  Decision decision = Decision::kWarmup;
};

// Online sliding-window predictor fed one resampled row per tick.
//
// The first OW*SR ticks only fill the buffer. Afterwards each tick builds
// the window from the buffer exactly like assemble() does, so feeding a
// trace tick by tick reproduces offline batch inference bit for bit.
// A Wi-Fi outage suspends decisions but the buffer keeps filling.
class Predictor {
 public:
  explicit Predictor(ModelBundle bundle, double threshold = 0.5);

  // row: the bundle's feature set at this tick, in feature order.
  Prediction tick(double t, std::span<const double> row, bool wifi_available);

  const ModelBundle& bundle() const { return bundle_; }
  double threshold() const { return threshold_; }
  std::size_t ticks_seen() const { return ticks_seen_; }
  const std::deque<std::vector<double>>& buffer() const { return buffer_; }
  const std::optional<Prediction>& last() const { return last_; }
  // Flattened feature-major window of the current buffer.
  std::vector<double> window() const;

 private:
  ModelBundle bundle_;
  double threshold_;
  std::size_t capacity_;
  std::size_t ticks_seen_ = 0;
  std::deque<std::vector<double>> buffer_;
  std::optional<Prediction> last_;
};

// Runs the predictor over every tick of a trace.
std::vector<Prediction> predict_trace(const ModelBundle& bundle,
                                      const SensorTrace& trace,
                                      double threshold = 0.5);

// Offline path: assemble + scale + infer for each window end >= OW.
// Returns (t, p_loss) for the same ticks predict_trace decides on.
std::vector<std::pair<double, double>> batch_predict_trace(
    const ModelBundle& bundle, const SensorTrace& trace);

// Ground-truth decisions, one per second: LOSS when a loss event falls in
// (t, t + horizon], SUSPENDED while Wi-Fi is down, STABLE otherwise.
// Used as a perfect predictor when exercising the handover logic.
std::vector<Decision> oracle_decisions(const SensorTrace& trace,
                                       double horizon);

}  // namespace predho
