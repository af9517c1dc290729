#include "predho/predictor.hpp"

#include <cmath>

namespace predho {

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::kStable:
      return "STABLE";
    case Decision::kLoss:
      return "LOSS";
    case Decision::kWarmup:
      return "WARMUP";
    case Decision::kSuspended:
      break;
  }
  return "SUSPENDED";
}

Decision decision_from_name(std::string_view name) {
  for (Decision d : {Decision::kStable, Decision::kLoss, Decision::kWarmup,
                     Decision::kSuspended}) {
    if (decision_name(d) == name) return d;
  }
  throw SchemaError("unknown decision '" + std::string(name) + "'");
}

Predictor::Predictor(ModelBundle bundle, double threshold)
    : bundle_(std::move(bundle)),
      threshold_(threshold),
      capacity_(bundle_.config.ticks_per_window()) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("decision threshold must lie in [0, 1]");
  }
}

std::vector<double> Predictor::window() const {
  const std::size_t n_features = feature_kinds(bundle_.config.feature_set).size();
  std::vector<double> v;
  v.reserve(n_features * buffer_.size());
  for (std::size_t f = 0; f < n_features; ++f) {
    for (const auto& row : buffer_) v.push_back(row[f]);
  }
  return v;
}

Prediction Predictor::tick(double t, std::span<const double> row,
                           bool wifi_available) {
  if (last_ && !(t > last_->t)) {
    throw Error("predictor ticks must have strictly increasing t");
  }
  const std::size_t n_features =
      feature_kinds(bundle_.config.feature_set).size();
  if (row.size() != n_features) {
    throw SchemaError("predictor row has " + std::to_string(row.size()) +
                      " values, expected " + std::to_string(n_features));
  }
  const bool warm = ticks_seen_ >= capacity_;
  buffer_.emplace_back(row.begin(), row.end());
  if (buffer_.size() > capacity_) buffer_.pop_front();
  ++ticks_seen_;

  Prediction p;
  p.t = t;
  if (!warm) {
    p.decision = Decision::kWarmup;
  } else {
    p.p_loss = bundle_.predict(window());
    if (!wifi_available) {
      p.decision = Decision::kSuspended;
    } else {
      p.decision = p.p_loss >= threshold_ ? Decision::kLoss : Decision::kStable;
    }
  }
  last_ = p;
  return p;
}

std::vector<Prediction> predict_trace(const ModelBundle& bundle,
                                      const SensorTrace& trace,
                                      double threshold) {
  const auto series = resample(trace, bundle.config);
  Predictor predictor(bundle, threshold);
  std::vector<Prediction> out;
  out.reserve(series.n_ticks);
  for (std::size_t k = 0; k < series.n_ticks; ++k) {
    const double t = series.tick_time(k);
    const auto row = series.row(k, bundle.config.feature_set);
    out.push_back(predictor.tick(t, row, trace.wifi_available_at(t)));
  }
  return out;
}

std::vector<std::pair<double, double>> batch_predict_trace(
    const ModelBundle& bundle, const SensorTrace& trace) {
  const auto series = resample(trace, bundle.config);
  std::vector<std::pair<double, double>> out;
  for (const auto& w : sliding_windows(series, bundle.config)) {
    out.emplace_back(w.end_time, bundle.predict(w.values));
  }
  return out;
}

std::vector<Decision> oracle_decisions(const SensorTrace& trace,
                                       double horizon) {
  const auto losses = wifi_loss_events(trace);
  const auto n = static_cast<std::size_t>(std::floor(trace.duration())) + 1;
  std::vector<Decision> out(n, Decision::kStable);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s);
    if (!trace.wifi_available_at(t)) {
      out[s] = Decision::kSuspended;
      continue;
    }
    for (double l : losses) {
      if (t < l && l <= t + horizon) {
        out[s] = Decision::kLoss;
        break;
      }
    }
  }
  return out;
}

}  // namespace predho
