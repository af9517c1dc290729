#include "predho/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace predho {
namespace {

using K = SensorKind;

constexpr std::array<SensorKind, 25> kFullKinds = {
    K::kPressure,      K::kPressureDelta, K::kLinaccX,   K::kLinaccY,
    K::kLinaccZ,       K::kLinaccLength,  K::kStepDelta, K::kIsCharging,
    K::kBatteryPct,    K::kGravityX,      K::kGravityY,  K::kGravityZ,
    K::kGyroLength,    K::kMagX,          K::kMagY,      K::kMagZ,
    K::kOrientX,       K::kOrientY,       K::kOrientZ,   K::kRotX,
    K::kRotY,          K::kRotZ,          K::kWifiFrequency,
    K::kWifiSpeed,     K::kWifiRssi,
};

constexpr std::array<SensorKind, 8> kReducedKinds = {
    K::kPressureDelta, K::kLinaccLength,  K::kStepDelta, K::kIsCharging,
    K::kGravityZ,      K::kWifiFrequency, K::kWifiSpeed, K::kWifiRssi,
};

struct Point {
  double t;
  double v;
};

std::vector<double> carry_forward(const std::vector<Point>& pts,
                                  const ResampledSeries& grid) {
  std::vector<double> out(grid.n_ticks, 0.0);
  std::size_t j = 0;
  for (std::size_t k = 0; k < grid.n_ticks; ++k) {
    const double tk = grid.tick_time(k);
    while (j + 1 < pts.size() && pts[j + 1].t <= tk) ++j;
    out[k] = pts[j].v;
  }
  return out;
}

std::vector<double> differences(const std::vector<double>& parent) {
  std::vector<double> out(parent.size(), 0.0);
  for (std::size_t k = 1; k < parent.size(); ++k) {
    out[k] = parent[k] - parent[k - 1];
  }
  return out;
}

// Sum of explicit delta samples falling in (t_{k-1}, t_k].
std::vector<double> per_tick_sums(const std::vector<Point>& pts,
                                  const ResampledSeries& grid) {
  std::vector<double> out(grid.n_ticks, 0.0);
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k < grid.n_ticks && grid.tick_time(k) < p.t) ++k;
    if (k == grid.n_ticks) break;
    out[k] += p.v;
  }
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t c = line.find(',', pos);
    fields.emplace_back(line.substr(pos, c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return fields;
}

}  // namespace

std::string_view feature_set_name(FeatureSet set) {
  return set == FeatureSet::kFull ? "full" : "reduced";
}

FeatureSet feature_set_from_name(std::string_view name) {
  if (name == "full" || name == "Full") return FeatureSet::kFull;
  if (name == "reduced" || name == "Reduced") return FeatureSet::kReduced;
  throw ConfigError("unknown feature set '" + std::string(name) + "'");
}

std::span<const SensorKind> feature_kinds(FeatureSet set) {
  if (set == FeatureSet::kFull) return kFullKinds;
  return kReducedKinds;
}

void FeatureConfig::validate() const {
  if (!(sampling_rate > 0.0)) throw ConfigError("sampling_rate must be > 0");
  if (!(observation_window >= 1.0)) {
    throw ConfigError("observation_window must be >= 1");
  }
  if (!(prediction_window >= 1.0)) {
    throw ConfigError("prediction_window must be >= 1");
  }
  const double n = observation_window * sampling_rate;
  if (std::abs(n - std::round(n)) > 1e-9) {
    throw ConfigError("observation_window * sampling_rate must be an integer");
  }
}

std::size_t FeatureConfig::ticks_per_window() const {
  return static_cast<std::size_t>(
      std::llround(observation_window * sampling_rate));
}

std::size_t FeatureConfig::vector_length() const {
  return feature_kinds(feature_set).size() * ticks_per_window();
}

std::vector<double> ResampledSeries::row(std::size_t k, FeatureSet set) const {
  std::vector<double> out;
  const auto kinds = feature_kinds(set);
  out.reserve(kinds.size());
  for (SensorKind kind : kinds) out.push_back(series(kind)[k]);
  return out;
}

ResampledSeries resample(const SensorTrace& trace, const FeatureConfig& config) {
  config.validate();
  if (trace.empty()) throw EmptyTraceError("cannot resample an empty trace");
  ResampledSeries out;
  out.sampling_rate = config.sampling_rate;
  out.n_ticks = static_cast<std::size_t>(
                    std::floor(trace.duration() * config.sampling_rate + 1e-9)) +
                1;
  out.values.assign(kSensorKindCount, {});

  std::vector<std::vector<Point>> by_kind(kSensorKindCount);
  for (const auto& s : trace.samples()) {
    by_kind[static_cast<std::size_t>(s.kind)].push_back({s.t, s.value});
  }
  auto present = [&](SensorKind k) {
    return !by_kind[static_cast<std::size_t>(k)].empty();
  };
  auto absent = [&](SensorKind k) {
    out.warnings.push_back(std::string(kind_name(k)) +
                           " absent from trace; filled with 0");
    return std::vector<double>(out.n_ticks, 0.0);
  };

  for (SensorKind kind : kFullKinds) {
    auto& dst = out.values[static_cast<std::size_t>(kind)];
    const auto& pts = by_kind[static_cast<std::size_t>(kind)];
    if (kind == K::kPressureDelta || kind == K::kStepDelta) {
      const SensorKind parent =
          kind == K::kPressureDelta ? K::kPressure : K::kStepCount;
      if (present(parent)) {
        dst = differences(
            carry_forward(by_kind[static_cast<std::size_t>(parent)], out));
      } else if (!pts.empty()) {
        dst = per_tick_sums(pts, out);
      } else {
        dst = absent(kind);
      }
      continue;
    }
    dst = pts.empty() ? absent(kind) : carry_forward(pts, out);
  }
  return out;
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kLoss:
      return "LOSS";
    case Label::kStable:
      return "STABLE";
    case Label::kUnknown:
      break;
  }
  return "UNKNOWN";
}

Label label_from_name(std::string_view name) {
  if (name == "LOSS") return Label::kLoss;
  if (name == "STABLE") return Label::kStable;
  if (name == "UNKNOWN") return Label::kUnknown;
  throw SchemaError("unknown label '" + std::string(name) + "'");
}

FeatureWindow assemble(const ResampledSeries& series, double end_time,
                       const FeatureConfig& config) {
  if (end_time < config.observation_window) {
    throw InsufficientHistoryError(
        "window ending at " + format_double(end_time) + " needs " +
        format_double(config.observation_window) + " s of history");
  }
  const auto end_tick = static_cast<std::size_t>(
      std::floor(end_time * series.sampling_rate + 1e-9));
  if (end_tick >= series.n_ticks) {
    throw Error("window ending at " + format_double(end_time) +
                " is past the end of the series");
  }
  const std::size_t n = config.ticks_per_window();
  const std::size_t start = end_tick + 1 - n;
  FeatureWindow w;
  w.end_time = series.tick_time(end_tick);
  w.values.reserve(config.vector_length());
  for (SensorKind kind : feature_kinds(config.feature_set)) {
    const auto& s = series.series(kind);
    w.values.insert(w.values.end(), s.begin() + static_cast<long>(start),
                    s.begin() + static_cast<long>(end_tick + 1));
  }
  return w;
}

std::vector<FeatureWindow> sliding_windows(const ResampledSeries& series,
                                           const FeatureConfig& config) {
  std::vector<FeatureWindow> out;
  const std::size_t n = config.ticks_per_window();
  for (std::size_t k = n; k < series.n_ticks; ++k) {
    out.push_back(assemble(series, series.tick_time(k), config));
  }
  return out;
}

std::vector<FeatureWindow> label_windows(
    std::vector<FeatureWindow> windows, std::span<const double> loss_events,
    std::span<const AvailabilityChange> availability,
    const FeatureConfig& config) {
  std::vector<FeatureWindow> out;
  out.reserve(windows.size());
  for (auto& w : windows) {
    if (!available_at(availability, w.end_time)) continue;
    auto next = std::upper_bound(loss_events.begin(), loss_events.end(),
                                 w.end_time);
    const bool loss = next != loss_events.end() &&
                      *next <= w.end_time + config.prediction_window;
    w.label = loss ? Label::kLoss : Label::kStable;
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(),
                    [&](const FeatureWindow& w) { return w.label == label; }));
}

void Dataset::add(FeatureWindow window, std::string user) {
  windows.push_back(std::move(window));
  users.push_back(std::move(user));
}

void Dataset::append(const Dataset& other) {
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
  users.insert(users.end(), other.users.begin(), other.users.end());
}

void Dataset::validate() const {
  if (users.size() != windows.size()) {
    throw SchemaError("provenance list length differs from window count");
  }
  const std::size_t len = config.vector_length();
  for (const auto& w : windows) {
    if (w.values.size() != len) {
      throw SchemaError("window length " + std::to_string(w.values.size()) +
                        " != expected " + std::to_string(len));
    }
    if (w.label == Label::kUnknown) {
      throw SchemaError("dataset windows must be labeled");
    }
  }
}

Dataset windows_from_trace(const SensorTrace& trace,
                           const FeatureConfig& config,
                           const std::string& user) {
  const ResampledSeries series = resample(trace, config);
  const auto losses = wifi_loss_events(trace);
  auto labeled = label_windows(sliding_windows(series, config), losses,
                               trace.availability(), config);
  Dataset ds;
  ds.config = config;
  ds.windows = std::move(labeled);
  ds.users.assign(ds.windows.size(), user);
  return ds;
}

std::vector<double> Scaler::apply(std::span<const double> v) const {
  std::vector<double> out(v.begin(), v.end());
  apply_in_place(out);
  return out;
}

void Scaler::apply_in_place(std::span<double> v) const {
  if (v.size() != mean.size()) {
    throw SchemaError("scaler expects " + std::to_string(mean.size()) +
                      " features, got " + std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] - mean[i]) / scale[i];
}

std::vector<double> Scaler::inverse(std::span<const double> v) const {
  if (v.size() != mean.size()) throw SchemaError("scaler length mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale[i] + mean[i];
  return out;
}

Scaler fit_scaler(const Dataset& dataset) {
  if (dataset.empty()) throw Error("cannot fit a scaler on an empty dataset");
  const std::size_t d = dataset.windows.front().values.size();
  const double n = static_cast<double>(dataset.size());
  Scaler s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (const auto& w : dataset.windows) {
    if (w.values.size() != d) throw SchemaError("ragged dataset");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += w.values[j];
  }
  for (double& m : s.mean) m /= n;
  for (const auto& w : dataset.windows) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = w.values[j] - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / n);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

Dataset apply_scaler(const Scaler& scaler, Dataset dataset) {
  for (auto& w : dataset.windows) scaler.apply_in_place(w.values);
  return dataset;
}

SplitResult split(const Dataset& dataset, const SplitMode& mode) {
  SplitResult out;
  out.train.config = dataset.config;
  out.test.config = dataset.config;
  std::vector<bool> to_test(dataset.size(), false);

  if (const auto* r = std::get_if<RandomSplit>(&mode)) {
    if (!(r->train_frac > 0.0 && r->train_frac < 1.0)) {
      throw ConfigError("train_frac must be in (0, 1)");
    }
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(r->seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(r->train_frac * static_cast<double>(dataset.size())));
    for (std::size_t i = n_train; i < idx.size(); ++i) to_test[idx[i]] = true;
  } else {
    const auto& u = std::get<ByUserSplit>(mode);
    std::set<std::string> known(dataset.users.begin(), dataset.users.end());
    std::set<std::string> test(u.test_users.begin(), u.test_users.end());
    for (const auto& name : test) {
      if (!known.count(name)) throw ConfigError("unknown user id '" + name + "'");
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      to_test[i] = test.count(dataset.users[i]) > 0;
    }
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (to_test[i] ? out.test : out.train)
        .add(dataset.windows[i], dataset.users[i]);
  }
  return out;
}

void save_dataset_csv(const Dataset& dataset,
                      const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  const std::size_t d = dataset.config.vector_length();
  std::string line;
  for (std::size_t j = 0; j < d; ++j) {
    line += 'f';
    line += std::to_string(j);
    line += ',';
  }
  line += "label,user,end_time\n";
  out << line;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& w = dataset.windows[i];
    if (dataset.users[i].find_first_of(",\n") != std::string::npos) {
      throw SchemaError("user id may not contain ',' or newline");
    }
    line.clear();
    for (double v : w.values) {
      line += format_double(v);
      line += ',';
    }
    line += label_name(w.label);
    line += ',';
    line += dataset.users[i];
    line += ',';
    line += format_double(w.end_time);
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset load_dataset_csv(const std::filesystem::path& path,
                         const FeatureConfig& config) {
  config.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  const std::size_t d = config.vector_length();
  Dataset ds;
  ds.config = config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != d + 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(d + 3) + " columns, got " +
                        std::to_string(fields.size()));
    }
    if (line_no == 1) {
      if (fields[0] != "f0" || fields[d] != "label") {
        throw ParseError("bad dataset header", line_no);
      }
      continue;
    }
    FeatureWindow w;
    w.values.resize(d);
    try {
      for (std::size_t j = 0; j < d; ++j) w.values[j] = parse_double(fields[j]);
      w.end_time = parse_double(fields[d + 2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    w.label = label_from_name(fields[d]);
    ds.add(std::move(w), fields[d + 1]);
  }
  if (line_no == 0) throw IoError("dataset file is empty: " + path.string());
  ds.validate();
  return ds;
}

}  // namespace predho
