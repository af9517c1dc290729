#include "predho/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "predho/common.hpp"

namespace predho {
namespace {

constexpr std::array<std::string_view, kSensorKindCount> kKindNames = {
    "pressure",      "pressure_delta", "linacc_x",       "linacc_y",
    "linacc_z",      "linacc_length",  "step_delta",     "is_charging",
    "battery_pct",   "gravity_x",      "gravity_y",      "gravity_z",
    "gyro_length",   "mag_x",          "mag_y",          "mag_z",
    "orient_x",      "orient_y",       "orient_z",       "rot_x",
    "rot_y",         "rot_z",          "wifi_frequency", "wifi_speed",
    "wifi_rssi",     "step_count",
};

constexpr std::string_view kAvailabilityKind = "wifi_available";

std::vector<AvailabilityChange> normalize_availability(
    std::vector<AvailabilityChange> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });
  std::vector<AvailabilityChange> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!std::isfinite(p.t) || p.t < 0.0) {
      throw SchemaError("availability change at invalid time");
    }
    if (!out.empty() && out.back().t == p.t) {
      if (out.back().available != p.available) {
        throw SchemaError("conflicting wifi_available values at t=" +
                          format_double(p.t));
      }
      continue;
    }
    if (!out.empty() && out.back().available == p.available) continue;
    out.push_back(p);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string_view kind_name(SensorKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<SensorKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<SensorKind>(i);
  }
  return std::nullopt;
}

bool is_boolean_kind(SensorKind kind) {
  return kind == SensorKind::kIsCharging;
}

std::array<SensorKind, kSensorKindCount> all_kinds() {
  std::array<SensorKind, kSensorKindCount> kinds{};
  for (std::size_t i = 0; i < kSensorKindCount; ++i) {
    kinds[i] = static_cast<SensorKind>(i);
  }
  return kinds;
}

SensorTrace::SensorTrace(std::vector<SensorSample> samples,
                         std::vector<AvailabilityChange> availability)
    : samples_(std::move(samples)),
      availability_(normalize_availability(std::move(availability))) {
  for (const auto& s : samples_) {
    if (!std::isfinite(s.t) || s.t < 0.0) {
      throw SchemaError("sample time must be finite and non-negative");
    }
    if (static_cast<std::size_t>(s.kind) >= kSensorKindCount) {
      throw SchemaError("sample kind outside the catalog");
    }
    if (!std::isfinite(s.value)) {
      throw SchemaError("non-finite value for " +
                        std::string(kind_name(s.kind)));
    }
    if (is_boolean_kind(s.kind) && s.value != 0.0 && s.value != 1.0) {
      throw SchemaError(std::string(kind_name(s.kind)) +
                        " must be 0 or 1, got " + format_double(s.value));
    }
  }
  std::stable_sort(samples_.begin(), samples_.end(),
                   [](const SensorSample& a, const SensorSample& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.kind < b.kind;
                   });
  if (!samples_.empty()) duration_ = samples_.back().t;
  if (!availability_.empty()) {
    duration_ = std::max(duration_, availability_.back().t);
  }
}

bool available_at(std::span<const AvailabilityChange> timeline, double t) {
  if (timeline.empty()) return true;
  auto it = std::upper_bound(
      timeline.begin(), timeline.end(), t,
      [](double v, const AvailabilityChange& c) { return v < c.t; });
  if (it == timeline.begin()) return timeline.front().available;
  return std::prev(it)->available;
}

bool SensorTrace::wifi_available_at(double t) const {
  return available_at(availability_, t);
}

std::vector<double> wifi_loss_events(const SensorTrace& trace) {
  std::vector<double> events;
  const auto& points = trace.availability();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].available) continue;
    // An unavailable first point extends back to the trace start.
    events.push_back(i == 0 ? 0.0 : points[i].t);
  }
  return events;
}

SensorTrace parse_trace_csv(std::string_view text) {
  std::vector<SensorSample> samples;
  std::vector<AvailabilityChange> availability;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t,kind,value") {
        throw ParseError("expected header 't,kind,value'", line_no);
      }
      header_seen = true;
      continue;
    }
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos ||
        line.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError("expected 3 fields", line_no);
    }
    std::string_view kind = trim(line.substr(c1 + 1, c2 - c1 - 1));
    double t = 0.0;
    double value = 0.0;
    try {
      t = parse_double(line.substr(0, c1));
      value = parse_double(line.substr(c2 + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!std::isfinite(t) || t < 0.0) {
      throw ParseError("time must be finite and non-negative", line_no);
    }
    if (kind == kAvailabilityKind) {
      if (value != 0.0 && value != 1.0) {
        throw ParseError("wifi_available must be 0 or 1", line_no);
      }
      availability.push_back({t, value == 1.0});
      continue;
    }
    auto k = kind_from_name(kind);
    if (!k) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": unknown sensor kind '" + std::string(kind) + "'");
    }
    samples.push_back({t, *k, value});
  }
  if (samples.empty()) throw EmptyTraceError("trace has no sensor samples");
  return SensorTrace(std::move(samples), std::move(availability));
}

SensorTrace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

std::string format_trace_csv(const SensorTrace& trace) {
  std::string out = "t,kind,value\n";
  const auto& points = trace.availability();
  std::size_t a = 0;
  auto emit_availability = [&](const AvailabilityChange& c) {
    out += format_double(c.t);
    out += ",wifi_available,";
    out += c.available ? "1\n" : "0\n";
  };
  for (const auto& s : trace.samples()) {
    while (a < points.size() && points[a].t <= s.t) emit_availability(points[a++]);
    out += format_double(s.t);
    out += ',';
    out += kind_name(s.kind);
    out += ',';
    out += format_double(s.value);
    out += '\n';
  }
  while (a < points.size()) emit_availability(points[a++]);
  return out;
}

void save_trace_csv(const SensorTrace& trace,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace " + path.string());
  out << format_trace_csv(trace);
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Scenario synthesis

void ScenarioSpec::validate() const {
  if (scenario_id < 1 || scenario_id > 4) {
    throw ConfigError("scenario_id must be in 1..4");
  }
  if (!(playback_lead >= 0.0)) throw ConfigError("playback_lead must be >= 0");
  if (!(rssi.decay_rate > 0.0)) throw ConfigError("decay_rate must be > 0");
  if (!(rssi.noise_db >= 0.0)) throw ConfigError("noise_db must be >= 0");
  if (!(rssi.loss_threshold < rssi.start_dbm)) {
    throw ConfigError("loss_threshold must be below start_dbm");
  }
  if (!(rssi.cell_seconds >= 4.0)) throw ConfigError("cell_seconds too small");
  for (double g : rssi.roaming_gaps) {
    if (!(g >= 1.0)) throw ConfigError("roaming gaps must be >= 1 s");
  }
  if (!(tail_seconds >= 0.0)) throw ConfigError("tail_seconds must be >= 0");
  if (!(landing_seconds >= 0.0)) {
    throw ConfigError("landing_seconds must be >= 0");
  }
  if (!(motion.step_rate > 0.0)) throw ConfigError("step_rate must be > 0");
  if (!(pressure.ramp_seconds >= 1.0)) {
    throw ConfigError("ramp_seconds must be >= 1");
  }
}

namespace {

enum class Posture { kDesk, kWalking, kStanding, kStairs };

struct Second {
  Posture posture = Posture::kDesk;
  double rssi = 0.0;  // noise-free level; ignored while unavailable
  bool available = true;
  int ap = 0;
  double pressure_offset = 0.0;
  bool collapsed = false;  // link speed collapse (scenario 3 plateau)
  std::optional<double> observed;  // pre-drawn RSSI reading, if any
};

constexpr std::array<double, 3> kApFrequencies = {5180.0, 2437.0, 5240.0};

class TimelineBuilder {
 public:
  void push(Posture posture, double rssi, bool available = true,
            double pressure = 0.0, bool collapsed = false) {
    seconds_.push_back(
        {posture, rssi, available, ap_, pressure, collapsed, std::nullopt});
  }
  // Linear RSSI ramp over n seconds, excluding the start value.
  void ramp(Posture posture, double from, double to, int n,
            double pressure_from = 0.0, double pressure_to = 0.0,
            bool collapsed = false) {
    for (int i = 1; i <= n; ++i) {
      double f = static_cast<double>(i) / n;
      push(posture, from + (to - from) * f, true,
           pressure_from + (pressure_to - pressure_from) * f, collapsed);
    }
  }
  void gap(int n, Posture posture, double pressure = 0.0) {
    for (int i = 0; i < n; ++i) push(posture, -100.0, false, pressure);
  }
  void set_ap(int ap) { ap_ = ap; }
  int size() const { return static_cast<int>(seconds_.size()); }
  std::vector<Second>& seconds() { return seconds_; }

 private:
  std::vector<Second> seconds_;
  int ap_ = 0;
};

int whole_seconds(double s) {
  return std::max(1, static_cast<int>(std::lround(s)));
}

int seconds_to_reach(double from, double to, double rate) {
  return whole_seconds(std::abs(from - to) / rate);
}

// Link-layer speed reported by the radio for a given RSSI (Mbit/s).
double link_speed(double rssi) {
  if (rssi >= -60.0) return 72.2;
  if (rssi >= -65.0) return 65.0;
  if (rssi >= -70.0) return 52.0;
  if (rssi >= -75.0) return 39.0;
  if (rssi >= -80.0) return 19.5;
  if (rssi >= -85.0) return 13.0;
  return 6.5;
}

}  // namespace

SensorTrace generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto noise = [&](double sigma) { return sigma * unit(rng); };

  const auto& r = spec.rssi;
  TimelineBuilder tl;
  const int lead = static_cast<int>(std::lround(spec.playback_lead));
  for (int i = 0; i < lead; ++i) tl.push(Posture::kDesk, r.start_dbm);
  const int tail = static_cast<int>(std::lround(spec.tail_seconds));

  switch (spec.scenario_id) {
    case 1: {
      double level = r.start_dbm;
      for (int guard = 0; guard < 100000; ++guard) {
        level -= r.decay_rate;
        // The reading that decides the loss is the one emitted.
        const double observed = std::round(level + noise(r.noise_db));
        tl.push(Posture::kWalking, level);
        tl.seconds().back().observed = observed;
        if (observed <= r.loss_threshold) break;
      }
      // Loss at the last pushed second: mark it and the tail unavailable.
      tl.seconds().back().available = false;
      tl.seconds().back().rssi = -100.0;
      tl.gap(std::max(tail, 10), Posture::kStanding);
      break;
    }
    case 2: {
      int out = seconds_to_reach(r.start_dbm, r.dip_dbm, r.decay_rate);
      tl.ramp(Posture::kWalking, r.start_dbm, r.dip_dbm, out);
      for (int i = 0; i < 10; ++i) tl.push(Posture::kStanding, r.dip_dbm);
      tl.ramp(Posture::kWalking, r.dip_dbm, r.start_dbm, out);
      for (int i = 0; i < tail; ++i) tl.push(Posture::kDesk, r.start_dbm);
      break;
    }
    case 3: {
      const auto& p = spec.pressure;
      int approach = seconds_to_reach(r.start_dbm, r.stair_start_dbm,
                                      r.decay_rate);
      int stairs = whole_seconds(p.ramp_seconds);
      tl.ramp(Posture::kWalking, r.start_dbm, r.stair_start_dbm, approach);
      tl.ramp(Posture::kStairs, r.stair_start_dbm, r.plateau_dbm, stairs, 0.0,
              p.ramp_hpa, true);
      const int landing = static_cast<int>(std::lround(spec.landing_seconds));
      for (int i = 0; i < landing; ++i) {
        tl.push(Posture::kStanding, r.plateau_dbm, true, p.ramp_hpa, true);
      }
      if (spec.stairs_exit) {
        // Head further along the upper floor until the AP is out of reach.
        double level = r.plateau_dbm;
        for (int guard = 0; guard < 100000; ++guard) {
          level -= r.decay_rate;
          const double observed = std::round(level + noise(r.noise_db));
          tl.push(Posture::kWalking, level, true, p.ramp_hpa, true);
          tl.seconds().back().observed = observed;
          if (observed <= r.loss_threshold) break;
        }
        tl.seconds().back().available = false;
        tl.seconds().back().rssi = -100.0;
        tl.gap(std::max(tail, 10), Posture::kStanding, p.ramp_hpa);
      } else {
        tl.ramp(Posture::kStairs, r.plateau_dbm, r.stair_start_dbm, stairs,
                p.ramp_hpa, 0.0, true);
        tl.ramp(Posture::kWalking, r.stair_start_dbm, r.start_dbm, approach);
        for (int i = 0; i < tail; ++i) tl.push(Posture::kDesk, r.start_dbm);
      }
      // Through the floor slab the link stops carrying traffic, well before
      // the AP is actually lost.
      for (auto& sec : tl.seconds()) {
        if (sec.collapsed && sec.rssi > r.collapse_dbm) sec.collapsed = false;
      }
      break;
    }
    case 4: {
      std::vector<int> gaps;
      if (r.roaming_gaps.empty()) {
        std::uniform_int_distribution<int> gap_len(2, 6);
        for (int i = 0; i < 4; ++i) gaps.push_back(gap_len(rng));
      } else {
        for (double g : r.roaming_gaps) gaps.push_back(whole_seconds(g));
      }
      const int crossings = static_cast<int>(gaps.size());
      const int outward = (crossings + 1) / 2;
      const double peak = -55.0;
      const double entry = r.loss_threshold + 3.0;
      const int half_cell = whole_seconds(r.cell_seconds / 2.0);
      int ap = 0;
      int dir = 1;
      tl.ramp(Posture::kWalking, r.start_dbm, r.loss_threshold,
              seconds_to_reach(r.start_dbm, r.loss_threshold, r.decay_rate));
      for (int k = 0; k < crossings; ++k) {
        tl.gap(gaps[k], Posture::kWalking);
        ap += dir;
        tl.set_ap(ap);
        const bool last = k + 1 == crossings;
        if (k + 1 == outward) {
          // Far end: walk up to the AP, stay, then head back if needed.
          tl.ramp(Posture::kWalking, entry, peak + 5.0, half_cell);
          for (int i = 0; i < 10; ++i) tl.push(Posture::kStanding, peak + 5.0);
          if (last) break;
          tl.ramp(Posture::kWalking, peak + 5.0, r.loss_threshold, half_cell);
          dir = -1;
        } else if (last) {
          tl.ramp(Posture::kWalking, entry, r.start_dbm,
                  seconds_to_reach(entry, r.start_dbm, r.decay_rate));
        } else {
          tl.ramp(Posture::kWalking, entry, peak, half_cell);
          tl.ramp(Posture::kWalking, peak, r.loss_threshold, half_cell);
        }
      }
      for (int i = 0; i < tail; ++i) {
        tl.push(Posture::kDesk, tl.seconds().back().rssi);
      }
      break;
    }
  }

  const auto& seconds = tl.seconds();

  // Per-trace constants.
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double base_pressure = 1013.25 + noise(3.0);
  const double battery_start = 40.0 + 55.0 * uni(rng);
  double heading = 2.0 * std::numbers::pi * uni(rng);

  std::vector<SensorSample> samples;
  samples.reserve(seconds.size() * 24);
  std::vector<AvailabilityChange> availability;
  auto emit = [&](double t, SensorKind k, double v) {
    samples.push_back({t, k, v});
  };

  bool prev_available = true;
  int prev_ap = -1;
  double prev_frequency = -1.0;
  for (std::size_t i = 0; i < seconds.size(); ++i) {
    const Second& s = seconds[i];
    const double t = static_cast<double>(i);
    if (i == 0 || s.available != prev_available) {
      availability.push_back({t, s.available});
      prev_available = s.available;
    }

    // Motion.
    double gx = 0.05, gy = 0.05, gz = 9.81, gsig = 0.02;
    double accel = 0.03, gyro = 0.01;
    int steps = 0;
    switch (s.posture) {
      case Posture::kDesk:
        break;
      case Posture::kWalking:
      case Posture::kStairs:
        gx = 0.8;
        gy = 9.2;
        gz = 3.2;
        gsig = 0.4;
        accel = spec.motion.accel_noise *
                (s.posture == Posture::kStairs ? 1.4 : 1.0);
        gyro = 0.6;
        heading += noise(0.05);
        steps = std::max(1, static_cast<int>(std::lround(
                                spec.motion.step_rate + noise(0.4))));
        break;
      case Posture::kStanding:
        gx = 0.6;
        gy = 8.9;
        gz = 4.0;
        gsig = 0.15;
        accel = 0.15;
        gyro = 0.1;
        break;
    }
    const double lx = noise(accel), ly = noise(accel), lz = noise(accel);
    emit(t, SensorKind::kPressure,
         base_pressure + s.pressure_offset + noise(0.01));
    emit(t, SensorKind::kLinaccX, lx);
    emit(t, SensorKind::kLinaccY, ly);
    emit(t, SensorKind::kLinaccZ, lz);
    emit(t, SensorKind::kLinaccLength, std::sqrt(lx * lx + ly * ly + lz * lz));
    emit(t, SensorKind::kStepDelta, steps);
    if (i == 0) emit(t, SensorKind::kIsCharging, 0.0);
    if (i % 30 == 0) {
      emit(t, SensorKind::kBatteryPct,
           std::round(battery_start - 0.02 * t));
    }
    const double gravity_z = gz + noise(gsig);
    emit(t, SensorKind::kGravityX, gx + noise(gsig));
    emit(t, SensorKind::kGravityY, gy + noise(gsig));
    emit(t, SensorKind::kGravityZ, gravity_z);
    emit(t, SensorKind::kGyroLength, gyro + std::abs(noise(gyro * 0.5)));
    emit(t, SensorKind::kMagX, 20.0 * std::cos(heading) + noise(0.5));
    emit(t, SensorKind::kMagY, 20.0 * std::sin(heading) + noise(0.5));
    emit(t, SensorKind::kMagZ, -40.0 + noise(0.5));
    const double azimuth = std::fmod(heading * 180.0 / std::numbers::pi, 360.0);
    const double pitch = s.posture == Posture::kDesk ? 0.5 : -65.0;
    const double roll = s.posture == Posture::kDesk ? 0.3 : 5.0;
    emit(t, SensorKind::kOrientX, azimuth + noise(1.0));
    emit(t, SensorKind::kOrientY, pitch + noise(1.0));
    emit(t, SensorKind::kOrientZ, roll + noise(1.0));
    emit(t, SensorKind::kRotX, std::sin(pitch * std::numbers::pi / 360.0));
    emit(t, SensorKind::kRotY, std::sin(roll * std::numbers::pi / 360.0));
    emit(t, SensorKind::kRotZ, std::sin(heading / 2.0) + noise(0.01));

    // Wi-Fi properties.
    const double frequency =
        s.available ? kApFrequencies[static_cast<std::size_t>(s.ap) %
                                     kApFrequencies.size()]
                    : 0.0;
    if (frequency != prev_frequency || s.ap != prev_ap) {
      emit(t, SensorKind::kWifiFrequency, frequency);
      prev_frequency = frequency;
      prev_ap = s.ap;
    }
    if (s.available) {
      const double rssi =
          s.observed ? *s.observed : std::round(s.rssi + noise(r.noise_db));
      emit(t, SensorKind::kWifiRssi, rssi);
      emit(t, SensorKind::kWifiSpeed,
           s.collapsed ? std::max(0.5, 1.0 + noise(0.2)) : link_speed(rssi));
    } else {
      emit(t, SensorKind::kWifiRssi, -100.0);
      emit(t, SensorKind::kWifiSpeed, 0.0);
    }
  }
  return SensorTrace(std::move(samples), std::move(availability));
}

}  // namespace predho
