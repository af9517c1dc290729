#include "predho/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace predho {
namespace {

using nlohmann::json;

constexpr std::string_view kReportFormat = "predho-session-report";

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("report is missing '") + key + "'");
  }
  return *it;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

void SimConfig::validate() const {
  handover.validate();
  path.validate();
  stream.validate();
  power.validate();
  if (!(tick > 0.0 && tick <= 1.0)) throw ConfigError("tick must be in (0, 1]");
  const double per_second = 1.0 / tick;
  if (std::abs(per_second - std::round(per_second)) > 1e-9) {
    throw ConfigError("tick must divide one second evenly");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must be in [0, 1]");
  }
}

std::string SessionReport::run_id() const {
  return "s" + std::to_string(scenario) + "_" + std::string(mode_name(mode)) +
         "_r" + std::to_string(repetition);
}

std::vector<Decision> decisions_from_predictions(
    std::span<const Prediction> predictions, double sampling_rate,
    std::size_t seconds) {
  std::vector<Decision> out(seconds, Decision::kWarmup);
  for (std::size_t s = 0; s < seconds; ++s) {
    const auto k = static_cast<std::size_t>(
        std::floor(static_cast<double>(s) * sampling_rate + 1e-9));
    if (k < predictions.size()) out[s] = predictions[k].decision;
  }
  return out;
}

SessionReport run_session(const SensorTrace& trace, ConnectivityMode mode,
                          const SimConfig& config,
                          std::span<const Decision> decisions) {
  config.validate();
  if (trace.empty()) throw EmptyTraceError("cannot simulate an empty trace");
  const auto seconds =
      static_cast<std::size_t>(std::floor(trace.duration())) + 1;
  if (mode == ConnectivityMode::kSeamless && decisions.size() < seconds) {
    throw ConfigError("Seamless mode needs one decision per second");
  }

  FeatureConfig grid;  // 1 Hz, all kinds resampled
  const auto series = resample(trace, grid);
  const auto wifi_nominal = wifi_capacity_series(trace, series, config.path);

  SessionReport rep;
  rep.mode = mode;
  rep.duration = static_cast<double>(seconds);
  Network net(config.path, config.scheduler);
  StreamSession client(config.stream);
  HandoverState hs = initial_handover_state(trace.wifi_available_at(0.0));
  std::vector<PowerState> power;
  power.reserve(seconds);
  const auto ticks_per_second =
      static_cast<std::size_t>(std::llround(1.0 / config.tick));
  double cellular_bits = 0.0;

  for (std::size_t s = 0; s < seconds; ++s) {
    const double t = static_cast<double>(s);
    const bool w = trace.wifi_available_at(t);
    const Decision d = mode == ConnectivityMode::kSeamless ? decisions[s]
                                                           : Decision::kWarmup;
    auto step = handover_step(hs, mode, w, d, config.handover);
    hs = step.state;
    for (HandoverEvent e : step.events) rep.events.push_back({t, e, hs.active});
    const PowerState ps = power_state(mode, hs);
    power.push_back(ps);
    rep.seconds_in_state[static_cast<std::size_t>(ps)] += 1.0;
    if (hs.active == ActivePath::kDisconnected) rep.disconnected_seconds += 1.0;

    const double nominal = wifi_nominal[std::min(s, wifi_nominal.size() - 1)];
    for (std::size_t i = 0; i < ticks_per_second; ++i) {
      TelemetryRow row;
      row.t = t + static_cast<double>(i) * config.tick;
      const double demand = client.demand_bits();
      const NetTick nt = net.step(nominal, hs.active, demand, config.tick);
      client.advance(nt.delivered_bits, config.tick);
      cellular_bits += nt.cellular_bits;
      row.wifi_capacity = net.wifi().capacity;
      row.cell_capacity = net.cellular().capacity;
      row.delivered = nt.delivered_bits;
      row.cellular_bytes_cum = cellular_bits / 8.0;
      row.buffer = client.buffer_level();
      rep.telemetry.push_back(row);
    }
  }

  rep.stats = client.finalize();
  rep.segments = client.segments();
  rep.cellular_bytes = cellular_bits / 8.0;
  rep.mos = mos_from_stats(rep.stats.stall_count, rep.stats.mean_stall_len,
                           rep.stats.hq_fraction);
  rep.energy = energy(power, config.power);
  return rep;
}

SessionReport run_session(const SensorTrace& trace, ConnectivityMode mode,
                          const SimConfig& config, const ModelBundle& bundle) {
  if (mode != ConnectivityMode::kSeamless) {
    return run_session(trace, mode, config, std::span<const Decision>{});
  }
  auto predictions = predict_trace(bundle, trace, config.threshold);
  const auto seconds =
      static_cast<std::size_t>(std::floor(trace.duration())) + 1;
  const auto decisions = decisions_from_predictions(
      predictions, bundle.config.sampling_rate, seconds);
  SessionReport rep = run_session(trace, mode, config, decisions);
  rep.predictions = std::move(predictions);
  return rep;
}

std::string report_to_text(const SessionReport& r) {
  json j;
  j["format"] = kReportFormat;
  j["format_version"] = kReportFormatVersion;
  j["scenario"] = r.scenario;
  j["mode"] = mode_name(r.mode);
  j["repetition"] = r.repetition;
  j["seed"] = r.seed;
  j["duration"] = r.duration;

  json stalls = json::array();
  for (const auto& s : r.stats.stalls) stalls.push_back({s.start, s.end});
  j["stats"] = {{"stall_count", r.stats.stall_count},
                {"mean_stall_len", r.stats.mean_stall_len},
                {"adaptation_count", r.stats.adaptation_count},
                {"hq_fraction", r.stats.hq_fraction},
                {"initial_stall_len", r.stats.initial_stall_len},
                {"played_time", r.stats.played_time},
                {"stalled_time", r.stats.stalled_time},
                {"session_time", r.stats.session_time},
                {"highest_bitrate", r.stats.highest_bitrate},
                {"stalls", stalls}};
  j["mos"] = {{"stall", r.mos.stall},
              {"quality", r.mos.quality},
              {"combined", r.mos.combined}};
  j["cellular_bytes"] = r.cellular_bytes;
  j["energy"] = {{"energy_mwh", r.energy.energy_mwh},
                 {"avg_mw", r.energy.avg_mw},
                 {"battery_hours", r.energy.battery_hours}};
  json states = json::object();
  for (std::size_t i = 0; i < kPowerStateCount; ++i) {
    states[std::string(power_state_name(static_cast<PowerState>(i)))] =
        r.seconds_in_state[i];
  }
  j["seconds_in_state"] = states;
  j["disconnected_seconds"] = r.disconnected_seconds;

  json events = json::array();
  for (const auto& e : r.events) {
    events.push_back({e.t, event_name(e.event), path_name(e.path)});
  }
  j["events"] = events;
  json segs = json::array();
  for (const auto& s : r.segments) {
    segs.push_back({s.index, s.request_t, s.bitrate, s.completion_t});
  }
  j["segments"] = segs;
  json preds = json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({p.t, p.p_loss, decision_name(p.decision)});
  }
  j["predictions"] = preds;
  json tel = json::array();
  for (const auto& t : r.telemetry) {
    tel.push_back({t.t, t.wifi_capacity, t.cell_capacity, t.delivered,
                   t.cellular_bytes_cum, t.buffer});
  }
  j["telemetry_columns"] = {"t",         "wifi_capacity",      "cell_capacity",
                            "delivered", "cellular_bytes_cum", "buffer"};
  j["telemetry"] = tel;
  return j.dump() + "\n";
}

SessionReport report_from_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kReportFormat) {
      throw SchemaError("not a session report");
    }
    if (field(j, "format_version").get<int>() != kReportFormatVersion) {
      throw SchemaError("unsupported report version");
    }
    SessionReport r;
    r.scenario = field(j, "scenario").get<int>();
    r.mode = mode_from_name(field(j, "mode").get<std::string>());
    r.repetition = field(j, "repetition").get<int>();
    r.seed = field(j, "seed").get<std::uint64_t>();
    r.duration = field(j, "duration").get<double>();

    const auto& st = field(j, "stats");
    r.stats.stall_count = field(st, "stall_count").get<std::size_t>();
    r.stats.mean_stall_len = field(st, "mean_stall_len").get<double>();
    r.stats.adaptation_count = field(st, "adaptation_count").get<std::size_t>();
    r.stats.hq_fraction = field(st, "hq_fraction").get<double>();
    r.stats.initial_stall_len = field(st, "initial_stall_len").get<double>();
    r.stats.played_time = field(st, "played_time").get<double>();
    r.stats.stalled_time = field(st, "stalled_time").get<double>();
    r.stats.session_time = field(st, "session_time").get<double>();
    r.stats.highest_bitrate = field(st, "highest_bitrate").get<double>();
    for (const auto& s : field(st, "stalls")) {
      r.stats.stalls.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    }
    const auto& mos = field(j, "mos");
    r.mos = {field(mos, "stall").get<double>(), field(mos, "quality").get<double>(),
             field(mos, "combined").get<double>()};
    r.cellular_bytes = field(j, "cellular_bytes").get<double>();
    const auto& en = field(j, "energy");
    r.energy = {field(en, "energy_mwh").get<double>(),
                field(en, "avg_mw").get<double>(),
                field(en, "battery_hours").get<double>()};
    const auto& states = field(j, "seconds_in_state");
    for (std::size_t i = 0; i < kPowerStateCount; ++i) {
      const std::string name(power_state_name(static_cast<PowerState>(i)));
      r.seconds_in_state[i] = field(states, name.c_str()).get<double>();
    }
    r.disconnected_seconds = field(j, "disconnected_seconds").get<double>();
    for (const auto& e : field(j, "events")) {
      EventRecord rec;
      rec.t = e.at(0).get<double>();
      rec.event = event_from_name(e.at(1).get<std::string>());
      const auto p = e.at(2).get<std::string>();
      bool found = false;
      for (auto a : {ActivePath::kWifiOnly, ActivePath::kDual,
                     ActivePath::kCellOnly, ActivePath::kDisconnected}) {
        if (path_name(a) == p) {
          rec.path = a;
          found = true;
        }
      }
      if (!found) throw SchemaError("unknown path '" + p + "'");
      r.events.push_back(rec);
    }
    for (const auto& s : field(j, "segments")) {
      r.segments.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>(),
                            s.at(2).get<double>(), s.at(3).get<double>()});
    }
    for (const auto& p : field(j, "predictions")) {
      r.predictions.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                               decision_from_name(p.at(2).get<std::string>())});
    }
    for (const auto& t : field(j, "telemetry")) {
      r.telemetry.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                             t.at(2).get<double>(), t.at(3).get<double>(),
                             t.at(4).get<double>(), t.at(5).get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
}

void save_report(const SessionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report " + path.string());
  out << report_to_text(report);
  if (!out) throw IoError("write failed for " + path.string());
}

SessionReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_text(buf.str());
}

std::string format_runs_csv(std::span<const SessionReport> reports) {
  std::ostringstream out;
  out << "scenario,mode,repetition,seed,stalls,mean_stall_s,adaptations,"
         "hq_fraction,cellular_mb,mos_stall,mos_quality,mos_combined,"
         "energy_mwh,avg_mw,battery_hours\n";
  for (const auto& r : reports) {
    out << r.scenario << ',' << mode_name(r.mode) << ',' << r.repetition << ','
        << r.seed << ',' << r.stats.stall_count << ','
        << fmt(r.stats.mean_stall_len) << ',' << r.stats.adaptation_count << ','
        << fmt(r.stats.hq_fraction) << ',' << fmt(r.cellular_bytes / 1e6) << ','
        << fmt(r.mos.stall) << ',' << fmt(r.mos.quality) << ','
        << fmt(r.mos.combined) << ',' << fmt(r.energy.energy_mwh) << ','
        << fmt(r.energy.avg_mw) << ',' << fmt(r.energy.battery_hours) << '\n';
  }
  return out.str();
}

std::string format_summary_csv(std::span<const SessionReport> reports) {
  struct Acc {
    std::size_t n = 0;
    double stalls = 0, stall_len = 0, adaptations = 0, hq = 0, cell_mb = 0;
    double mos_s = 0, mos_q = 0, mos_c = 0, energy = 0, avg_mw = 0, hours = 0;
  };
  std::map<std::pair<int, int>, Acc> groups;
  for (const auto& r : reports) {
    auto& a = groups[{r.scenario, static_cast<int>(r.mode)}];
    ++a.n;
    a.stalls += static_cast<double>(r.stats.stall_count);
    a.stall_len += r.stats.mean_stall_len;
    a.adaptations += static_cast<double>(r.stats.adaptation_count);
    a.hq += r.stats.hq_fraction;
    a.cell_mb += r.cellular_bytes / 1e6;
    a.mos_s += r.mos.stall;
    a.mos_q += r.mos.quality;
    a.mos_c += r.mos.combined;
    a.energy += r.energy.energy_mwh;
    a.avg_mw += r.energy.avg_mw;
    a.hours += r.energy.battery_hours;
  }
  std::ostringstream out;
  out << "scenario,mode,runs,stalls,mean_stall_s,adaptations,hq_pct,"
         "cellular_mb,mos_stall,mos_quality,mos_combined,energy_mwh,avg_mw,"
         "battery_hours\n";
  for (const auto& [key, a] : groups) {
    const double n = static_cast<double>(a.n);
    out << key.first << ','
        << mode_name(static_cast<ConnectivityMode>(key.second)) << ',' << a.n
        << ',' << fmt(a.stalls / n) << ',' << fmt(a.stall_len / n) << ','
        << fmt(a.adaptations / n) << ',' << fmt(100.0 * a.hq / n) << ','
        << fmt(a.cell_mb / n) << ',' << fmt(a.mos_s / n) << ','
        << fmt(a.mos_q / n) << ',' << fmt(a.mos_c / n) << ','
        << fmt(a.energy / n) << ',' << fmt(a.avg_mw / n) << ','
        << fmt(a.hours / n) << '\n';
  }
  return out.str();
}

std::string format_mos_csv(std::span<const SessionReport> reports) {
  std::ostringstream out;
  out << "mode,scenario,repetition,mos_stall,mos_quality,mos_combined\n";
  for (const auto& r : reports) {
    out << mode_name(r.mode) << ',' << r.scenario << ',' << r.repetition << ','
        << fmt(r.mos.stall) << ',' << fmt(r.mos.quality) << ','
        << fmt(r.mos.combined) << '\n';
  }
  return out.str();
}

std::string format_telemetry_csv(const SessionReport& report) {
  std::ostringstream out;
  out << "t,wifi_capacity,cell_capacity,delivered,cellular_bytes_cum,buffer\n";
  for (const auto& t : report.telemetry) {
    out << fmt(t.t) << ',' << fmt(t.wifi_capacity) << ','
        << fmt(t.cell_capacity) << ',' << fmt(t.delivered) << ','
        << fmt(t.cellular_bytes_cum) << ',' << fmt(t.buffer) << '\n';
  }
  return out.str();
}

}  // namespace predho
