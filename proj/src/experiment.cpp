#include "predho/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace predho {
namespace {

using nlohmann::json;

// Reads known keys out of a JSON object and complains about the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be an object");
  }
  ~Section() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + " has the wrong type");
    }
  }
  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("unknown config key '" + name_ + "." + it.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::string user_name(int u) { return "u" + std::to_string(u); }

}  // namespace

void CorpusConfig::validate() const {
  if (users < 1) throw ConfigError("corpus.users must be >= 1");
  if (!(playback_lead >= 0.0)) {
    throw ConfigError("corpus.playback_lead must be >= 0");
  }
  if (!(stairs_lead >= 0.0)) throw ConfigError("corpus.stairs_lead must be >= 0");
  if (!(max_landing >= 0.0)) throw ConfigError("corpus.max_landing must be >= 0");
}

void RunConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (scenarios.empty()) throw ConfigError("scenarios must not be empty");
  for (int s : scenarios) {
    if (s < 1 || s > 4) throw ConfigError("scenario ids must be in 1..4");
  }
  if (modes.empty()) throw ConfigError("modes must not be empty");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("train_frac must be in (0, 1)");
  }
  if (split_by_user && test_users.empty()) {
    throw ConfigError("by-user split needs test_users");
  }
  features.validate();
  corpus.validate();
  train.validate();
  sim.validate();
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(j, "config");
  int version = 0;
  top.get("version", version);
  if (version != kRunConfigVersion) {
    throw ConfigError("config version must be " +
                      std::to_string(kRunConfigVersion));
  }
  top.get("seed", c.seed);
  top.get("scenarios", c.scenarios);
  std::vector<std::string> modes;
  top.get("modes", modes);
  if (!modes.empty()) {
    c.modes.clear();
    for (const auto& m : modes) c.modes.push_back(mode_from_name(m));
  }
  top.get("repetitions", c.repetitions);
  std::string out = c.output_dir.string();
  top.get("output_dir", out);
  c.output_dir = out;
  top.get("jobs", c.jobs);

  if (const json* f = top.child("features")) {
    Section s(*f, "features");
    s.get("sampling_rate", c.features.sampling_rate);
    s.get("observation_window", c.features.observation_window);
    s.get("prediction_window", c.features.prediction_window);
    std::string set(feature_set_name(c.features.feature_set));
    s.get("feature_set", set);
    c.features.feature_set = feature_set_from_name(set);
    s.finish();
  }
  if (const json* f = top.child("corpus")) {
    Section s(*f, "corpus");
    s.get("users", c.corpus.users);
    s.get("playback_lead", c.corpus.playback_lead);
    s.get("stairs_lead", c.corpus.stairs_lead);
    s.get("max_landing", c.corpus.max_landing);
    s.finish();
  }
  if (const json* f = top.child("train")) {
    Section s(*f, "train");
    std::string arch(architecture_name(c.architecture));
    s.get("architecture", arch);
    c.architecture = architecture_from_name(arch);
    s.get("learning_rate", c.train.learning_rate);
    s.get("batch_size", c.train.batch_size);
    s.get("epochs", c.train.epochs);
    s.get("l2", c.train.l2);
    s.get("balance", c.train.balance);
    std::string split = c.split_by_user ? "user" : "random";
    s.get("split", split);
    if (split != "random" && split != "user") {
      throw ConfigError("train.split must be random or user");
    }
    c.split_by_user = split == "user";
    s.get("train_frac", c.train_frac);
    s.get("test_users", c.test_users);
    s.finish();
  }
  if (const json* f = top.child("sim")) {
    Section s(*f, "sim");
    std::string sched(scheduler_name(c.sim.scheduler));
    s.get("scheduler", sched);
    c.sim.scheduler = scheduler_from_name(sched);
    s.get("tick", c.sim.tick);
    s.get("threshold", c.sim.threshold);
    s.get("establish_delay", c.sim.handover.establish_delay);
    s.get("detection_delay", c.sim.handover.detection_delay);
    s.get("stable_seconds", c.sim.handover.stable_seconds);
    s.get("cellular_peak", c.sim.path.cellular_peak);
    s.get("ramp_time", c.sim.path.ramp_time);
    s.get("goodput_fraction", c.sim.path.goodput_fraction);
    s.get("segment_len", c.sim.stream.segment_len);
    s.get("bitrates", c.sim.stream.bitrates);
    s.get("buffer_capacity", c.sim.stream.buffer_capacity);
    s.get("down_threshold", c.sim.stream.down_threshold);
    s.get("up_threshold", c.sim.stream.up_threshold);
    s.finish();
  }
  top.finish();
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_text(const RunConfig& c) {
  json j;
  j["version"] = kRunConfigVersion;
  j["seed"] = c.seed;
  j["scenarios"] = c.scenarios;
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.emplace_back(mode_name(m));
  j["modes"] = modes;
  j["repetitions"] = c.repetitions;
  j["output_dir"] = c.output_dir.string();
  j["jobs"] = c.jobs;
  j["features"] = {{"sampling_rate", c.features.sampling_rate},
                   {"observation_window", c.features.observation_window},
                   {"prediction_window", c.features.prediction_window},
                   {"feature_set", feature_set_name(c.features.feature_set)}};
  j["corpus"] = {{"users", c.corpus.users},
                 {"playback_lead", c.corpus.playback_lead},
                 {"stairs_lead", c.corpus.stairs_lead},
                 {"max_landing", c.corpus.max_landing}};
  j["train"] = {{"architecture", architecture_name(c.architecture)},
                {"learning_rate", c.train.learning_rate},
                {"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs},
                {"l2", c.train.l2},
                {"balance", c.train.balance},
                {"split", c.split_by_user ? "user" : "random"},
                {"train_frac", c.train_frac},
                {"test_users", c.test_users}};
  j["sim"] = {{"scheduler", scheduler_name(c.sim.scheduler)},
              {"tick", c.sim.tick},
              {"threshold", c.sim.threshold},
              {"establish_delay", c.sim.handover.establish_delay},
              {"detection_delay", c.sim.handover.detection_delay},
              {"stable_seconds", c.sim.handover.stable_seconds},
              {"cellular_peak", c.sim.path.cellular_peak},
              {"ramp_time", c.sim.path.ramp_time},
              {"goodput_fraction", c.sim.path.goodput_fraction},
              {"segment_len", c.sim.stream.segment_len},
              {"bitrates", c.sim.stream.bitrates},
              {"buffer_capacity", c.sim.stream.buffer_capacity},
              {"down_threshold", c.sim.stream.down_threshold},
              {"up_threshold", c.sim.stream.up_threshold}};
  return j.dump(2) + "\n";
}

std::uint64_t trace_seed(std::uint64_t root, int scenario, int repetition) {
  return derive_seed(root, "trace/s" + std::to_string(scenario) + "/r" +
                               std::to_string(repetition));
}

SensorTrace scenario_trace(const RunConfig& config, int scenario,
                           int repetition) {
  ScenarioSpec spec;
  spec.scenario_id = scenario;
  spec.seed = trace_seed(config.seed, scenario, repetition);
  return generate_scenario(spec);
}

std::string trace_file_name(int scenario, int repetition) {
  return "scenario" + std::to_string(scenario) + "_rep" +
         std::to_string(repetition) + ".csv";
}

Dataset build_corpus(const CorpusConfig& corpus, const FeatureConfig& features,
                     std::uint64_t seed) {
  corpus.validate();
  features.validate();
  Dataset ds;
  ds.config = features;
  for (int u = 0; u < corpus.users; ++u) {
    const std::string user = user_name(u);
    const double landing =
        corpus.users == 1 ? 0.0 : corpus.max_landing * u / (corpus.users - 1);
    for (int s = 1; s <= 4; ++s) {
      ScenarioSpec spec;
      spec.scenario_id = s;
      spec.playback_lead = corpus.playback_lead;
      spec.seed = derive_seed(seed, "corpus/" + user + "/s" + std::to_string(s));
      if (s == 3) {
        spec.playback_lead = corpus.stairs_lead;
        spec.stairs_exit = true;
        spec.landing_seconds = landing;
      }
      ds.append(windows_from_trace(generate_scenario(spec), features, user));
    }
  }
  return ds;
}

EvalReport evaluate_bundle(const ModelBundle& bundle, const Dataset& dataset) {
  if (!(dataset.config == bundle.config)) {
    throw SchemaError("dataset feature config differs from the bundle's");
  }
  std::vector<double> p;
  std::vector<Label> labels;
  p.reserve(dataset.size());
  for (const auto& w : dataset.windows) {
    p.push_back(bundle.predict(w.values));
    labels.push_back(w.label);
  }
  return evaluate(p, labels, 0.5);
}

TrainOutcome train_and_evaluate(const Dataset& dataset,
                                const RunConfig& config) {
  dataset.validate();
  SplitMode mode = RandomSplit{config.train_frac,
                               derive_seed(config.seed, "split")};
  if (config.split_by_user) mode = ByUserSplit{config.test_users};
  auto parts = split(dataset, mode);
  if (parts.train.empty() || parts.test.empty()) {
    throw ConfigError("dataset too small for the requested split");
  }
  const auto n_loss = parts.train.count(Label::kLoss);
  if (n_loss == 0 || n_loss == parts.train.size()) {
    throw ConfigError("training split needs both LOSS and STABLE windows");
  }
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  TrainOutcome out;
  out.bundle = train_bundle(parts.train, config.architecture, tc);
  out.report = evaluate_bundle(out.bundle, parts.test);
  out.train_size = parts.train.size();
  out.test_size = parts.test.size();
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::filesystem::path> cmd_gen(const RunConfig& config) {
  config.validate();
  std::vector<std::filesystem::path> paths;
  const auto dir = config.output_dir / "traces";
  for (int s : config.scenarios) {
    for (int r = 0; r < config.repetitions; ++r) {
      const auto path = dir / trace_file_name(s, r);
      write_text_file(path, format_trace_csv(scenario_trace(config, s, r)));
      paths.push_back(path);
    }
  }
  return paths;
}

std::filesystem::path cmd_features(
    const RunConfig& config, const std::vector<std::filesystem::path>& traces) {
  config.validate();
  Dataset ds;
  if (traces.empty()) {
    ds = build_corpus(config.corpus, config.features, config.seed);
  } else {
    ds.config = config.features;
    for (const auto& p : traces) {
      ds.append(windows_from_trace(load_trace_csv(p), config.features,
                                   p.stem().string()));
    }
  }
  const auto path = config.output_dir / "dataset.csv";
  std::filesystem::create_directories(config.output_dir);
  save_dataset_csv(ds, path);
  return path;
}

TrainOutcome cmd_train(const RunConfig& config,
                       const std::filesystem::path& dataset_csv) {
  config.validate();
  const Dataset ds = load_dataset_csv(dataset_csv, config.features);
  TrainOutcome out = train_and_evaluate(ds, config);
  std::filesystem::create_directories(config.output_dir);
  save_bundle(out.bundle, config.output_dir / "model.json");
  return out;
}

std::vector<SessionReport> run_experiment(const RunConfig& config,
                                          const ModelBundle* bundle) {
  config.validate();
  struct Job {
    int scenario;
    ConnectivityMode mode;
    int repetition;
  };
  std::vector<Job> jobs;
  std::vector<int> scenarios = config.scenarios;
  std::sort(scenarios.begin(), scenarios.end());
  scenarios.erase(std::unique(scenarios.begin(), scenarios.end()),
                  scenarios.end());
  std::vector<ConnectivityMode> modes = config.modes;
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  for (int s : scenarios) {
    for (auto m : modes) {
      if (m == ConnectivityMode::kSeamless && bundle == nullptr) {
        throw ConfigError("Seamless mode needs a model bundle");
      }
      for (int r = 0; r < config.repetitions; ++r) jobs.push_back({s, m, r});
    }
  }

  std::vector<SessionReport> reports(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        const SensorTrace trace =
            scenario_trace(config, job.scenario, job.repetition);
        SessionReport rep =
            job.mode == ConnectivityMode::kSeamless
                ? run_session(trace, job.mode, config.sim, *bundle)
                : run_session(trace, job.mode, config.sim);
        rep.scenario = job.scenario;
        rep.repetition = job.repetition;
        rep.seed = trace_seed(config.seed, job.scenario, job.repetition);
        reports[i] = std::move(rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(
      static_cast<std::size_t>(config.jobs), std::max<std::size_t>(1, jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return reports;
}

namespace {

void write_aggregates(const std::filesystem::path& dir,
                      const std::vector<SessionReport>& reports) {
  write_text_file(dir / "runs.csv", format_runs_csv(reports));
  write_text_file(dir / "summary.csv", format_summary_csv(reports));
  write_text_file(dir / "mos_by_mode_scenario.csv", format_mos_csv(reports));
}

}  // namespace

std::vector<SessionReport> cmd_sim(
    const RunConfig& config,
    const std::optional<std::filesystem::path>& bundle_path) {
  std::optional<ModelBundle> bundle;
  if (bundle_path) {
    if (!std::filesystem::exists(*bundle_path)) {
      throw IoError("model bundle not found: " + bundle_path->string());
    }
    bundle = load_bundle(*bundle_path);
  }
  auto reports = run_experiment(config, bundle ? &*bundle : nullptr);
  const auto& dir = config.output_dir;
  for (const auto& r : reports) {
    write_text_file(dir / "reports" / (r.run_id() + ".json"), report_to_text(r));
    write_text_file(dir / "telemetry" / ("telemetry_" + r.run_id() + ".csv"),
                    format_telemetry_csv(r));
  }
  write_aggregates(dir, reports);
  return reports;
}

std::vector<SessionReport> cmd_report(const std::filesystem::path& dir) {
  const auto reports_dir = dir / "reports";
  if (!std::filesystem::is_directory(reports_dir)) {
    throw IoError("no reports directory under " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(reports_dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::vector<SessionReport> reports;
  for (const auto& f : files) reports.push_back(load_report(f));
  std::sort(reports.begin(), reports.end(),
            [](const SessionReport& a, const SessionReport& b) {
              return std::tie(a.scenario, a.mode, a.repetition) <
                     std::tie(b.scenario, b.mode, b.repetition);
            });
  write_aggregates(dir, reports);
  return reports;
}

std::string format_eval_report(const EvalReport& r) {
  std::ostringstream out;
  out << "class,precision,recall\n"
      << "LOSS," << format_double(r.loss_precision) << ','
      << format_double(r.loss_recall) << '\n'
      << "STABLE," << format_double(r.stable_precision) << ','
      << format_double(r.stable_recall) << '\n'
      << "f1_loss," << format_double(r.f1_loss) << '\n'
      << "accuracy," << format_double(r.accuracy) << '\n'
      << "confusion tp/fp/fn/tn," << r.tp << '/' << r.fp << '/' << r.fn << '/'
      << r.tn << '\n';
  return out.str();
}

}  // namespace predho
