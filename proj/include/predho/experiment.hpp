#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "predho/bundle.hpp"
#include "predho/metrics.hpp"
#include "predho/session.hpp"

namespace predho {

inline constexpr int kRunConfigVersion = 1;

// Synthetic training population: per user one route of scenario 1, 2 and
// 4, plus a scenario-3 staircase that ends in a Wi-Fi loss.
struct CorpusConfig {
  int users = 8;
  double playback_lead = 30.0;
  // The staircase route is short; its loss must fall after the first
  // observation window or it contributes no LOSS windows at all.
  double stairs_lead = 75.0;
  double max_landing = 10.0;  // staircase landing times spread over [0, this]

  void validate() const;
};

struct RunConfig {
  std::uint64_t seed = 7;
  std::vector<int> scenarios = {1, 2, 3, 4};
  std::vector<ConnectivityMode> modes = {ConnectivityMode::kStock,
                                         ConnectivityMode::kAlwaysMptcp,
                                         ConnectivityMode::kSeamless};
  int repetitions = 5;
  std::filesystem::path output_dir = "out";
  int jobs = 1;

  FeatureConfig features;
  CorpusConfig corpus;

  Architecture architecture = Architecture::kNN1;
  TrainConfig train;
  bool split_by_user = false;
  double train_frac = 0.7;
  std::vector<std::string> test_users;

  SimConfig sim;

  void validate() const;
};

// Versioned JSON config. Unknown keys are rejected so typos surface.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_text(const RunConfig& config);

// Seed of the trace for (scenario, repetition).
std::uint64_t trace_seed(std::uint64_t root, int scenario, int repetition);
SensorTrace scenario_trace(const RunConfig& config, int scenario,
                           int repetition);
std::string trace_file_name(int scenario, int repetition);

Dataset build_corpus(const CorpusConfig& corpus, const FeatureConfig& features,
                     std::uint64_t seed);

struct TrainOutcome {
  ModelBundle bundle;
  EvalReport report;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Split per the config, train, evaluate on the held-out part.
TrainOutcome train_and_evaluate(const Dataset& dataset,
                                const RunConfig& config);

EvalReport evaluate_bundle(const ModelBundle& bundle, const Dataset& dataset);

// gen: one trace CSV per (scenario, repetition) under output_dir/traces.
std::vector<std::filesystem::path> cmd_gen(const RunConfig& config);

// features: the corpus (or the given traces) as output_dir/dataset.csv.
std::filesystem::path cmd_features(
    const RunConfig& config,
    const std::vector<std::filesystem::path>& traces = {});

// train: bundle written to output_dir/model.json.
TrainOutcome cmd_train(const RunConfig& config,
                       const std::filesystem::path& dataset_csv);

// All (scenario, mode, repetition) sessions, in sorted key order. Uses
// config.jobs worker threads; the result does not depend on it.
std::vector<SessionReport> run_experiment(const RunConfig& config,
                                          const ModelBundle* bundle);

// sim: reports, runs.csv, summary.csv, mos_by_mode_scenario.csv and
// telemetry/telemetry_<run>.csv under output_dir.
std::vector<SessionReport> cmd_sim(
    const RunConfig& config, const std::optional<std::filesystem::path>& bundle);

// report: reloads output_dir/reports/*.json and rewrites the aggregates.
std::vector<SessionReport> cmd_report(const std::filesystem::path& dir);

std::string format_eval_report(const EvalReport& report);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace predho
