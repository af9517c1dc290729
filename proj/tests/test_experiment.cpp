#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "predho/experiment.hpp"

using namespace predho;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("predho_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string cli() {
  const char* p = std::getenv("PREDHO_CLI");
  return p ? p : "";
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = cli() + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

// LOSS windows shift one feature block upwards; everything else is noise.
Dataset separable(std::size_t n, std::uint64_t seed) {
  Dataset d;
  const std::size_t len = d.config.vector_length();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureWindow w;
    w.end_time = static_cast<double>(i);
    w.label = i % 3 == 0 ? Label::kLoss : Label::kStable;
    w.values.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      w.values[k] = noise(rng) + (w.label == Label::kLoss && k < 60 ? 1.5 : 0.0);
    }
    d.add(std::move(w), "u" + std::to_string(i % 4));
  }
  return d;
}

}  // namespace

TEST(RunConfigText, DefaultsRoundTrip) {
  const RunConfig c;
  const auto back = parse_run_config(run_config_to_text(c));
  EXPECT_EQ(run_config_to_text(back), run_config_to_text(c));
}

TEST(RunConfigText, Overrides) {
  const auto c = parse_run_config(R"({"version": 1, "seed": 11, "repetitions": 2,
      "scenarios": [3], "modes": ["Stock"], "train": {"architecture": "forest"},
      "sim": {"threshold": 0.7}})");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.train.seed, 11u);
  EXPECT_EQ(c.repetitions, 2);
  EXPECT_EQ(c.scenarios, std::vector<int>{3});
  EXPECT_EQ(c.modes.size(), 1u);
  EXPECT_EQ(c.architecture, Architecture::kForest);
  EXPECT_EQ(c.sim.threshold, 0.7);
}

TEST(RunConfigText, Rejections) {
  EXPECT_THROW(parse_run_config(R"({"version": 1, "sede": 3})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 1, "sim": {"tik": 0.1}})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 2})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"seed": 3})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 1, "repetitions": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 1, "seed": "x"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"version": 1, "scenarios": [5]})"), ConfigError);
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/cfg.json"), IoError);
}

TEST(Experiment, GenIsDeterministic) {
  RunConfig c;
  c.output_dir = scratch("gen_a");
  const auto a = cmd_gen(c);
  ASSERT_EQ(a.size(), 20u);
  c.output_dir = scratch("gen_b");
  const auto b = cmd_gen(c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].filename(), b[i].filename());
    EXPECT_EQ(read_text_file(a[i]), read_text_file(b[i]));
  }
  EXPECT_NE(read_text_file(a[0]), read_text_file(a[1]));
}

TEST(Experiment, CorpusHasBothClasses) {
  RunConfig c;
  c.corpus.users = 2;
  const auto d = build_corpus(c.corpus, c.features, c.seed);
  EXPECT_GT(d.count(Label::kLoss), 0u);
  EXPECT_GT(d.count(Label::kStable), d.count(Label::kLoss));
  EXPECT_EQ(d.users.size(), d.size());
}

TEST(Experiment, TinyDatasetRejected) {
  RunConfig c;
  auto d = separable(1, 1);
  EXPECT_THROW(train_and_evaluate(d, c), ConfigError);
  Dataset stable_only;
  for (int i = 0; i < 20; ++i) {
    FeatureWindow w;
    w.values.assign(stable_only.config.vector_length(), 0.0);
    w.label = Label::kStable;
    stable_only.add(w, "u");
  }
  EXPECT_THROW(train_and_evaluate(stable_only, c), ConfigError);
}

TEST(Experiment, SeparableDataLearned) {
  RunConfig c;
  c.train.epochs = 15;
  const auto out = train_and_evaluate(separable(450, 3), c);
  EXPECT_GE(out.report.loss_precision, 0.9);
  EXPECT_GE(out.report.loss_recall, 0.9);
  EXPECT_EQ(out.train_size + out.test_size, 450u);
  c.split_by_user = true;
  c.test_users = {"u3"};
  const auto by_user = train_and_evaluate(separable(450, 3), c);
  EXPECT_EQ(by_user.test_size, 112u);
}

TEST(Experiment, RunNeedsBundleForSeamless) {
  RunConfig c;
  EXPECT_THROW(run_experiment(c, nullptr), ConfigError);
  c.modes = {ConnectivityMode::kStock, ConnectivityMode::kAlwaysMptcp};
  c.scenarios = {2};
  c.repetitions = 2;
  const auto reps = run_experiment(c, nullptr);
  ASSERT_EQ(reps.size(), 4u);
  EXPECT_EQ(reps[0].mode, ConnectivityMode::kStock);
  EXPECT_EQ(reps[0].repetition, 0);
  EXPECT_EQ(reps[1].repetition, 1);
  EXPECT_EQ(reps[0].seed, trace_seed(c.seed, 2, 0));
}

TEST(Experiment, JobsDoNotChangeResults) {
  RunConfig c;
  c.modes = {ConnectivityMode::kStock, ConnectivityMode::kAlwaysMptcp};
  c.repetitions = 2;
  const auto serial = run_experiment(c, nullptr);
  c.jobs = 4;
  const auto parallel = run_experiment(c, nullptr);
  EXPECT_EQ(format_summary_csv(serial), format_summary_csv(parallel));
  EXPECT_EQ(format_runs_csv(serial), format_runs_csv(parallel));
}

TEST(Experiment, SimAndReportPipeline) {
  RunConfig c;
  c.output_dir = scratch("pipeline");
  c.corpus.users = 2;
  c.train.epochs = 5;
  const auto ds = cmd_features(c);
  ASSERT_TRUE(fs::exists(ds));
  const auto trained = cmd_train(c, ds);
  ASSERT_TRUE(fs::exists(c.output_dir / "model.json"));
  const auto reps = cmd_sim(c, c.output_dir / "model.json");
  EXPECT_EQ(reps.size(), 60u);
  const std::string summary = read_text_file(c.output_dir / "summary.csv");
  EXPECT_TRUE(fs::exists(c.output_dir / "telemetry" / "telemetry_s1_Seamless_r0.csv"));
  EXPECT_TRUE(fs::exists(c.output_dir / "mos_by_mode_scenario.csv"));
  fs::remove(c.output_dir / "summary.csv");
  const auto reloaded = cmd_report(c.output_dir);
  EXPECT_EQ(reloaded.size(), 60u);
  EXPECT_EQ(read_text_file(c.output_dir / "summary.csv"), summary);
  EXPECT_THROW(cmd_sim(c, c.output_dir / "missing.json"), IoError);
  (void)trained;
}

TEST(Cli, ExitCodes) {
  ASSERT_FALSE(cli().empty()) << "PREDHO_CLI not set";
  const auto dir = scratch("cli");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("--help", log), 0);
  EXPECT_EQ(run_cli("", log), 2);
  EXPECT_EQ(run_cli("--bogus gen", log), 2);
  EXPECT_EQ(run_cli("--repetitions 0 -o " + dir.string() + " gen", log), 2);
  {
    std::ofstream(dir / "bad.json") << R"({"version": 1, "colour": 1})";
  }
  EXPECT_EQ(run_cli("-c " + (dir / "bad.json").string() + " gen", log), 2);
  {
    std::ofstream(dir / "bad.csv") << "t,kind,value\n0,rssi,abc\n";
  }
  EXPECT_EQ(run_cli("-o " + dir.string() + " features " + (dir / "bad.csv").string(), log), 3);
  EXPECT_EQ(run_cli("-o " + dir.string() + " sim --model " + (dir / "none.json").string(), log), 3);
  EXPECT_EQ(run_cli("-o " + dir.string() + " --scenarios 2 --repetitions 1 gen", log), 0);
  EXPECT_TRUE(fs::exists(dir / "traces"));
}

TEST(Cli, TrainThenSimMatchesLibrary) {
  ASSERT_FALSE(cli().empty());
  const auto dir = scratch("cli_pipeline");
  const auto log = dir / "log.txt";
  {
    std::ofstream(dir / "cfg.json") << R"({"version": 1, "scenarios": [1, 3],
        "repetitions": 2, "corpus": {"users": 2}, "train": {"epochs": 5}})";
  }
  const std::string base = "-c " + (dir / "cfg.json").string() + " -o " + dir.string();
  ASSERT_EQ(run_cli(base + " features", log), 0) << read_text_file(log);
  ASSERT_EQ(run_cli(base + " train", log), 0) << read_text_file(log);
  ASSERT_EQ(run_cli(base + " sim --model " + (dir / "model.json").string(), log), 0)
      << read_text_file(log);

  RunConfig c = load_run_config(dir / "cfg.json");
  const ModelBundle bundle = load_bundle(dir / "model.json");
  const auto reps = run_experiment(c, &bundle);
  EXPECT_EQ(format_summary_csv(reps), read_text_file(dir / "summary.csv"));

  ASSERT_EQ(run_cli(base + " eval --model " + (dir / "model.json").string() +
                        " --trace " + (dir / "traces_missing.csv").string(),
                    log),
            3);
}

TEST(RunConfigText, ShippedDefaultMatchesBuiltIn) {
  const auto c = load_run_config(fs::path(PREDHO_SOURCE_DIR) / "configs" / "default.json");
  EXPECT_EQ(run_config_to_text(c), run_config_to_text(RunConfig{}));
}
