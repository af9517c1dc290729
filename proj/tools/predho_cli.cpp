#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "predho/experiment.hpp"

namespace fs = std::filesystem;
using namespace predho;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

// Flag values; unset ones leave the config file's value alone.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<int> scenarios;
  std::vector<std::string> modes;
  std::optional<int> repetitions;
  std::optional<std::string> feature_set;
  std::optional<std::string> architecture;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
  std::optional<std::string> split;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{}
                                      : load_run_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  c.train.seed = c.seed;
  if (!o.scenarios.empty()) c.scenarios = o.scenarios;
  if (!o.modes.empty()) {
    c.modes.clear();
    for (const auto& m : o.modes) c.modes.push_back(mode_from_name(m));
  }
  if (o.repetitions) c.repetitions = *o.repetitions;
  if (o.feature_set) c.features.feature_set = feature_set_from_name(*o.feature_set);
  if (o.architecture) c.architecture = architecture_from_name(*o.architecture);
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.split) {
    if (*o.split != "random" && *o.split != "user") {
      throw ConfigError("--split must be random or user");
    }
    c.split_by_user = *o.split == "user";
  }
  c.validate();
  return c;
}

void print_predictions(const std::vector<Prediction>& preds) {
  std::cout << "t,p_loss,decision\n";
  for (const auto& p : preds) {
    std::cout << format_double(p.t) << ',' << format_double(p.p_loss) << ','
              << decision_name(p.decision) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predictive Wi-Fi/cellular handover experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("-c,--config", o.config_path, "JSON run config")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "root seed");
  app.add_option("--scenarios", o.scenarios, "scenario ids (1-4)");
  app.add_option("--modes", o.modes, "Stock, MPTCP, Seamless");
  app.add_option("--repetitions", o.repetitions);
  app.add_option("--feature-set", o.feature_set, "full or reduced");
  app.add_option("--architecture", o.architecture, "NN1, NN2, NN3 or forest");
  app.add_option("-o,--output-dir", o.output_dir);
  app.add_option("-j,--jobs", o.jobs, "parallel sessions");
  app.add_option("--split", o.split, "random or user");

  auto* gen = app.add_subcommand("gen", "write scenario traces");

  auto* features = app.add_subcommand("features", "build a windowed dataset");
  std::vector<std::string> trace_files;
  features->add_option("traces", trace_files,
                       "trace CSVs (default: the synthetic corpus)");

  auto* train = app.add_subcommand("train", "train a model bundle");
  std::string train_dataset;
  train->add_option("--dataset", train_dataset,
                    "dataset CSV (default: <output-dir>/dataset.csv)");

  auto* eval = app.add_subcommand("eval", "evaluate a bundle");
  std::string eval_model;
  std::string eval_dataset;
  std::string eval_trace;
  double eval_threshold = 0.5;
  eval->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  auto* eval_ds_opt = eval->add_option("--dataset", eval_dataset,
                                       "print precision/recall on a dataset");
  auto* eval_tr_opt = eval->add_option(
      "--trace", eval_trace, "stream t,p_loss,decision for a trace CSV");
  eval_ds_opt->excludes(eval_tr_opt);
  eval->add_option("--threshold", eval_threshold);

  auto* sim = app.add_subcommand("sim", "run streaming sessions");
  std::string sim_model;
  sim->add_option("--model", sim_model, "bundle, needed for Seamless");

  auto* report = app.add_subcommand("report", "rebuild CSVs from reports");
  std::string report_dir;
  report->add_option("--dir", report_dir, "default: <output-dir>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (*gen) {
      const auto paths = cmd_gen(cfg);
      std::cout << "wrote " << paths.size() << " traces to "
                << (cfg.output_dir / "traces").string() << '\n';
    } else if (*features) {
      std::vector<fs::path> traces(trace_files.begin(), trace_files.end());
      const auto path = cmd_features(cfg, traces);
      std::cout << "wrote " << path.string() << '\n';
    } else if (*train) {
      const fs::path ds = train_dataset.empty()
                              ? cfg.output_dir / "dataset.csv"
                              : fs::path(train_dataset);
      const auto out = cmd_train(cfg, ds);
      std::cout << "architecture," << architecture_name(cfg.architecture)
                << "\ntrain_windows," << out.train_size << "\ntest_windows,"
                << out.test_size << '\n'
                << format_eval_report(out.report);
    } else if (*eval) {
      const ModelBundle bundle = load_bundle(eval_model);
      if (!eval_trace.empty()) {
        print_predictions(
            predict_trace(bundle, load_trace_csv(eval_trace), eval_threshold));
      } else {
        const fs::path ds = eval_dataset.empty()
                                ? cfg.output_dir / "dataset.csv"
                                : fs::path(eval_dataset);
        const Dataset data = load_dataset_csv(ds, bundle.config);
        std::vector<double> p;
        std::vector<Label> labels;
        for (const auto& w : data.windows) {
          p.push_back(bundle.predict(w.values));
          labels.push_back(w.label);
        }
        std::cout << format_eval_report(evaluate(p, labels, eval_threshold));
      }
    } else if (*sim) {
      std::optional<fs::path> model;
      if (!sim_model.empty()) model = sim_model;
      const auto reports = cmd_sim(cfg, model);
      std::cout << "wrote " << reports.size() << " session reports\n"
                << read_text_file(cfg.output_dir / "summary.csv");
    } else if (*report) {
      const fs::path dir = report_dir.empty() ? cfg.output_dir : fs::path(report_dir);
      cmd_report(dir);
      std::cout << read_text_file(dir / "summary.csv");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SchemaError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const EmptyTraceError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return 0;
}
