#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "predho/experiment.hpp"
#include "predho/predictor.hpp"

namespace py = pybind11;
using namespace predho;

namespace {

py::array_t<double> to_array(const Dataset& d) {
  const std::size_t n = d.size();
  const std::size_t m = n ? d.windows[0].values.size() : d.config.vector_length();
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(m)});
  auto buf = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) buf(i, j) = d.windows[i].values[j];
  }
  return out;
}

py::array_t<std::int8_t> labels_of(const Dataset& d) {
  py::array_t<std::int8_t> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(d.size())});
  auto buf = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < d.size(); ++i) {
    buf(i) = d.windows[i].label == Label::kLoss ? 1 : 0;
  }
  return out;
}

py::tuple dataset_tuple(const Dataset& d) {
  std::vector<double> ends;
  for (const auto& w : d.windows) ends.push_back(w.end_time);
  return py::make_tuple(to_array(d), labels_of(d), ends, d.users);
}

FeatureConfig feature_config(const std::string& feature_set) {
  FeatureConfig c;
  c.feature_set = feature_set_from_name(feature_set);
  return c;
}

py::dict report_dict(const SessionReport& r) {
  py::dict d;
  d["scenario"] = r.scenario;
  d["mode"] = std::string(mode_name(r.mode));
  d["repetition"] = r.repetition;
  d["stall_count"] = r.stats.stall_count;
  d["mean_stall_len"] = r.stats.mean_stall_len;
  d["adaptations"] = r.stats.adaptation_count;
  d["hq_fraction"] = r.stats.hq_fraction;
  d["initial_stall_len"] = r.stats.initial_stall_len;
  d["cellular_bytes"] = r.cellular_bytes;
  d["mos_stall"] = r.mos.stall;
  d["mos_quality"] = r.mos.quality;
  d["mos_combined"] = r.mos.combined;
  d["energy_mwh"] = r.energy.energy_mwh;
  d["avg_mw"] = r.energy.avg_mw;
  d["battery_hours"] = r.energy.battery_hours;
  d["disconnected_seconds"] = r.disconnected_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wi-Fi loss prediction and MPTCP handover simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<EmptyTraceError>(m, "EmptyTraceError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<InsufficientHistoryError>(m, "InsufficientHistoryError",
                                                   base.ptr());

  m.def("derive_seed", &derive_seed, py::arg("root"), py::arg("label"));
  m.def("format_double", &format_double);

  py::class_<SensorTrace>(m, "SensorTrace")
      .def_property_readonly("duration", &SensorTrace::duration)
      .def_property_readonly("n_samples",
                             [](const SensorTrace& t) { return t.samples().size(); })
      .def("wifi_available_at", &SensorTrace::wifi_available_at)
      .def("loss_events", [](const SensorTrace& t) { return wifi_loss_events(t); })
      .def("to_csv", [](const SensorTrace& t) { return format_trace_csv(t); })
      .def("__eq__", [](const SensorTrace& a, const SensorTrace& b) { return a == b; });

  m.def(
      "generate_scenario",
      [](int scenario, std::uint64_t seed, double playback_lead, bool stairs_exit) {
        ScenarioSpec spec;
        spec.scenario_id = scenario;
        spec.seed = seed;
        spec.playback_lead = playback_lead;
        spec.stairs_exit = stairs_exit;
        return generate_scenario(spec);
      },
      py::arg("scenario"), py::arg("seed") = 0, py::arg("playback_lead") = 120.0,
      py::arg("stairs_exit") = false);
  m.def("parse_trace_csv", &parse_trace_csv, py::arg("text"));
  m.def("load_trace_csv", &load_trace_csv, py::arg("path"));

  m.def(
      "windows",
      [](const SensorTrace& t, const std::string& feature_set, const std::string& user) {
        return dataset_tuple(windows_from_trace(t, feature_config(feature_set), user));
      },
      py::arg("trace"), py::arg("feature_set") = "reduced", py::arg("user") = "u0",
      "(X, y, end_times, users) with y = 1 for LOSS windows");
  m.def(
      "build_corpus",
      [](int users, std::uint64_t seed, const std::string& feature_set) {
        CorpusConfig c;
        c.users = users;
        return dataset_tuple(build_corpus(c, feature_config(feature_set), seed));
      },
      py::arg("users") = 8, py::arg("seed") = 7, py::arg("feature_set") = "reduced");

  m.def("mos_stall", &mos_stall, py::arg("mean_stall_len"), py::arg("stall_count"));
  m.def("mos_quality", &mos_quality, py::arg("hq_fraction"));
  m.def("mos_combined", &mos_combined, py::arg("stall"), py::arg("quality"));
  m.def(
      "battery_hours",
      [](double avg_mw) { return battery_hours(avg_mw, PowerModel{}); },
      py::arg("avg_mw"));
  m.def("overhead_percent", &overhead_percent, py::arg("a"), py::arg("b"));
  m.def("evaluate",
        [](const std::vector<double>& p, const std::vector<int>& y, double threshold) {
          std::vector<Label> labels;
          for (int v : y) labels.push_back(v ? Label::kLoss : Label::kStable);
          const auto r = evaluate(p, labels, threshold);
          py::dict d;
          d["tp"] = r.tp;
          d["fp"] = r.fp;
          d["fn"] = r.fn;
          d["tn"] = r.tn;
          d["precision"] = r.loss_precision;
          d["recall"] = r.loss_recall;
          d["f1"] = r.f1_loss;
          d["accuracy"] = r.accuracy;
          return d;
        },
        py::arg("p_loss"), py::arg("labels"), py::arg("threshold") = 0.5);

  py::class_<ModelBundle>(m, "ModelBundle")
      .def_property_readonly("architecture",
                             [](const ModelBundle& b) {
                               return std::string(architecture_name(b.architecture));
                             })
      .def_property_readonly("vector_length",
                             [](const ModelBundle& b) { return b.config.vector_length(); })
      .def("feature_order", &ModelBundle::feature_order)
      .def("predict",
           [](const ModelBundle& b, py::array_t<double, py::array::forcecast> x) -> py::object {
             if (x.ndim() == 1) {
               const auto v = x.unchecked<1>();
               std::vector<double> row(static_cast<std::size_t>(v.shape(0)));
               for (py::ssize_t j = 0; j < v.shape(0); ++j) row[j] = v(j);
               return py::float_(b.predict(row));
             }
             if (x.ndim() != 2) throw SchemaError("predict expects a 1-D or 2-D array");
             const auto v = x.unchecked<2>();
             py::array_t<double> out(std::vector<py::ssize_t>{v.shape(0)});
             auto o = out.mutable_unchecked<1>();
             std::vector<double> row(static_cast<std::size_t>(v.shape(1)));
             for (py::ssize_t i = 0; i < v.shape(0); ++i) {
               for (py::ssize_t j = 0; j < v.shape(1); ++j) row[j] = v(i, j);
               o(i) = b.predict(row);
             }
             return out;
           })
      .def("to_text", [](const ModelBundle& b) { return bundle_to_text(b); })
      .def("save", [](const ModelBundle& b, const std::filesystem::path& p) { save_bundle(b, p); });
  m.def("bundle_from_text", &bundle_from_text);
  m.def("load_bundle", &load_bundle);
  m.def(
      "train",
      [](int users, std::uint64_t seed, const std::string& architecture,
         std::size_t epochs) {
        RunConfig c;
        c.seed = seed;
        c.train.seed = seed;
        c.corpus.users = users;
        c.architecture = architecture_from_name(architecture);
        c.train.epochs = epochs;
        const auto out = train_and_evaluate(
            build_corpus(c.corpus, c.features, c.seed), c);
        return py::make_tuple(out.bundle, out.report.loss_precision,
                              out.report.loss_recall);
      },
      py::arg("users") = 8, py::arg("seed") = 7, py::arg("architecture") = "NN1",
      py::arg("epochs") = 30,
      "Train on the synthetic corpus; returns (bundle, precision, recall) on the held-out 30 %");

  m.def(
      "predict_trace",
      [](const ModelBundle& b, const SensorTrace& t, double threshold) {
        std::vector<std::tuple<double, double, std::string>> out;
        for (const auto& p : predict_trace(b, t, threshold)) {
          out.emplace_back(p.t, p.p_loss, std::string(decision_name(p.decision)));
        }
        return out;
      },
      py::arg("bundle"), py::arg("trace"), py::arg("threshold") = 0.5);

  m.def(
      "run_session",
      [](const SensorTrace& t, const std::string& mode, const ModelBundle* bundle) {
        const auto md = mode_from_name(mode);
        const SimConfig cfg;
        if (md == ConnectivityMode::kSeamless) {
          if (!bundle) throw ConfigError("Seamless mode needs a model bundle");
          return report_dict(run_session(t, md, cfg, *bundle));
        }
        return report_dict(run_session(t, md, cfg));
      },
      py::arg("trace"), py::arg("mode"), py::arg("bundle") = nullptr);

  m.def(
      "run_experiment",
      [](const std::string& config_json, const ModelBundle* bundle) {
        const RunConfig c = parse_run_config(config_json);
        std::vector<SessionReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_experiment(c, bundle);
        }
        py::list rows;
        for (const auto& r : reports) rows.append(report_dict(r));
        return py::make_tuple(rows, format_summary_csv(reports));
      },
      py::arg("config_json") = "{\"version\": 1}", py::arg("bundle") = nullptr,
      "Returns (per-run dicts, summary CSV text)");
}
