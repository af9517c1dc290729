#include "predho/bundle.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace predho {
namespace {

using nlohmann::json;

constexpr std::string_view kBundleFormat = "predho-model-bundle";

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = m(r, c);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, std::size_t rows,
                                 std::size_t cols) {
  if (!j.is_array() || j.size() != rows) {
    throw SchemaError("weight matrix has the wrong number of rows");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw SchemaError("weight matrix has the wrong number of columns");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c].get<double>();
    }
  }
  return m;
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("bundle is missing '") + key + "'");
  }
  return *it;
}

json mlp_to_json(const MlpModel& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    std::vector<double> bias(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"weights", matrix_to_json(l.weights)}, {"bias", bias}});
  }
  return {{"type", "mlp"},
          {"layer_sizes", m.layer_sizes()},
          {"hidden_activation", "relu"},
          {"output_activation", "logistic"},
          {"final_training_loss", m.final_training_loss},
          {"layers", layers}};
}

MlpModel mlp_from_json(const json& j) {
  const auto sizes = require(j, "layer_sizes").get<std::vector<std::size_t>>();
  const auto& layers = require(j, "layers");
  if (sizes.size() < 2 || layers.size() + 1 != sizes.size()) {
    throw SchemaError("layer_sizes inconsistent with layers");
  }
  MlpModel m;
  m.final_training_loss = j.value("final_training_loss", 0.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.weights =
        matrix_from_json(require(layers[l], "weights"), sizes[l + 1], sizes[l]);
    const auto bias = require(layers[l], "bias").get<std::vector<double>>();
    if (bias.size() != sizes[l + 1]) throw SchemaError("bias length mismatch");
    layer.bias = Eigen::Map<const Eigen::VectorXd>(
        bias.data(), static_cast<Eigen::Index>(bias.size()));
    m.layers.push_back(std::move(layer));
  }
  return m;
}

json forest_to_json(const ForestModel& f) {
  json trees = json::array();
  for (const auto& t : f.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back(json::array(
          {n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]}));
    }
    trees.push_back(std::move(nodes));
  }
  return {{"type", "forest"},
          {"criterion", "gini"},
          {"n_features", f.n_features},
          {"node_layout", {"feature", "threshold", "left", "right",
                           "stable_count", "loss_count"}},
          {"trees", trees}};
}

ForestModel forest_from_json(const json& j) {
  ForestModel f;
  f.n_features = require(j, "n_features").get<std::size_t>();
  for (const auto& jt : require(j, "trees")) {
    DecisionTree t;
    for (const auto& jn : jt) {
      if (!jn.is_array() || jn.size() != 6) {
        throw SchemaError("tree node must have 6 fields");
      }
      TreeNode n;
      n.feature = jn[0].get<int>();
      n.threshold = jn[1].get<double>();
      n.left = jn[2].get<int>();
      n.right = jn[3].get<int>();
      n.counts = {jn[4].get<std::uint32_t>(), jn[5].get<std::uint32_t>()};
      t.nodes.push_back(n);
    }
    const auto size = static_cast<int>(t.nodes.size());
    if (size == 0) throw SchemaError("empty tree");
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        if (n.counts[0] + n.counts[1] == 0) {
          throw SchemaError("leaf without class counts");
        }
        continue;
      }
      if (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size ||
          static_cast<std::size_t>(n.feature) >= f.n_features) {
        throw SchemaError("tree node references out of range");
      }
    }
    f.trees.push_back(std::move(t));
  }
  if (f.trees.empty()) throw SchemaError("forest has no trees");
  return f;
}

}  // namespace

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::kNN1:
      return "NN1";
    case Architecture::kNN2:
      return "NN2";
    case Architecture::kNN3:
      return "NN3";
    case Architecture::kForest:
      break;
  }
  return "forest";
}

Architecture architecture_from_name(std::string_view name) {
  if (name == "NN1" || name == "nn1") return Architecture::kNN1;
  if (name == "NN2" || name == "nn2") return Architecture::kNN2;
  if (name == "NN3" || name == "nn3") return Architecture::kNN3;
  if (name == "forest") return Architecture::kForest;
  throw ConfigError("unknown architecture '" + std::string(name) +
                    "' (expected NN1, NN2, NN3 or forest)");
}

std::vector<std::size_t> hidden_layers(Architecture arch) {
  switch (arch) {
    case Architecture::kNN1:
      return {100};
    case Architecture::kNN2:
      return {300, 200, 100};
    case Architecture::kNN3:
      return {400, 400, 400, 400, 400};
    case Architecture::kForest:
      break;
  }
  return {};
}

double ModelBundle::predict_scaled(std::span<const double> scaled) const {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>) {
          return m.forward(scaled);
        } else {
          return m.predict(scaled);
        }
      },
      model);
}

double ModelBundle::predict(std::span<const double> raw) const {
  return predict_scaled(scaler.apply(raw));
}

std::vector<std::string> ModelBundle::feature_order() const {
  std::vector<std::string> names;
  for (SensorKind k : feature_kinds(config.feature_set)) {
    names.emplace_back(kind_name(k));
  }
  return names;
}

ModelBundle train_bundle(const Dataset& train, Architecture arch,
                         const TrainConfig& config) {
  train.validate();
  ModelBundle b;
  b.architecture = arch;
  b.config = train.config;
  b.scaler = fit_scaler(train);
  if (arch == Architecture::kForest) {
    b.model = forest_train(apply_scaler(b.scaler, train), config);
  } else {
    const auto hidden = hidden_layers(arch);
    b.model = mlp_train(apply_scaler(b.scaler, train), hidden, config);
  }
  return b;
}

std::string bundle_to_text(const ModelBundle& bundle) {
  json j;
  j["format"] = kBundleFormat;
  j["format_version"] = kBundleFormatVersion;
  j["architecture"] = architecture_name(bundle.architecture);
  j["feature_config"] = {
      {"sampling_rate", bundle.config.sampling_rate},
      {"observation_window", bundle.config.observation_window},
      {"prediction_window", bundle.config.prediction_window},
      {"feature_set", feature_set_name(bundle.config.feature_set)}};
  j["feature_order"] = bundle.feature_order();
  j["scaler"] = {{"mean", bundle.scaler.mean}, {"scale", bundle.scaler.scale}};
  j["model"] = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>) {
          return mlp_to_json(m);
        } else {
          return forest_to_json(m);
        }
      },
      bundle.model);
  return j.dump(1) + "\n";
}

ModelBundle bundle_from_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("bundle is not valid JSON (truncated?): ") +
                      e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kBundleFormat) {
      throw SchemaError("not a model bundle");
    }
    const int version = require(j, "format_version").get<int>();
    if (version != kBundleFormatVersion) {
      throw SchemaError("unsupported bundle version " +
                        std::to_string(version) + " (expected " +
                        std::to_string(kBundleFormatVersion) + ")");
    }
    ModelBundle b;
    b.architecture =
        architecture_from_name(require(j, "architecture").get<std::string>());
    const auto& fc = require(j, "feature_config");
    b.config.sampling_rate = require(fc, "sampling_rate").get<double>();
    b.config.observation_window =
        require(fc, "observation_window").get<double>();
    b.config.prediction_window = require(fc, "prediction_window").get<double>();
    b.config.feature_set =
        feature_set_from_name(require(fc, "feature_set").get<std::string>());
    b.config.validate();
    if (require(j, "feature_order").get<std::vector<std::string>>() !=
        b.feature_order()) {
      throw SchemaError("feature_order does not match the feature set");
    }
    const auto& sc = require(j, "scaler");
    b.scaler.mean = require(sc, "mean").get<std::vector<double>>();
    b.scaler.scale = require(sc, "scale").get<std::vector<double>>();
    const std::size_t d = b.config.vector_length();
    if (b.scaler.mean.size() != d || b.scaler.scale.size() != d) {
      throw SchemaError("scaler length does not match the feature vector");
    }
    for (double s : b.scaler.scale) {
      if (!(s > 0.0)) throw SchemaError("scaler scale entries must be > 0");
    }
    const auto& jm = require(j, "model");
    const std::string type = require(jm, "type").get<std::string>();
    if (type == "mlp") {
      auto m = mlp_from_json(jm);
      if (m.input_size() != d || m.layer_sizes().back() != 1) {
        throw SchemaError("MLP shape does not match the feature vector");
      }
      b.model = std::move(m);
    } else if (type == "forest") {
      auto f = forest_from_json(jm);
      if (f.n_features != d) {
        throw SchemaError("forest width does not match the feature vector");
      }
      b.model = std::move(f);
    } else {
      throw SchemaError("unknown model type '" + type + "'");
    }
    return b;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed bundle: ") + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write bundle " + path.string());
  out << bundle_to_text(bundle);
  if (!out) throw IoError("write failed for " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bundle " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return bundle_from_text(buf.str());
}

}  // namespace predho
