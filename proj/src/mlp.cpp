#include "predho/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace predho {
namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void check_finite(const Eigen::MatrixXd& m, std::size_t layer) {
  if (!m.allFinite()) {
    throw NumericError("non-finite activation in layer " +
                       std::to_string(layer));
  }
}

double l2_penalty(const MlpModel& model, double l2) {
  if (l2 == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& layer : model.layers) s += layer.weights.squaredNorm();
  return 0.5 * l2 * s;
}

// Forward pass keeping every layer's activations; the last entry holds the
// output logits.
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& model,
                                         const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = acts.back() * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    // Checked before the rectifier, which would hide -inf and NaN.
    check_finite(z, l);
    if (l + 1 < model.layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

MlpModel MlpModel::initialize(std::span<const std::size_t> layer_sizes,
                              std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ConfigError("an MLP needs at least input and output sizes");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ConfigError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  MlpModel m;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t in = layer_sizes[l];
    const std::size_t out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out),
                         static_cast<Eigen::Index>(in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::vector<std::size_t> MlpModel::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<std::size_t>(layers.front().weights.cols()));
  for (const auto& l : layers) {
    sizes.push_back(static_cast<std::size_t>(l.weights.rows()));
  }
  return sizes;
}

std::size_t MlpModel::input_size() const {
  return layers.empty() ? 0
                        : static_cast<std::size_t>(layers.front().weights.cols());
}

double MlpModel::forward(std::span<const double> x) const {
  if (x.size() != input_size()) {
    throw SchemaError("MLP expects " + std::to_string(input_size()) +
                      " inputs, got " + std::to_string(x.size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::VectorXd z = layers[l].weights * a + layers[l].bias;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return logistic(a(0));
}

Eigen::VectorXd MlpModel::forward_batch(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = x(i, j);
    }
    out(i) = forward(row);
  }
  return out;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y, double l2) {
  const auto acts = forward_all(model, x);
  const Eigen::MatrixXd& z = acts.back();
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    s += softplus(z(i, 0)) - y(i) * z(i, 0);
  }
  return s / static_cast<double>(x.rows()) + l2_penalty(model, l2);
}

MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, double l2) {
  if (x.rows() == 0) throw Error("gradient of an empty batch");
  if (x.cols() != static_cast<Eigen::Index>(model.input_size())) {
    throw SchemaError("batch width does not match the model input");
  }
  const auto acts = forward_all(model, x);
  const double n = static_cast<double>(x.rows());
  const std::size_t n_layers = model.layers.size();

  MlpGradient g;
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);

  // dL/dz at the output: (sigmoid(z) - y) / n.
  const Eigen::MatrixXd& logits = acts.back();
  Eigen::MatrixXd delta(logits.rows(), 1);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double z = logits(i, 0);
    delta(i, 0) = (logistic(z) - y(i)) / n;
    loss += softplus(z) - y(i) * z;
  }
  g.loss = loss / n + l2_penalty(model, l2);

  for (std::size_t l = n_layers; l-- > 0;) {
    const Eigen::MatrixXd& input = acts[l];
    g.weights[l] = delta.transpose() * input;
    if (l2 != 0.0) g.weights[l] += l2 * model.layers[l].weights;
    g.biases[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd back = delta * model.layers[l].weights;
    // Rectifier derivative of the previous layer's output.
    delta = back.cwiseProduct(
        (input.array() > 0.0).cast<double>().matrix());
  }
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
}

Eigen::MatrixXd to_matrix(const Dataset& dataset) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const auto d = static_cast<Eigen::Index>(
      dataset.empty() ? 0 : dataset.windows.front().values.size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = dataset.windows[static_cast<std::size_t>(i)].values;
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(j)];
  }
  return m;
}

Eigen::VectorXd to_labels(const Dataset& dataset) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) =
        dataset.windows[i].label == Label::kLoss ? 1.0 : 0.0;
  }
  return y;
}

MlpModel mlp_train(const Dataset& scaled, std::span<const std::size_t> hidden,
                   const TrainConfig& config) {
  config.validate();
  if (scaled.empty()) throw Error("cannot train on an empty dataset");
  const Eigen::MatrixXd x = to_matrix(scaled);
  const Eigen::VectorXd y = to_labels(scaled);

  std::vector<std::size_t> sizes;
  sizes.push_back(static_cast<std::size_t>(x.cols()));
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  MlpModel model =
      MlpModel::initialize(sizes, derive_seed(config.seed, "init"));

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle"));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<Eigen::Index>(config.batch_size);

  Eigen::MatrixXd bx;
  Eigen::VectorXd by;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Eigen::Index start = 0; start < x.rows(); start += bs) {
      const Eigen::Index len = std::min(bs, x.rows() - start);
      bx.resize(len, x.cols());
      by.resize(len);
      for (Eigen::Index i = 0; i < len; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        bx.row(i) = x.row(src);
        by(i) = y(src);
      }
      MlpGradient g;
      try {
        g = mlp_gradient(model, bx, by, config.l2);
      } catch (const NumericError& e) {
        throw NumericError(std::string("training diverged (") + e.what() +
                           "); try a smaller learning rate");
      }
      if (!std::isfinite(g.loss)) {
        throw NumericError(
            "training loss became non-finite; try a smaller learning rate");
      }
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l].weights -= config.learning_rate * g.weights[l];
        model.layers[l].bias -= config.learning_rate * g.biases[l];
      }
    }
  }
  model.final_training_loss = mlp_loss(model, x, y, config.l2);
  if (!std::isfinite(model.final_training_loss)) {
    throw NumericError(
        "training loss became non-finite; try a smaller learning rate");
  }
  return model;
}

}  // namespace predho
