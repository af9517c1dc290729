#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "predho/features.hpp"

namespace predho {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Multi-layer perceptron for the binary LOSS/STABLE task: rectifier hidden
// layers and a single logistic output giving p_loss.
struct MlpModel {
  std::vector<DenseLayer> layers;
  double final_training_loss = 0.0;

  // He-style uniform init, limit sqrt(6 / fan_in); biases zero.
  static MlpModel initialize(std::span<const std::size_t> layer_sizes,
                             std::uint64_t seed);

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_size() const;
  double forward(std::span<const double> x) const;
  // Row-wise forward over a batch (samples x features).
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& x) const;
};

struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double loss = 0.0;  // mean BCE + 0.5 * l2 * sum(w^2)
};

// Mean binary cross-entropy (plus 0.5 * l2 * ||W||^2) of a batch with
// rows as samples and labels in {0, 1}, 1 = LOSS.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y, double l2);

// Exact backprop gradient of mlp_loss. Throws NumericError naming the layer
// on non-finite activations.
MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, double l2);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
  bool balance = true;  // forest only: downsample the majority class

  void validate() const;
};

// Mini-batch SGD on an already-scaled dataset. hidden lists the hidden
// layer widths; input and output sizes come from the data.
MlpModel mlp_train(const Dataset& scaled, std::span<const std::size_t> hidden,
                   const TrainConfig& config);

// Dataset as (samples x features) matrix and 0/1 LOSS label vector.
Eigen::MatrixXd to_matrix(const Dataset& dataset);
Eigen::VectorXd to_labels(const Dataset& dataset);

}  // namespace predho
