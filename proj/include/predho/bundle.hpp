#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "predho/features.hpp"
#include "predho/forest.hpp"
#include "predho/mlp.hpp"

namespace predho {

enum class Architecture { kNN1, kNN2, kNN3, kForest };

std::string_view architecture_name(Architecture arch);
Architecture architecture_from_name(std::string_view name);
// NN1 (100), NN2 (300, 200, 100), NN3 (400 x 5); empty for the forest.
std::vector<std::size_t> hidden_layers(Architecture arch);

inline constexpr int kBundleFormatVersion = 1;

// Everything inference needs: feature layout, normalization and model.
struct ModelBundle {
  Architecture architecture = Architecture::kNN1;
  FeatureConfig config;
  Scaler scaler;
  std::variant<MlpModel, ForestModel> model;

  // p_loss for an unscaled feature vector.
  double predict(std::span<const double> raw) const;
  double predict_scaled(std::span<const double> scaled) const;
  std::vector<std::string> feature_order() const;
};

// Fits the scaler on `train`, then trains the requested architecture.
ModelBundle train_bundle(const Dataset& train, Architecture arch,
                         const TrainConfig& config);

// Versioned JSON document. Doubles are written in shortest round-trip form
// so a reloaded bundle predicts bit-identically.
std::string bundle_to_text(const ModelBundle& bundle);
ModelBundle bundle_from_text(std::string_view text);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace predho
