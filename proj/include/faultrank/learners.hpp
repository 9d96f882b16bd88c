#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "faultrank/features.hpp"

namespace faultrank::learners {

/// Declaration order is the tie-break order for best-model selection.
enum class ModelKind {
  Logistic,
  Tree,
  Bagging,
  RandomForest,
  ExtraTrees,
  AdaBoost,
  GradientBoosting,
  NewtonBoosting,
};

inline constexpr std::array<ModelKind, 8> kAllModelKinds = {
    ModelKind::Logistic,   ModelKind::Tree,     ModelKind::Bagging,          ModelKind::RandomForest,
    ModelKind::ExtraTrees, ModelKind::AdaBoost, ModelKind::GradientBoosting, ModelKind::NewtonBoosting};

/// LOGISTIC, TREE, ... as used in files and on the command line.
std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);
/// Column heading for human-readable reports.
std::string_view display_name(ModelKind kind);

struct TrainConfig {
  int n_estimators = 100;
  double learning_rate = 0.1;
  /// Unset: 3 for gradient/Newton boosting, unlimited for trees and forests.
  std::optional<int> max_depth;
  double l2_lambda = 1.0;      // Newton boosting leaf regularizer
  double logistic_l2 = 0.001;  // ridge penalty on logistic weights
  std::uint64_t seed = 42;
  int logistic_max_iterations = 5000;
  double logistic_tolerance = 1e-6;  // gradient-norm stopping threshold

  /// Throws InputError when a field violates its constraint for `kind`.
  void validate(ModelKind kind) const;
  bool operator==(const TrainConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

struct TrainedModel {
  ModelKind kind = ModelKind::Logistic;
  TrainConfig config;
  std::size_t n_features = 0;
  // Logistic: score = sigmoid(weights . x + intercept)
  std::vector<double> weights;
  double intercept = 0.0;
  // Boosting: raw score = base_score + sum of (pre-scaled) tree outputs
  double base_score = 0.0;
  std::vector<Tree> trees;
  std::vector<double> tree_weights;  // AdaBoost stage weights
  bool operator==(const TrainedModel&) const = default;
};

/// Weighted Gini impurity 1 - p^2 - (1-p)^2 of a node with the given
/// positive and total weight (0 for an empty node).
double gini_impurity(double positive_weight, double total_weight);

TrainedModel train_logistic(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_decision_tree(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_bagging(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_random_forest(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_extra_trees(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_adaboost(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_gradient_boosting(const FeatureMatrix& x, const TrainConfig& cfg);
TrainedModel train_newton_boosting(const FeatureMatrix& x, const TrainConfig& cfg);

TrainedModel train(ModelKind kind, const FeatureMatrix& x, const TrainConfig& cfg);

/// One score in [0,1] per row. Throws InputError on a width mismatch.
std::vector<double> predict_score(const TrainedModel& model, const FeatureMatrix& rows);
double predict_score(const TrainedModel& model, std::span<const double> row);

/// Features examined per split by random forests and extra trees.
std::size_t features_per_split(std::size_t n_features);

/// Logistic loss gradient/hessian with respect to the raw score, as used by
/// the boosters (gradient = p - y, hessian = p (1 - p)).
void logistic_gradients(std::span<const double> raw, std::span<const double> labels,
                        std::span<double> grad, std::span<double> hess);
/// Mean logistic loss of raw scores.
double logistic_loss(std::span<const double> raw, std::span<const double> labels);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace faultrank::learners
