#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "faultrank/common.hpp"
#include "faultrank/learners.hpp"
#include "rng.hpp"
#include "tree_builder.hpp"

namespace faultrank::learners {

using detail::BinnedColumns;
using detail::Criterion;
using detail::Rng;
using detail::TreeParams;
using detail::TreeTargets;

namespace {

void check_input(const FeatureMatrix& x, ModelKind kind, const TrainConfig& cfg) {
  cfg.validate(kind);
  x.validate();
  if (x.n_rows == 0) throw InputError(std::string(to_string(kind)) + " needs at least one row");
}

std::vector<double> label_vector(const FeatureMatrix& x) {
  std::vector<double> y(x.n_rows);
  for (std::size_t i = 0; i < x.n_rows; ++i) y[i] = x.labels[i] ? 1.0 : 0.0;
  return y;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

TrainedModel shell(ModelKind kind, const FeatureMatrix& x, const TrainConfig& cfg) {
  TrainedModel m;
  m.kind = kind;
  m.config = cfg;
  m.n_features = x.n_cols;
  return m;
}

enum class Sampling { Bootstrap, Full };

TrainedModel forest(ModelKind kind, const FeatureMatrix& x, const TrainConfig& cfg, Sampling sampling,
                    std::size_t max_features, bool random_thresholds) {
  check_input(x, kind, cfg);
  const BinnedColumns data = BinnedColumns::build(x);
  const std::vector<double> y = label_vector(x);
  TreeParams params;
  params.criterion = Criterion::Gini;
  params.max_depth = cfg.max_depth.value_or(-1);
  params.max_features = max_features;
  params.random_thresholds = random_thresholds;

  TrainedModel m = shell(kind, x, cfg);
  std::vector<double> w(x.n_rows), wy(x.n_rows);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows;
    if (sampling == Sampling::Bootstrap) {
      w = detail::bootstrap_weights(x.n_rows, rng);
      for (std::size_t i = 0; i < x.n_rows; ++i) {
        if (w[i] > 0.0) rows.push_back(i);
      }
    } else {
      std::fill(w.begin(), w.end(), 1.0);
      rows = all_rows(x.n_rows);
    }
    for (std::size_t i = 0; i < x.n_rows; ++i) wy[i] = w[i] * y[i];
    TreeTargets targets{w, wy, x.labels};
    m.trees.push_back(detail::grow_tree(data, std::move(rows), targets, params, &rng));
  }
  return m;
}

}  // namespace

namespace detail {

std::vector<double> bootstrap_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) w[rng.index(n)] += 1.0;
  return w;
}

}  // namespace detail

TrainedModel train_decision_tree(const FeatureMatrix& x, const TrainConfig& cfg) {
  check_input(x, ModelKind::Tree, cfg);
  const BinnedColumns data = BinnedColumns::build(x);
  std::vector<double> w(x.n_rows, 1.0);
  std::vector<double> y = label_vector(x);
  TreeParams params;
  params.max_depth = cfg.max_depth.value_or(-1);
  TrainedModel m = shell(ModelKind::Tree, x, cfg);
  m.trees.push_back(detail::grow_tree(data, all_rows(x.n_rows), TreeTargets{w, y, x.labels}, params,
                                      nullptr));
  return m;
}

TrainedModel train_bagging(const FeatureMatrix& x, const TrainConfig& cfg) {
  return forest(ModelKind::Bagging, x, cfg, Sampling::Bootstrap, 0, false);
}

TrainedModel train_random_forest(const FeatureMatrix& x, const TrainConfig& cfg) {
  return forest(ModelKind::RandomForest, x, cfg, Sampling::Bootstrap, features_per_split(x.n_cols),
                false);
}

TrainedModel train_extra_trees(const FeatureMatrix& x, const TrainConfig& cfg) {
  return forest(ModelKind::ExtraTrees, x, cfg, Sampling::Full, features_per_split(x.n_cols), true);
}

TrainedModel train_adaboost(const FeatureMatrix& x, const TrainConfig& cfg) {
  check_input(x, ModelKind::AdaBoost, cfg);
  std::size_t pos = 0;
  for (auto l : x.labels) pos += l ? 1 : 0;
  if (pos == 0 || pos == x.n_rows) {
    throw InputError("AdaBoost needs both classes in the training labels");
  }
  const BinnedColumns data = BinnedColumns::build(x);
  const std::vector<double> y = label_vector(x);
  const std::size_t n = x.n_rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), wy(n);
  std::vector<std::uint8_t> wrong(n);
  TreeParams params;
  params.max_depth = cfg.max_depth.value_or(1);

  TrainedModel m = shell(ModelKind::AdaBoost, x, cfg);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) wy[i] = w[i] * y[i];
    Tree stump = detail::grow_tree(data, all_rows(n), TreeTargets{w, wy, x.labels}, params, nullptr);
    for (auto& node : stump.nodes) {
      if (node.feature < 0) node.value = node.value >= 0.5 ? 1.0 : -1.0;
    }
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool predicted = stump.predict(x.row(i)) > 0.0;
      wrong[i] = predicted != (x.labels[i] != 0);
      if (wrong[i]) err += w[i];
      total += w[i];
    }
    err /= total;
    const bool floored = err <= 1e-10;
    if (floored) err = 1e-10;
    double alpha = std::log((1.0 - err) / err);
    if (!(alpha > 0.0)) break;
    m.trees.push_back(std::move(stump));
    m.tree_weights.push_back(alpha);
    if (floored) break;
    double factor = std::exp(alpha), norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= factor;
      norm += w[i];
    }
    for (auto& v : w) v /= norm;
  }
  return m;
}

}  // namespace faultrank::learners
