#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "faultrank/common.hpp"
#include "faultrank/kernels.hpp"
#include "faultrank/learners.hpp"
#include "tree_builder.hpp"

namespace faultrank::learners {

using detail::BinnedColumns;
using detail::Criterion;
using detail::TreeParams;
using detail::TreeTargets;

namespace {

std::size_t leaf_of(const Tree& tree, std::span<const double> row) {
  std::size_t k = 0;
  while (tree.nodes[k].feature >= 0) {
    const auto& nd = tree.nodes[k];
    k = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return k;
}

// One Newton-Raphson step per leaf on the squared-error tree's partition.
void newton_leaf_values(Tree& tree, const FeatureMatrix& x, std::span<const double> resid,
                        std::span<const double> hess) {
  std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    std::size_t k = leaf_of(tree, x.row(i));
    num[k] += resid[i];
    den[k] += hess[i];
  }
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    if (tree.nodes[k].feature < 0) tree.nodes[k].value = den[k] > 0.0 ? num[k] / den[k] : 0.0;
  }
}

double prior_log_odds(const FeatureMatrix& x) {
  double pos = 0.0;
  for (auto l : x.labels) pos += l ? 1.0 : 0.0;
  double rate = std::clamp(pos / static_cast<double>(x.n_rows), 1e-6, 1.0 - 1e-6);
  return std::log(rate / (1.0 - rate));
}

TrainedModel boost(ModelKind kind, const FeatureMatrix& x, const TrainConfig& cfg) {
  cfg.validate(kind);
  x.validate();
  if (x.n_rows == 0) throw InputError(std::string(to_string(kind)) + " needs at least one row");
  const std::size_t n = x.n_rows;
  const BinnedColumns data = BinnedColumns::build(x);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x.labels[i] ? 1.0 : 0.0;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  TreeParams params;
  params.max_depth = cfg.max_depth.value_or(3);
  params.criterion = kind == ModelKind::NewtonBoosting ? Criterion::Newton : Criterion::SquaredError;
  params.l2_lambda = kind == ModelKind::NewtonBoosting ? cfg.l2_lambda : 0.0;

  TrainedModel m;
  m.kind = kind;
  m.config = cfg;
  m.n_features = x.n_cols;
  m.base_score = prior_log_odds(x);

  std::vector<double> raw(n, m.base_score), grad(n), hess(n), ones(n, 1.0), resid(n);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    kernels::logistic_grad_hess(raw, y, grad, hess);
    TreeTargets targets;
    if (kind == ModelKind::NewtonBoosting) {
      targets = TreeTargets{hess, grad, x.labels};
    } else {
      for (std::size_t i = 0; i < n; ++i) resid[i] = -grad[i];
      targets = TreeTargets{ones, resid, x.labels};
    }
    Tree tree = detail::grow_tree(data, rows, targets, params, nullptr);
    if (kind == ModelKind::GradientBoosting) newton_leaf_values(tree, x, resid, hess);
    for (auto& node : tree.nodes) {
      if (node.feature < 0) node.value *= cfg.learning_rate;
    }
    for (std::size_t i = 0; i < n; ++i) raw[i] += tree.predict(x.row(i));
    m.trees.push_back(std::move(tree));
  }
  return m;
}

}  // namespace

TrainedModel train_gradient_boosting(const FeatureMatrix& x, const TrainConfig& cfg) {
  return boost(ModelKind::GradientBoosting, x, cfg);
}

TrainedModel train_newton_boosting(const FeatureMatrix& x, const TrainConfig& cfg) {
  return boost(ModelKind::NewtonBoosting, x, cfg);
}

void logistic_gradients(std::span<const double> raw, std::span<const double> labels,
                        std::span<double> grad, std::span<double> hess) {
  if (labels.size() != raw.size() || grad.size() != raw.size() || hess.size() != raw.size()) {
    throw InputError("logistic_gradients: length mismatch");
  }
  kernels::logistic_grad_hess(raw, labels, grad, hess);
}

double logistic_loss(std::span<const double> raw, std::span<const double> labels) {
  if (labels.size() != raw.size()) throw InputError("logistic_loss: length mismatch");
  if (raw.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double z = raw[i];
    s += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - labels[i] * z;
  }
  return s / static_cast<double>(raw.size());
}

}  // namespace faultrank::learners
