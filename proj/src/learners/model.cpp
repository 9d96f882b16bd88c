#include <algorithm>
#include <cmath>
#include <string>

#include "faultrank/common.hpp"
#include "faultrank/kernels.hpp"
#include "faultrank/learners.hpp"

namespace faultrank::learners {

namespace {

struct KindInfo {
  ModelKind kind;
  std::string_view code;
  std::string_view display;
};

constexpr KindInfo kKinds[] = {
    {ModelKind::Logistic, "LOGISTIC", "Logistic Regr."},
    {ModelKind::Tree, "TREE", "Decision Tree"},
    {ModelKind::Bagging, "BAGGING", "Bagging"},
    {ModelKind::RandomForest, "RANDOM_FOREST", "Random Forest"},
    {ModelKind::ExtraTrees, "EXTRA_TREES", "Extra Trees"},
    {ModelKind::AdaBoost, "ADABOOST", "AdaBoost"},
    {ModelKind::GradientBoosting, "GRADIENT_BOOSTING", "Gradient Boosting"},
    {ModelKind::NewtonBoosting, "NEWTON_BOOSTING", "Newton Boosting"},
};

const KindInfo& info(ModelKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  return kKinds[0];
}

bool is_boosting(ModelKind kind) {
  return kind == ModelKind::GradientBoosting || kind == ModelKind::NewtonBoosting;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return info(kind).code; }
std::string_view display_name(ModelKind kind) { return info(kind).display; }

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  std::string up;
  for (char c : text) up.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (const auto& k : kKinds) {
    if (k.code == up) return k.kind;
  }
  return std::nullopt;
}

void TrainConfig::validate(ModelKind kind) const {
  auto fail = [](const std::string& what) { throw InputError("invalid training config: " + what); };
  if (n_estimators < 0 || (n_estimators == 0 && !is_boosting(kind))) {
    fail("n_estimators must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (max_depth && *max_depth < 1) fail("max_depth must be positive");
  if (!(l2_lambda >= 0.0)) fail("l2_lambda must be non-negative");
  if (!(logistic_l2 >= 0.0) || !std::isfinite(logistic_l2)) fail("logistic_l2 must be non-negative");
  if (logistic_max_iterations < 0) fail("logistic_max_iterations must be non-negative");
  if (!(logistic_tolerance >= 0.0)) fail("logistic_tolerance must be non-negative");
}

double Tree::predict(std::span<const double> row) const {
  if (nodes.empty()) return 0.0;
  const TreeNode* n = &nodes[0];
  while (n->feature >= 0) {
    n = &nodes[row[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right];
  }
  return n->value;
}

std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[i].feature >= 0) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

double gini_impurity(double positive_weight, double total_weight) {
  if (!(total_weight > 0.0)) return 0.0;
  double p = positive_weight / total_weight;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

std::size_t features_per_split(std::size_t n_features) {
  if (n_features <= 1) return 1;
  auto s = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
  while (s * s > n_features) --s;
  while ((s + 1) * (s + 1) <= n_features) ++s;
  return s;
}

TrainedModel train(ModelKind kind, const FeatureMatrix& x, const TrainConfig& cfg) {
  switch (kind) {
    case ModelKind::Logistic: return train_logistic(x, cfg);
    case ModelKind::Tree: return train_decision_tree(x, cfg);
    case ModelKind::Bagging: return train_bagging(x, cfg);
    case ModelKind::RandomForest: return train_random_forest(x, cfg);
    case ModelKind::ExtraTrees: return train_extra_trees(x, cfg);
    case ModelKind::AdaBoost: return train_adaboost(x, cfg);
    case ModelKind::GradientBoosting: return train_gradient_boosting(x, cfg);
    case ModelKind::NewtonBoosting: return train_newton_boosting(x, cfg);
  }
  throw InputError("unknown model kind");
}

double predict_score(const TrainedModel& model, std::span<const double> row) {
  if (row.size() != model.n_features) {
    throw InputError("row has " + std::to_string(row.size()) + " features, model expects " +
                     std::to_string(model.n_features));
  }
  switch (model.kind) {
    case ModelKind::Logistic:
      return kernels::sigmoid(kernels::dot(model.weights, row) + model.intercept);
    case ModelKind::Tree:
    case ModelKind::Bagging:
    case ModelKind::RandomForest:
    case ModelKind::ExtraTrees: {
      if (model.trees.empty()) return 0.0;
      double s = 0.0;
      for (const auto& t : model.trees) s += t.predict(row);
      return std::clamp(s / static_cast<double>(model.trees.size()), 0.0, 1.0);
    }
    case ModelKind::AdaBoost: {
      double margin = 0.0;
      for (std::size_t i = 0; i < model.trees.size(); ++i) {
        margin += model.tree_weights[i] * model.trees[i].predict(row);
      }
      return kernels::sigmoid(margin);
    }
    case ModelKind::GradientBoosting:
    case ModelKind::NewtonBoosting: {
      double raw = model.base_score;
      for (const auto& t : model.trees) raw += t.predict(row);
      return kernels::sigmoid(raw);
    }
  }
  return 0.0;
}

std::vector<double> predict_score(const TrainedModel& model, const FeatureMatrix& rows) {
  if (rows.n_cols != model.n_features) {
    throw InputError("matrix has " + std::to_string(rows.n_cols) + " features, model expects " +
                     std::to_string(model.n_features));
  }
  std::vector<double> out(rows.n_rows);
  for (std::size_t i = 0; i < rows.n_rows; ++i) out[i] = predict_score(model, rows.row(i));
  return out;
}

nlohmann::json to_json(const TrainedModel& m) {
  using nlohmann::json;
  const auto& c = m.config;
  json cfg = {{"n_estimators", c.n_estimators},
              {"learning_rate", c.learning_rate},
              {"max_depth", c.max_depth ? json(*c.max_depth) : json(nullptr)},
              {"l2_lambda", c.l2_lambda},
              {"logistic_l2", c.logistic_l2},
              {"seed", c.seed},
              {"logistic_max_iterations", c.logistic_max_iterations},
              {"logistic_tolerance", c.logistic_tolerance}};
  json trees = json::array();
  for (const auto& t : m.trees) {
    json f = json::array(), th = json::array(), l = json::array(), r = json::array(), v = json::array();
    for (const auto& n : t.nodes) {
      f.push_back(n.feature);
      th.push_back(n.threshold);
      l.push_back(n.left);
      r.push_back(n.right);
      v.push_back(n.value);
    }
    trees.push_back({{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"value", v}});
  }
  return {{"kind", std::string(to_string(m.kind))},
          {"config", cfg},
          {"n_features", m.n_features},
          {"weights", m.weights},
          {"intercept", m.intercept},
          {"base_score", m.base_score},
          {"trees", trees},
          {"tree_weights", m.tree_weights}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    TrainedModel m;
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw InputError("unknown model kind " + j.at("kind").dump());
    m.kind = *kind;
    const auto& c = j.at("config");
    m.config.n_estimators = c.at("n_estimators").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    if (!c.at("max_depth").is_null()) m.config.max_depth = c.at("max_depth").get<int>();
    m.config.l2_lambda = c.at("l2_lambda").get<double>();
    m.config.logistic_l2 = c.at("logistic_l2").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.logistic_max_iterations = c.at("logistic_max_iterations").get<int>();
    m.config.logistic_tolerance = c.at("logistic_tolerance").get<double>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.base_score = j.at("base_score").get<double>();
    m.tree_weights = j.at("tree_weights").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
      auto f = t.at("feature").get<std::vector<int>>();
      auto th = t.at("threshold").get<std::vector<double>>();
      auto l = t.at("left").get<std::vector<int>>();
      auto r = t.at("right").get<std::vector<int>>();
      auto v = t.at("value").get<std::vector<double>>();
      if (th.size() != f.size() || l.size() != f.size() || r.size() != f.size() || v.size() != f.size()) {
        throw InputError("tree arrays differ in length");
      }
      Tree tree;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const int n = static_cast<int>(f.size());
        if (f[i] >= 0 && (f[i] >= static_cast<int>(m.n_features) || l[i] <= static_cast<int>(i) ||
                          r[i] <= static_cast<int>(i) || l[i] >= n || r[i] >= n)) {
          throw InputError("malformed tree node " + std::to_string(i));
        }
        tree.nodes.push_back({f[i], th[i], l[i], r[i], v[i]});
      }
      m.trees.push_back(std::move(tree));
    }
    if (m.kind == ModelKind::AdaBoost && m.tree_weights.size() != m.trees.size()) {
      throw InputError("AdaBoost model needs one weight per stump");
    }
    if (m.kind == ModelKind::Logistic && m.weights.size() != m.n_features) {
      throw InputError("logistic weight count differs from n_features");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace faultrank::learners
