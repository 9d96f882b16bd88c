#include "faultrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "faultrank/common.hpp"
#include "faultrank/csv.hpp"

namespace faultrank::eval {

using learners::FeatureMatrix;
using learners::ModelKind;
using learners::TrainConfig;

namespace {

[[noreturn]] void rethrow_with(const std::string& prefix) {
  try {
    throw;
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(prefix + e.what());
  } catch (const RangeError& e) {
    throw RangeError(prefix + e.what());
  } catch (const NotFoundError& e) {
    throw NotFoundError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

FoldPlan make_temporal_folds(const FeatureMatrix& x, std::size_t k) {
  if (k < 2) throw InputError("fold group count k must be at least 2");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    auto [it, fresh] = rows_of.try_emplace(x.projects[i]);
    if (fresh) order.push_back(x.projects[i]);
    auto& rows = it->second;
    if (!rows.empty() && x.timestamps[i] < x.timestamps[rows.back()]) {
      throw InputError("rows of project " + x.projects[i] + " are not in temporal order");
    }
    rows.push_back(i);
  }

  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(k - 1);
  for (const auto& project : order) {
    const auto& rows = rows_of[project];
    const std::size_t n = rows.size();
    if (n < k) {
      throw InputError("project " + project + " has " + std::to_string(n) + " rows, fewer than k = " +
                       std::to_string(k));
    }
    ProjectGroups g{project, {0}};
    for (std::size_t j = 0; j < k; ++j) g.bounds.push_back(g.bounds.back() + n / k + (j < n % k ? 1 : 0));
    for (std::size_t f = 0; f + 1 < k; ++f) {
      auto& fold = plan.folds[f];
      fold.train.insert(fold.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(g.bounds[f + 1]));
      fold.test.insert(fold.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(g.bounds[f + 1]),
                       rows.begin() + static_cast<std::ptrdiff_t>(g.bounds[f + 2]));
    }
    plan.groups.push_back(std::move(g));
  }
  for (auto& fold : plan.folds) {
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

ConfusionMatrix confusion_at_threshold(std::span<const std::uint8_t> labels,
                                       std::span<const double> scores, double tau) {
  if (labels.size() != scores.size()) {
    throw InputError("labels and scores differ in length (" + std::to_string(labels.size()) + " vs " +
                     std::to_string(scores.size()) + ")");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool predicted = scores[i] >= tau;
    if (labels[i]) {
      predicted ? ++cm.tp : ++cm.fn;
    } else {
      predicted ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double tn = static_cast<double>(cm.tn), fn = static_cast<double>(cm.fn);
  MetricsReport m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.tnr = ratio(tn, tn + fp);
  m.fnr = 1.0 - m.recall;
  m.fpr = 1.0 - m.tnr;
  m.f_measure = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  m.mcc = den > 0.0 ? (tp * tn - fp * fn) / std::sqrt(den) : 0.0;
  return m;
}

RocCurve roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InputError("labels and scores differ in length");
  std::size_t pos = 0;
  for (auto l : labels) pos += l ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw InputError("AUC is undefined when only one class is present");

  std::vector<std::size_t> idx(labels.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ascending ranks with ties averaged, and the ROC walked from the top.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[idx[t]]) rank_sum += avg;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  RocCurve curve;
  curve.auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * q);

  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = idx.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && scores[idx[j - 1]] == scores[idx[i - 1]]) {
      labels[idx[j - 1]] ? ++tp : ++fp;
      --j;
    }
    curve.points.push_back({static_cast<double>(fp) / q, static_cast<double>(tp) / p});
    i = j;
  }
  return curve;
}

double auc_score(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  return roc_auc(labels, scores).auc;
}

namespace {

std::optional<double> maybe_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  bool has_pos = false, has_neg = false;
  for (auto l : labels) (l ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) return std::nullopt;
  return auc_score(labels, scores);
}

MetricsReport mean_of(const std::vector<FoldResult>& folds) {
  MetricsReport m;
  if (folds.empty()) return m;
  double auc_sum = 0.0;
  std::size_t auc_n = 0;
  for (const auto& f : folds) {
    m.precision += f.metrics.precision;
    m.recall += f.metrics.recall;
    m.mcc += f.metrics.mcc;
    m.f_measure += f.metrics.f_measure;
    m.tnr += f.metrics.tnr;
    m.fpr += f.metrics.fpr;
    m.fnr += f.metrics.fnr;
    if (f.metrics.auc) {
      auc_sum += *f.metrics.auc;
      ++auc_n;
    }
  }
  const double n = static_cast<double>(folds.size());
  m.precision /= n;
  m.recall /= n;
  m.mcc /= n;
  m.f_measure /= n;
  m.tnr /= n;
  m.fpr /= n;
  m.fnr /= n;
  if (auc_n > 0) m.auc = auc_sum / static_cast<double>(auc_n);
  return m;
}

}  // namespace

CvResult cross_validate(ModelKind kind, const FeatureMatrix& x, const FoldPlan& plan,
                        const TrainConfig& cfg) {
  CvResult result;
  result.kind = kind;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const Fold& fold = plan.folds[f];
    for (std::size_t r : fold.train) {
      if (r >= x.n_rows) throw RangeError("fold row " + std::to_string(r) + " out of range");
    }
    for (std::size_t r : fold.test) {
      if (r >= x.n_rows) throw RangeError("fold row " + std::to_string(r) + " out of range");
    }
    FoldResult fr;
    fr.fold = f + 1;
    try {
      FeatureMatrix train = learners::select_rows(x, fold.train);
      FeatureMatrix test = learners::select_rows(x, fold.test);
      auto model = learners::train(kind, train, cfg);
      auto scores = learners::predict_score(model, test);
      fr.cm = confusion_at_threshold(test.labels, scores);
      fr.metrics = compute_metrics(fr.cm);
      fr.metrics.auc = maybe_auc(test.labels, scores);
      result.pooled_labels.insert(result.pooled_labels.end(), test.labels.begin(), test.labels.end());
      result.pooled_scores.insert(result.pooled_scores.end(), scores.begin(), scores.end());
    } catch (const std::exception&) {
      rethrow_with(std::string(learners::to_string(kind)) + " fold " + std::to_string(f + 1) + ": ");
    }
    result.folds.push_back(std::move(fr));
  }
  result.mean = mean_of(result.folds);
  return result;
}

ImportanceReport drop_column_importance(ModelKind kind, const FeatureMatrix& x, const FoldPlan& plan,
                                        const TrainConfig& cfg) {
  if (x.n_cols < 2) throw InputError("drop-column importance needs at least two features");
  ImportanceReport report;
  report.kind = kind;
  auto baseline = cross_validate(kind, x, plan, cfg).mean.auc;
  if (!baseline) throw ConsistencyError("baseline AUC is undefined on every fold");
  report.baseline_auc = *baseline;
  for (std::size_t j = 0; j < x.n_cols; ++j) {
    std::optional<double> auc;
    try {
      auc = cross_validate(kind, learners::drop_column(x, j), plan, cfg).mean.auc;
    } catch (const std::exception&) {
      rethrow_with("without column " + x.column_names[j] + ": ");
    }
    report.features.push_back({x.column_names[j], report.baseline_auc - auc.value_or(0.5)});
  }
  return report;
}

BaselineResult evaluate_bug_rule_model(std::span<const violations::ViolationDelta> deltas,
                                       std::span<const szz::FaultLabel> labels,
                                       const violations::RuleCatalog& catalog) {
  violations::DeltaIndex index(deltas);
  std::vector<std::uint8_t> y;
  std::vector<double> s;
  y.reserve(labels.size());
  s.reserve(labels.size());
  for (const auto& l : labels) {
    bool predicted = false;
    if (const auto* intro = index.introduced_by_rule(l.commit)) {
      for (const auto& [rule, count] : *intro) {
        const auto* d = catalog.find(rule);
        if (count > 0 && d && d->kind == violations::RuleKind::Bug) {
          predicted = true;
          break;
        }
      }
    }
    y.push_back(l.inducing ? 1 : 0);
    s.push_back(predicted ? 1.0 : 0.0);
  }
  BaselineResult r;
  r.cm = confusion_at_threshold(y, s);
  r.metrics = compute_metrics(r.cm);
  r.metrics.auc = maybe_auc(y, s);
  return r;
}

namespace {

std::vector<std::string> metric_fields(std::string model, std::string fold, const MetricsReport& m) {
  using csv::format_double;
  return {std::move(model),
          std::move(fold),
          format_double(m.precision),
          format_double(m.recall),
          format_double(m.mcc),
          format_double(m.f_measure),
          format_double(m.tnr),
          format_double(m.fpr),
          format_double(m.fnr),
          m.auc ? format_double(*m.auc) : std::string()};
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const CvResult> results) {
  csv::Writer w(out);
  w.row({"model", "fold", "precision", "recall", "mcc", "f_measure", "tnr", "fpr", "fnr", "auc"});
  for (const auto& r : results) {
    std::string name(learners::to_string(r.kind));
    for (const auto& f : r.folds) w.row(metric_fields(name, std::to_string(f.fold), f.metrics));
    w.row(metric_fields(name, "mean", r.mean));
  }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  csv::Writer w(out);
  w.row({"fpr", "tpr"});
  for (const auto& p : curve.points) w.row({csv::format_double(p.fpr), csv::format_double(p.tpr)});
}

void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
  std::vector<FeatureImportance> sorted = report.features;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  csv::Writer w(out);
  w.row({"squid", "importance"});
  for (const auto& f : sorted) w.row({f.squid, csv::format_double(f.importance)});
}

std::vector<FeatureImportance> read_importance_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  if (t.header != std::vector<std::string>{"squid", "importance"}) {
    throw InputError(path.string() + ": expected header squid,importance");
  }
  std::vector<FeatureImportance> out;
  for (const auto& row : t.rows) {
    if (row.fields.size() != 2) throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    out.push_back({row.fields[0], csv::parse_double(row.fields[1])});
  }
  return out;
}

}  // namespace faultrank::eval
