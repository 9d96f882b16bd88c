#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faultrank/features.hpp"
#include "faultrank/learners.hpp"
#include "faultrank/szz.hpp"
#include "faultrank/violations.hpp"

namespace faultrank::eval {

struct ProjectGroups {
  std::string project;
  // rows of group g are [bounds[g], bounds[g+1]) within the project's rows
  std::vector<std::size_t> bounds;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<ProjectGroups> groups;
  std::vector<Fold> folds;  // k - 1 of them
};

/// Splits each project's rows (in matrix order) into k contiguous groups;
/// fold i trains on groups 1..i and tests on group i+1.
FoldPlan make_temporal_folds(const learners::FeatureMatrix& x, std::size_t k);

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_at_threshold(std::span<const std::uint8_t> labels,
                                       std::span<const double> scores, double tau = 0.5);

struct MetricsReport {
  double precision = 0, recall = 0, mcc = 0, f_measure = 0, tnr = 0, fpr = 0, fnr = 0;
  std::optional<double> auc;  // unset when the evaluated rows hold a single class
  bool operator==(const MetricsReport&) const = default;
};

/// Everything but auc. A zero denominator yields 0; fnr and fpr are the
/// complements of recall and tnr.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr;
  double tpr;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

/// Rank-statistic AUC, ties counted half. Throws InputError when either
/// class is absent or lengths differ.
RocCurve roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores);
double auc_score(std::span<const std::uint8_t> labels, std::span<const double> scores);

struct FoldResult {
  std::size_t fold = 0;  // 1-based
  ConfusionMatrix cm;
  MetricsReport metrics;
};

struct CvResult {
  learners::ModelKind kind = learners::ModelKind::Logistic;
  std::vector<FoldResult> folds;
  MetricsReport mean;  // unweighted; auc averages the folds where it is defined
  // test labels and scores pooled over folds, in fold order
  std::vector<std::uint8_t> pooled_labels;
  std::vector<double> pooled_scores;
};

CvResult cross_validate(learners::ModelKind kind, const learners::FeatureMatrix& x,
                        const FoldPlan& plan, const learners::TrainConfig& cfg);

struct FeatureImportance {
  std::string squid;
  double importance = 0.0;
  bool operator==(const FeatureImportance&) const = default;
};

struct ImportanceReport {
  learners::ModelKind kind = learners::ModelKind::NewtonBoosting;
  double baseline_auc = 0.0;
  std::vector<FeatureImportance> features;  // column order
  bool operator==(const ImportanceReport&) const = default;
};

ImportanceReport drop_column_importance(learners::ModelKind kind, const learners::FeatureMatrix& x,
                                        const FoldPlan& plan, const learners::TrainConfig& cfg);

struct BaselineResult {
  ConfusionMatrix cm;
  MetricsReport metrics;
  bool operator==(const BaselineResult&) const = default;
};

/// Predicts a commit inducing iff it introduces a violation of a BUG-kind
/// rule. Evaluated over every labelled commit.
BaselineResult evaluate_bug_rule_model(std::span<const violations::ViolationDelta> deltas,
                                       std::span<const szz::FaultLabel> labels,
                                       const violations::RuleCatalog& catalog);

/// model,fold,precision,recall,mcc,f_measure,tnr,fpr,fnr,auc
void write_metrics_csv(std::ostream& out, std::span<const CvResult> results);
void write_roc_csv(std::ostream& out, const RocCurve& curve);
/// squid,importance sorted by importance descending (column order on ties)
void write_importance_csv(std::ostream& out, const ImportanceReport& report);
std::vector<FeatureImportance> read_importance_csv(const std::filesystem::path& path);

}  // namespace faultrank::eval
