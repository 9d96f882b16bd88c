#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "faultrank/common.hpp"
#include "faultrank/eval.hpp"
#include "faultrank/learners.hpp"
#include "faultrank/residuals.hpp"

namespace faultrank::pipeline {

namespace fs = std::filesystem;

struct ProjectInput {
  std::string name;
  fs::path repo;
  fs::path issues;
  bool operator==(const ProjectInput&) const = default;
};

struct PipelineConfig {
  std::vector<ProjectInput> projects;  // sorted by name
  fs::path violations;
  fs::path rules;
  Timestamp until;
  std::size_t k = 10;
  std::vector<learners::ModelKind> models;
  learners::TrainConfig train;
  fs::path out = "faultrank-out";

  PipelineConfig();
  /// Throws InputError naming the first missing input or bad setting.
  void validate() const;
};

/// Flat key=value text; '#' starts a comment. Relative paths resolve against
/// base_dir. Keys:
///   project.<name>.repo, project.<name>.issues, violations, rules, until, k,
///   models (comma list or "all"), seed, out, train.n_estimators,
///   train.learning_rate, train.max_depth, train.l2_lambda, train.logistic_l2
PipelineConfig parse_config(std::string_view text, const fs::path& base_dir);
PipelineConfig load_config(const fs::path& path);
/// Applies one key=value setting; used by the parser and for overrides.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value,
                   const fs::path& base_dir);

enum class Stage { Mine, Issues, Szz, Deltas, Featurize, Train, Eval, Importance, Residuals, Report };

inline constexpr Stage kAllStages[] = {Stage::Mine,      Stage::Issues, Stage::Szz,        Stage::Deltas,
                                       Stage::Featurize, Stage::Train,  Stage::Eval,       Stage::Importance,
                                       Stage::Residuals, Stage::Report};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct ModelSummary {
  learners::ModelKind kind = learners::ModelKind::Logistic;
  std::vector<eval::MetricsReport> folds;
  eval::MetricsReport mean;
  bool operator==(const ModelSummary&) const = default;
};

struct ReportBundle {
  std::size_t n_projects = 0;
  std::size_t n_commits = 0;
  std::size_t n_inducing = 0;
  std::size_t n_fixed_issues = 0;
  std::vector<ModelSummary> models;
  std::optional<learners::ModelKind> best_model;
  eval::ImportanceReport importance;
  std::vector<residuals::ResidualStats> residuals;
  residuals::RankedRules ranked;
  eval::BaselineResult baseline;
  bool operator==(const ReportBundle&) const = default;
};

/// Highest mean AUC; ties go to the earlier model kind. Models without a
/// defined AUC are ignored.
std::optional<learners::ModelKind> best_model(const std::vector<ModelSummary>& models);

nlohmann::json to_json(const ReportBundle& bundle);
ReportBundle bundle_from_json(const nlohmann::json& j);
std::string render_markdown(const ReportBundle& bundle);
/// Writes report.json and report.md into out_dir.
void emit_report(const ReportBundle& bundle, const fs::path& out_dir);

std::vector<ModelSummary> read_metrics_csv(const fs::path& path);

/// Owns the output directory for its lifetime (out/.lock).
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, bool resume);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void run(Stage stage);
  ReportBundle run_all();
  const PipelineConfig& config() const { return cfg_; }

 private:
  void execute(Stage stage);
  bool done(Stage stage) const;
  fs::path artifact(std::string_view name) const;

  PipelineConfig cfg_;
  bool resume_;
  fs::path lock_;
};

}  // namespace faultrank::pipeline
