#include "faultrank/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "atomic_file.hpp"
#include "faultrank/features.hpp"
#include "faultrank/issues.hpp"
#include "faultrank/miner.hpp"
#include "faultrank/szz.hpp"
#include "faultrank/violations.hpp"

namespace faultrank::pipeline {

using detail::AtomicFile;
using learners::ModelKind;

namespace {

constexpr std::string_view kStageNames[] = {"mine",  "issues", "szz",        "deltas",    "featurize",
                                            "train", "eval",   "importance", "residuals", "report"};

[[noreturn]] void rethrow_with(const std::string& prefix) {
  try {
    throw;
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void log_warnings(std::string_view source, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}: {}", source, w);
}

}  // namespace

std::string_view to_string(Stage stage) { return kStageNames[static_cast<std::size_t>(stage)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (auto s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

Pipeline::Pipeline(PipelineConfig cfg, bool resume) : cfg_(std::move(cfg)), resume_(resume) {
  cfg_.validate();
  std::error_code ec;
  fs::create_directories(cfg_.out, ec);
  if (!fs::is_directory(cfg_.out)) throw InputError("cannot create output directory " + cfg_.out.string());
  lock_ = cfg_.out / ".lock";
  int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    lock_.clear();
    throw InputError("output directory " + cfg_.out.string() +
                     " is locked by another run (remove .lock if that run is gone)");
  }
  std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

Pipeline::~Pipeline() {
  if (!lock_.empty()) {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
}

fs::path Pipeline::artifact(std::string_view name) const { return cfg_.out / std::string(name); }

bool Pipeline::done(Stage stage) const {
  return fs::exists(cfg_.out / ".stages" / (std::string(to_string(stage)) + ".done"));
}

void Pipeline::run(Stage stage) {
  if (resume_ && done(stage)) {
    spdlog::info("stage {}: already complete, skipping", to_string(stage));
    return;
  }
  const fs::path marker = cfg_.out / ".stages" / (std::string(to_string(stage)) + ".done");
  std::error_code ec;
  fs::remove(marker, ec);
  spdlog::info("stage {}: running", to_string(stage));
  try {
    execute(stage);
  } catch (const std::exception&) {
    rethrow_with("stage " + std::string(to_string(stage)) + ": ");
  }
  fs::create_directories(marker.parent_path());
  std::ofstream(marker) << "ok\n";
}

ReportBundle Pipeline::run_all() {
  for (auto s : kAllStages) run(s);
  std::ifstream in(artifact("report.json"));
  return bundle_from_json(nlohmann::json::parse(in));
}

namespace {

std::vector<miner::ProjectCommits> load_commits(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing " + path.string() + " (run the mine stage first)");
  return miner::read_commits_jsonl(in);
}

void require(const fs::path& path, std::string_view stage) {
  if (!fs::exists(path)) {
    throw InputError("missing " + path.string() + " (run the " + std::string(stage) + " stage first)");
  }
}

std::vector<issues::IssueRecord> load_issues(const ProjectInput& p) {
  auto parsed = issues::parse_issues(p.issues);
  log_warnings(p.issues.string(), parsed.warnings);
  return std::move(parsed.items);
}

violations::CommitOrder commit_order(const std::vector<miner::ProjectCommits>& projects) {
  violations::CommitOrder order;
  std::size_t i = 0;
  for (const auto& p : projects) {
    for (const auto& c : p.commits) order.emplace(c.hash, i++);
  }
  return order;
}

learners::FeatureMatrix load_features(const fs::path& out) {
  require(out / "features.csv", "featurize");
  return learners::read_features_csv(out / "features.csv");
}

}  // namespace

void Pipeline::execute(Stage stage) {
  switch (stage) {
    case Stage::Mine: {
      AtomicFile f(artifact("commits.jsonl"));
      for (const auto& p : cfg_.projects) {
        auto commits = miner::extract_history(p.repo, cfg_.until);
        spdlog::info("project {}: {} commits", p.name, commits.size());
        miner::write_commits_jsonl(f.stream(), commits, p.name);
      }
      f.commit();
      break;
    }
    case Stage::Issues: {
      auto projects = load_commits(artifact("commits.jsonl"));
      std::vector<issues::FixLink> links;
      for (const auto& p : cfg_.projects) {
        auto issues = load_issues(p);
        auto it = std::find_if(projects.begin(), projects.end(),
                               [&](const miner::ProjectCommits& pc) { return pc.project == p.name; });
        if (it == projects.end()) continue;
        auto l = issues::link_fixes(it->commits, issues);
        links.insert(links.end(), l.begin(), l.end());
      }
      AtomicFile f(artifact("fixlinks.csv"));
      issues::write_fixlinks_csv(f.stream(), links);
      f.commit();
      break;
    }
    case Stage::Szz: {
      auto projects = load_commits(artifact("commits.jsonl"));
      require(artifact("fixlinks.csv"), "issues");
      auto links = issues::read_fixlinks_csv(artifact("fixlinks.csv"));
      std::vector<szz::InducingCandidate> candidates;
      std::vector<szz::FaultLabel> labels;
      for (const auto& p : cfg_.projects) {
        auto it = std::find_if(projects.begin(), projects.end(),
                               [&](const miner::ProjectCommits& pc) { return pc.project == p.name; });
        if (it == projects.end()) continue;
        auto issues = load_issues(p);
        miner::History history(std::move(it->commits));
        auto c = szz::identify_all(links, issues, history);
        auto l = szz::label_commits(history.commits(), c);
        candidates.insert(candidates.end(), c.begin(), c.end());
        labels.insert(labels.end(), l.begin(), l.end());
      }
      AtomicFile fc(artifact("candidates.csv"));
      szz::write_candidates_csv(fc.stream(), candidates);
      fc.commit();
      AtomicFile fl(artifact("labels.csv"));
      szz::write_labels_csv(fl.stream(), labels);
      fl.commit();
      break;
    }
    case Stage::Deltas: {
      auto projects = load_commits(artifact("commits.jsonl"));
      auto events = violations::load_violation_events(cfg_.violations, commit_order(projects));
      log_warnings(cfg_.violations.string(), events.warnings);
      auto deltas = violations::compute_deltas(events.items);
      AtomicFile f(artifact("deltas.csv"));
      violations::write_deltas_csv(f.stream(), deltas);
      f.commit();
      break;
    }
    case Stage::Featurize: {
      auto projects = load_commits(artifact("commits.jsonl"));
      require(artifact("labels.csv"), "szz");
      require(artifact("deltas.csv"), "deltas");
      auto labels = szz::read_labels_csv(artifact("labels.csv"));
      auto deltas = violations::read_deltas_csv(artifact("deltas.csv"));
      auto catalog = violations::load_rule_catalog(cfg_.rules);
      std::vector<learners::ProjectHistory> views;
      for (const auto& p : projects) views.push_back({p.project, p.commits});
      auto x = learners::build_feature_matrix(views, labels, deltas, catalog);
      AtomicFile f(artifact("features.csv"));
      learners::write_features_csv(f.stream(), x);
      f.commit();
      break;
    }
    case Stage::Train: {
      auto x = load_features(cfg_.out);
      for (auto kind : cfg_.models) {
        auto model = learners::train(kind, x, cfg_.train);
        AtomicFile f(artifact("models") / (std::string(learners::to_string(kind)) + ".json"));
        f.stream() << learners::to_json(model).dump() << '\n';
        f.commit();
      }
      break;
    }
    case Stage::Eval: {
      auto x = load_features(cfg_.out);
      auto plan = eval::make_temporal_folds(x, cfg_.k);
      std::vector<eval::CvResult> results;
      for (auto kind : cfg_.models) {
        results.push_back(eval::cross_validate(kind, x, plan, cfg_.train));
        const auto& r = results.back();
        spdlog::info("{}: mean AUC {}", learners::to_string(kind), r.mean.auc ? *r.mean.auc : -1.0);
        AtomicFile roc(artifact("roc_" + lower(learners::to_string(kind)) + ".csv"));
        eval::RocCurve curve;
        bool has_pos = std::count(r.pooled_labels.begin(), r.pooled_labels.end(), 1) > 0;
        bool has_neg = std::count(r.pooled_labels.begin(), r.pooled_labels.end(), 0) > 0;
        if (has_pos && has_neg) curve = eval::roc_auc(r.pooled_labels, r.pooled_scores);
        eval::write_roc_csv(roc.stream(), curve);
        roc.commit();
      }
      AtomicFile f(artifact("metrics.csv"));
      eval::write_metrics_csv(f.stream(), results);
      f.commit();
      break;
    }
    case Stage::Importance: {
      require(artifact("metrics.csv"), "eval");
      auto best = best_model(read_metrics_csv(artifact("metrics.csv")));
      if (!best) throw ConsistencyError("no model has a defined mean AUC; importance needs one");
      auto x = load_features(cfg_.out);
      auto plan = eval::make_temporal_folds(x, cfg_.k);
      auto report = eval::drop_column_importance(*best, x, plan, cfg_.train);
      AtomicFile f(artifact("importance.csv"));
      eval::write_importance_csv(f.stream(), report);
      f.commit();
      break;
    }
    case Stage::Residuals: {
      require(artifact("candidates.csv"), "szz");
      require(artifact("fixlinks.csv"), "issues");
      require(artifact("deltas.csv"), "deltas");
      auto candidates = szz::read_candidates_csv(artifact("candidates.csv"));
      auto links = issues::read_fixlinks_csv(artifact("fixlinks.csv"));
      auto deltas = violations::read_deltas_csv(artifact("deltas.csv"));
      auto catalog = violations::load_rule_catalog(cfg_.rules);
      auto pairs = residuals::build_pairs(candidates, links);
      auto stats = residuals::analyze_residuals(pairs, deltas, catalog);
      AtomicFile fp(artifact("pairs.csv"));
      residuals::write_pairs_csv(fp.stream(), pairs);
      fp.commit();
      AtomicFile f(artifact("residuals.csv"));
      residuals::write_residuals_csv(f.stream(), stats);
      f.commit();
      break;
    }
    case Stage::Report: {
      for (auto name : {"metrics.csv", "importance.csv", "residuals.csv", "labels.csv", "deltas.csv",
                        "fixlinks.csv"}) {
        require(artifact(name), "earlier");
      }
      ReportBundle b;
      b.n_projects = cfg_.projects.size();
      auto labels = szz::read_labels_csv(artifact("labels.csv"));
      b.n_commits = labels.size();
      b.n_inducing = static_cast<std::size_t>(
          std::count_if(labels.begin(), labels.end(), [](const szz::FaultLabel& l) { return l.inducing; }));
      b.n_fixed_issues = issues::read_fixlinks_csv(artifact("fixlinks.csv")).size();
      b.models = read_metrics_csv(artifact("metrics.csv"));
      b.best_model = best_model(b.models);
      if (b.best_model) {
        b.importance.kind = *b.best_model;
        for (const auto& m : b.models) {
          if (m.kind == *b.best_model) b.importance.baseline_auc = *m.mean.auc;
        }
      }
      b.importance.features = eval::read_importance_csv(artifact("importance.csv"));
      b.residuals = residuals::read_residuals_csv(artifact("residuals.csv"));
      auto catalog = violations::load_rule_catalog(cfg_.rules);
      b.ranked = residuals::rank_rules(b.importance.features, b.residuals, catalog);
      auto deltas = violations::read_deltas_csv(artifact("deltas.csv"));
      b.baseline = eval::evaluate_bug_rule_model(deltas, labels, catalog);
      AtomicFile f(artifact("ranked_rules.csv"));
      residuals::write_ranked_csv(f.stream(), b.ranked);
      f.commit();
      emit_report(b, cfg_.out);
      break;
    }
  }
}

}  // namespace faultrank::pipeline
