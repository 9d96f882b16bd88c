// One line per acceptance criterion; exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "faultrank/eval.hpp"
#include "faultrank/learners.hpp"
#include "faultrank/log.hpp"
#include "faultrank/miner.hpp"
#include "faultrank/pipeline.hpp"
#include "faultrank/residuals.hpp"
#include "faultrank/szz.hpp"
#include "faultrank/violations.hpp"
#include "fixture_repo.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace faultrank;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// SZZ recovers the planted commit in synthetic histories and date-filters
// plantings that postdate the report.
Verdict criterion_1() {
  auto t0 = Clock::now();
  int found = 0, filtered_ok = 0, total = 0, filtered_total = 0;
  std::vector<std::string> misses;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    testing::TempDir tmp;
    bool late = seed % 5 == 4;
    auto s = testing::make_szz_scenario(tmp.path() / "repo", 1000 + seed, late);
    miner::History hist(miner::extract_history(tmp.path() / "repo"));
    auto cands = szz::identify_inducing(hist.at(s.fix), s.issue, hist);
    bool hit = cands.size() == 1 && cands[0].inducing_commit == s.planted;
    if (late) {
      ++filtered_total;
      if (hit && cands[0].date_filtered) ++filtered_ok;
      else misses.push_back(fmt::format("seed {} (late)", 1000 + seed));
    } else {
      ++total;
      if (hit && !cands[0].date_filtered) ++found;
      else misses.push_back(fmt::format("seed {}", 1000 + seed));
    }
  }
  double secs = seconds_since(t0);
  auto detail = fmt::format("{}/{} planted commits found, {}/{} late plantings filtered, {:.1f}s", found, total,
                            filtered_ok, filtered_total, secs);
  if (!misses.empty()) detail += "; missed " + misses.front();
  return found == total && total >= 50 && filtered_ok == filtered_total && secs < 60 ? pass(detail) : fail(detail);
}

// Metric arithmetic on the bug-rule contingency table.
Verdict criterion_2() {
  auto m = eval::compute_metrics({32, 342, 38020, 1124});
  struct Want { const char* name; double got, want; };
  Want checks[] = {{"precision", m.precision, 0.086}, {"recall", m.recall, 0.028}, {"mcc", m.mcc, 0.032},
                   {"f", m.f_measure, 0.042},         {"tnr", m.tnr, 0.991},       {"fpr", m.fpr, 0.009},
                   {"fnr", m.fnr, 0.972}};
  for (const auto& c : checks) {
    if (std::abs(c.got - c.want) > 0.001) return fail(fmt::format("{} = {:.4f}, want {:.3f}", c.name, c.got, c.want));
  }
  return pass("precision 0.086 recall 0.028 mcc 0.032 f 0.042 tnr 0.991 fpr 0.009 fnr 0.972");
}

double brute_auc(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

// AUC equals the pairwise rank statistic and sits at 0.5 for random scores.
Verdict criterion_3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng() % 199;
    std::vector<std::uint8_t> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.3;
      s[i] = trial % 2 ? std::round(u(rng) * 10) : u(rng);
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(eval::auc_score(y, s) - brute_auc(y, s)));
  }
  std::vector<std::uint8_t> y(10000);
  std::vector<double> s(10000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = u(rng) < 0.5;
    s[i] = u(rng);
  }
  double random_auc = eval::auc_score(y, s);
  auto detail = fmt::format("max |auc - brute| = {:.2e} over 100 vectors, random auc {:.4f}", worst, random_auc);
  return worst <= 1e-12 && std::abs(random_auc - 0.5) <= 0.02 ? pass(detail) : fail(detail);
}

testing::Corpus& corpus() {
  static testing::Corpus c = testing::make_imbalanced_corpus({});
  return c;
}

// Boosting beats a single tree and no ensemble trails logistic regression.
Verdict criterion_4() {
  auto t0 = Clock::now();
  const auto& x = corpus().x;
  auto plan = eval::make_temporal_folds(x, 10);
  learners::TrainConfig cfg;
  std::map<learners::ModelKind, double> auc;
  for (auto kind : learners::kAllModelKinds) auc[kind] = eval::cross_validate(kind, x, plan, cfg).mean.auc.value_or(0);
  double secs = seconds_since(t0);

  using K = learners::ModelKind;
  std::vector<std::string> problems;
  for (auto kind : {K::GradientBoosting, K::NewtonBoosting}) {
    if (auc[kind] < auc[K::Tree] + 0.05) {
      problems.push_back(fmt::format("{} {:.3f} < tree {:.3f} + 0.05", learners::display_name(kind), auc[kind], auc[K::Tree]));
    }
  }
  for (auto kind : {K::Bagging, K::RandomForest, K::ExtraTrees, K::AdaBoost, K::GradientBoosting, K::NewtonBoosting}) {
    if (auc[kind] < auc[K::Logistic] - 0.02) {
      problems.push_back(fmt::format("{} {:.3f} < logistic {:.3f} - 0.02", learners::display_name(kind), auc[kind],
                                     auc[K::Logistic]));
    }
  }
  if (secs >= 600) problems.push_back(fmt::format("took {:.0f}s", secs));

  std::string detail;
  for (auto kind : learners::kAllModelKinds) {
    detail += fmt::format("{}{} {:.3f}", detail.empty() ? "" : ", ", learners::display_name(kind), auc[kind]);
  }
  detail += fmt::format("; {:.0f}s", secs);
  if (!problems.empty()) return fail(problems.front() + "; " + detail);
  return pass(detail);
}

// Drop-column importance separates informative columns from noise.
Verdict criterion_5() {
  auto t0 = Clock::now();
  const auto& c = corpus();
  auto plan = eval::make_temporal_folds(c.x, 10);
  auto rep = eval::drop_column_importance(learners::ModelKind::NewtonBoosting, c.x, plan, {});
  double min_signal = 1e9, max_noise = -1e9, max_abs_noise = 0;
  for (std::size_t j = 0; j < rep.features.size(); ++j) {
    double v = rep.features[j].importance;
    bool informative = std::find(c.informative.begin(), c.informative.end(), j) != c.informative.end();
    if (informative) {
      min_signal = std::min(min_signal, v);
    } else {
      max_noise = std::max(max_noise, v);
      max_abs_noise = std::max(max_abs_noise, std::abs(v));
    }
  }
  auto detail = fmt::format("weakest informative {:.4f}, strongest noise {:.4f}, max |noise| {:.4f}; {:.0f}s",
                            min_signal, max_noise, max_abs_noise, seconds_since(t0));
  return min_signal > max_noise && max_abs_noise <= 0.02 ? pass(detail) : fail(detail);
}

// Residual statistics match a recount from raw violation events.
Verdict criterion_6() {
  std::mt19937_64 rng(6);
  const std::vector<std::string> rules = {"R1", "R2", "R3"};
  const std::vector<std::string> files = {"a.c", "b.c"};
  std::vector<violations::RuleDescriptor> descs;
  for (const auto& r : rules) descs.push_back({r, violations::RuleKind::Bug, violations::Severity::Major});
  violations::RuleCatalog catalog(descs);

  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n_commits = 3 + rng() % 10;
    std::vector<std::string> commits;
    for (std::size_t i = 0; i < n_commits; ++i) commits.push_back(fmt::format("c{:02}", i));
    std::vector<violations::ViolationEvent> events;
    std::size_t n_events = rng() % 40;
    for (std::size_t e = 0; e < n_events; ++e) {
      std::size_t open = rng() % n_commits;
      violations::ViolationEvent ev{rules[rng() % rules.size()], files[rng() % files.size()], commits[open], {}};
      if (open + 1 < n_commits && rng() % 2) ev.closed_at = commits[open + 1 + rng() % (n_commits - open - 1)];
      events.push_back(ev);
    }
    std::vector<residuals::CommitFixPair> pairs;
    std::size_t n_pairs = 1 + rng() % 8;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      std::size_t ind = rng() % (n_commits - 1);
      std::size_t fix = ind + 1 + rng() % (n_commits - ind - 1);
      pairs.push_back({"X-" + std::to_string(p), commits[ind], commits[fix], files[rng() % files.size()]});
    }

    auto stats = residuals::analyze_residuals(pairs, violations::compute_deltas(events), catalog);
    for (std::size_t r = 0; r < rules.size(); ++r) {
      auto count = [&](const std::string& commit, const std::string& file) {
        long d = 0;
        for (const auto& ev : events) {
          if (ev.rule != rules[r] || ev.file != file) continue;
          if (ev.opened_at == commit) ++d;
          if (ev.closed_at == commit) --d;
        }
        return d;
      };
      std::vector<long> values;
      for (const auto& p : pairs) {
        long ind = count(p.inducing_commit, p.file);
        if (ind > 0) values.push_back(ind + count(p.fixing_commit, p.file));
      }
      double rss = 0, zeros = 0, sum = 0;
      for (long v : values) {
        rss += double(v) * double(v);
        sum += double(v);
        zeros += v == 0;
      }
      const auto& s = stats[r];
      double pct = values.empty() ? 0.0 : 100.0 * zeros / double(values.size());
      double mean = values.empty() ? 0.0 : sum / double(values.size());
      if (s.squid != rules[r] || s.n_pairs != values.size() || s.rss != rss || s.pct_zero != pct ||
          std::abs(s.mean - mean) > 1e-12 || s.gate_95 != (pct > 95.0)) {
        return fail(fmt::format("trial {} rule {}: n {} vs {}, rss {} vs {}, pct_zero {} vs {}", trial, rules[r],
                                s.n_pairs, values.size(), s.rss, rss, s.pct_zero, pct));
      }
    }
  }

  std::vector<long> ninety_six(100, 0), ninety_five(100, 0);
  std::fill(ninety_six.begin(), ninety_six.begin() + 4, 1);
  std::fill(ninety_five.begin(), ninety_five.begin() + 5, 1);
  bool gate_ok = residuals::residual_stats("R", ninety_six).gate_95 && !residuals::residual_stats("R", ninety_five).gate_95;
  if (!gate_ok) return fail("gate boundary: 96% must pass and 95% must not");
  return pass("1000 randomized fixtures recounted exactly; gate passes at 96% and fails at 95%");
}

// Two full pipeline runs produce byte-identical reports.
Verdict criterion_7() {
  testing::TempDir tmp;
  auto config = testing::make_pipeline_fixture(tmp.path());
  std::vector<std::string> reports;
  for (const char* out : {"run1", "run2"}) {
    auto cfg = pipeline::load_config(config);
    cfg.out = tmp.path() / out;
    pipeline::Pipeline p(cfg, false);
    p.run_all();
    reports.push_back(slurp(cfg.out / "report.json"));
  }
  if (reports[0].empty()) return fail("empty report.json");
  return reports[0] == reports[1] ? pass(fmt::format("report.json identical ({} bytes)", reports[0].size()))
                                  : fail("report.json differs between runs");
}

// Bug-rule baseline on a full dataset (deltas.csv, labels.csv, rules.csv).
Verdict criterion_8() {
  const char* dir = std::getenv("FAULTRANK_REPLICATION_DIR");
  if (!dir || !*dir) return {Outcome::Skip, "FAULTRANK_REPLICATION_DIR not set"};
  fs::path d(dir);
  auto deltas = violations::read_deltas_csv(d / "deltas.csv");
  auto labels = szz::read_labels_csv(d / "labels.csv");
  auto catalog = violations::load_rule_catalog(d / "rules.csv");
  auto r = eval::evaluate_bug_rule_model(deltas, labels, catalog);
  auto detail = fmt::format("tp {} fp {} fn {} tn {} auc {:.3f}", r.cm.tp, r.cm.fp, r.cm.fn, r.cm.tn,
                            r.metrics.auc.value_or(-1));
  bool counts = r.cm == eval::ConfusionMatrix{32, 342, 38020, 1124};
  bool auc = r.metrics.auc && std::abs(*r.metrics.auc - 0.509) <= 0.01;
  return counts && auc ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
  init_logging();
  std::vector<std::function<Verdict()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                    criterion_5, criterion_6, criterion_7, criterion_8};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = fail(std::string("threw: ") + e.what());
    }
    const char* word = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    if (v.outcome == Outcome::Fail) ++failures;
    fmt::print("criterion {}: {} {}\n", i + 1, word, v.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
