#include <algorithm>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "atomic_file.hpp"
#include "faultrank/csv.hpp"
#include "faultrank/pipeline.hpp"

namespace faultrank::pipeline {

using learners::ModelKind;
using nlohmann::json;
using violations::RuleKind;
using violations::Severity;

namespace {

constexpr RuleKind kKinds[] = {RuleKind::Bug, RuleKind::CodeSmell, RuleKind::Vulnerability};
constexpr Severity kSeverities[] = {Severity::Blocker, Severity::Critical, Severity::Major, Severity::Minor,
                                    Severity::Info};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json metrics_json(const eval::MetricsReport& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"mcc", m.mcc}, {"f_measure", m.f_measure},
          {"tnr", m.tnr},             {"fpr", m.fpr},       {"fnr", m.fnr}, {"auc", opt(m.auc)}};
}

eval::MetricsReport metrics_from(const json& j) {
  eval::MetricsReport m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.mcc = j.at("mcc").get<double>();
  m.f_measure = j.at("f_measure").get<double>();
  m.tnr = j.at("tnr").get<double>();
  m.fpr = j.at("fpr").get<double>();
  m.fnr = j.at("fnr").get<double>();
  m.auc = opt_double(j.at("auc"));
  return m;
}

ModelKind kind_from(const json& j) {
  auto k = learners::parse_model_kind(j.get<std::string>());
  if (!k) throw InputError("unknown model kind " + j.dump());
  return *k;
}

template <typename Enum>
Enum enum_from(const json& j, std::optional<Enum> (*parse)(std::string_view)) {
  auto v = parse(j.get<std::string>());
  if (!v) throw InputError("unknown value " + j.dump());
  return *v;
}

}  // namespace

std::optional<ModelKind> best_model(const std::vector<ModelSummary>& models) {
  const ModelSummary* best = nullptr;
  for (const auto& m : models) {
    if (!m.mean.auc) continue;
    if (!best || *m.mean.auc > *best->mean.auc || (*m.mean.auc == *best->mean.auc && m.kind < best->kind)) {
      best = &m;
    }
  }
  if (!best) return std::nullopt;
  return best->kind;
}

json to_json(const ReportBundle& b) {
  json models = json::array();
  for (const auto& m : b.models) {
    json folds = json::array();
    for (const auto& f : m.folds) folds.push_back(metrics_json(f));
    models.push_back({{"kind", learners::to_string(m.kind)}, {"folds", folds}, {"mean", metrics_json(m.mean)}});
  }
  json features = json::array();
  for (const auto& f : b.importance.features) features.push_back({{"squid", f.squid}, {"importance", f.importance}});
  json residuals = json::array();
  for (const auto& s : b.residuals) {
    residuals.push_back({{"squid", s.squid},   {"n_pairs", s.n_pairs}, {"mean", s.mean},
                         {"min", s.min},       {"max", s.max},         {"stdev", s.stdev},
                         {"rss", s.rss},       {"pct_zero", s.pct_zero}, {"gate_95", s.gate_95}});
  }
  json rules = json::array();
  for (const auto& r : b.ranked.rules) {
    rules.push_back({{"squid", r.squid},
                     {"kind", r.kind ? json(violations::to_string(*r.kind)) : json(nullptr)},
                     {"severity", r.severity ? json(violations::to_string(*r.severity)) : json(nullptr)},
                     {"importance", opt(r.importance)},
                     {"pct_zero", opt(r.pct_zero)},
                     {"gate_95", r.gate_95},
                     {"fault_prone", r.fault_prone},
                     {"missing_data", r.missing_data}});
  }
  json by_kind = json::object(), by_severity = json::object();
  for (auto k : kKinds) by_kind[std::string(violations::to_string(k))] = b.ranked.fault_prone_by_kind[static_cast<std::size_t>(k)];
  for (auto s : kSeverities) {
    by_severity[std::string(violations::to_string(s))] = b.ranked.fault_prone_by_severity[static_cast<std::size_t>(s)];
  }
  const auto& cm = b.baseline.cm;
  return {{"summary",
           {{"projects", b.n_projects},
            {"commits", b.n_commits},
            {"inducing_commits", b.n_inducing},
            {"fixed_issues", b.n_fixed_issues}}},
          {"models", models},
          {"best_model", b.best_model ? json(learners::to_string(*b.best_model)) : json(nullptr)},
          {"importance",
           {{"model", learners::to_string(b.importance.kind)},
            {"baseline_auc", b.importance.baseline_auc},
            {"features", features}}},
          {"residuals", residuals},
          {"ranked_rules", {{"rules", rules}, {"fault_prone_by_kind", by_kind}, {"fault_prone_by_severity", by_severity}}},
          {"bug_rule_baseline",
           {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}, {"metrics", metrics_json(b.baseline.metrics)}}}};
}

ReportBundle bundle_from_json(const json& j) {
  try {
    ReportBundle b;
    const auto& s = j.at("summary");
    b.n_projects = s.at("projects").get<std::size_t>();
    b.n_commits = s.at("commits").get<std::size_t>();
    b.n_inducing = s.at("inducing_commits").get<std::size_t>();
    b.n_fixed_issues = s.at("fixed_issues").get<std::size_t>();
    for (const auto& m : j.at("models")) {
      ModelSummary ms;
      ms.kind = kind_from(m.at("kind"));
      for (const auto& f : m.at("folds")) ms.folds.push_back(metrics_from(f));
      ms.mean = metrics_from(m.at("mean"));
      b.models.push_back(std::move(ms));
    }
    if (!j.at("best_model").is_null()) b.best_model = kind_from(j.at("best_model"));
    const auto& imp = j.at("importance");
    b.importance.kind = kind_from(imp.at("model"));
    b.importance.baseline_auc = imp.at("baseline_auc").get<double>();
    for (const auto& f : imp.at("features")) {
      b.importance.features.push_back({f.at("squid").get<std::string>(), f.at("importance").get<double>()});
    }
    for (const auto& r : j.at("residuals")) {
      residuals::ResidualStats st;
      st.squid = r.at("squid").get<std::string>();
      st.n_pairs = r.at("n_pairs").get<std::size_t>();
      st.mean = r.at("mean").get<double>();
      st.min = r.at("min").get<double>();
      st.max = r.at("max").get<double>();
      st.stdev = r.at("stdev").get<double>();
      st.rss = r.at("rss").get<double>();
      st.pct_zero = r.at("pct_zero").get<double>();
      st.gate_95 = r.at("gate_95").get<bool>();
      b.residuals.push_back(std::move(st));
    }
    const auto& ranked = j.at("ranked_rules");
    for (const auto& r : ranked.at("rules")) {
      residuals::RankedRule rr;
      rr.squid = r.at("squid").get<std::string>();
      if (!r.at("kind").is_null()) rr.kind = enum_from<RuleKind>(r.at("kind"), violations::parse_rule_kind);
      if (!r.at("severity").is_null()) {
        rr.severity = enum_from<Severity>(r.at("severity"), violations::parse_severity);
      }
      rr.importance = opt_double(r.at("importance"));
      rr.pct_zero = opt_double(r.at("pct_zero"));
      rr.gate_95 = r.at("gate_95").get<bool>();
      rr.fault_prone = r.at("fault_prone").get<bool>();
      rr.missing_data = r.at("missing_data").get<bool>();
      b.ranked.rules.push_back(std::move(rr));
    }
    for (auto k : kKinds) {
      b.ranked.fault_prone_by_kind[static_cast<std::size_t>(k)] =
          ranked.at("fault_prone_by_kind").at(std::string(violations::to_string(k))).get<std::size_t>();
    }
    for (auto sv : kSeverities) {
      b.ranked.fault_prone_by_severity[static_cast<std::size_t>(sv)] =
          ranked.at("fault_prone_by_severity").at(std::string(violations::to_string(sv))).get<std::size_t>();
    }
    const auto& base = j.at("bug_rule_baseline");
    b.baseline.cm = {base.at("tp").get<std::uint64_t>(), base.at("fp").get<std::uint64_t>(),
                     base.at("tn").get<std::uint64_t>(), base.at("fn").get<std::uint64_t>()};
    b.baseline.metrics = metrics_from(base.at("metrics"));
    return b;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

namespace {

std::string num(double v) { return fmt::format("{:.3f}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

void metric_rows(std::ostringstream& md, const std::vector<const eval::MetricsReport*>& cols) {
  auto row = [&](const char* name, auto get) {
    md << "| " << name;
    for (const auto* m : cols) md << " | " << get(*m);
    md << " |\n";
  };
  row("Precision", [](const auto& m) { return num(m.precision); });
  row("Recall", [](const auto& m) { return num(m.recall); });
  row("MCC", [](const auto& m) { return num(m.mcc); });
  row("F-measure", [](const auto& m) { return num(m.f_measure); });
  row("TNR", [](const auto& m) { return num(m.tnr); });
  row("FPR", [](const auto& m) { return num(m.fpr); });
  row("FNR", [](const auto& m) { return num(m.fnr); });
  row("AUC", [](const auto& m) { return num(m.auc); });
}

}  // namespace

std::string render_markdown(const ReportBundle& b) {
  std::ostringstream md;
  md << "# Fault-proneness of static-analysis rules\n\n";
  md << fmt::format("Projects: {}. Commits: {}. Fault-inducing commits: {}. Fixed issues linked: {}.\n\n",
                    b.n_projects, b.n_commits, b.n_inducing, b.n_fixed_issues);

  md << "## Model comparison\n\nMean over temporal folds.\n\n| Measure";
  std::vector<const eval::MetricsReport*> cols;
  for (const auto& m : b.models) {
    md << " | " << learners::display_name(m.kind);
    cols.push_back(&m.mean);
  }
  md << " |\n|---";
  for (std::size_t i = 0; i < b.models.size(); ++i) md << "|---:";
  md << "|\n";
  metric_rows(md, cols);
  if (b.best_model) {
    md << "\nBest model by mean AUC: " << learners::display_name(*b.best_model) << fmt::format(" (AUC {}).\n", num(b.importance.baseline_auc));
  } else {
    md << "\nNo model has a defined AUC.\n";
  }

  md << "\n## Rules by importance\n\n";
  std::map<std::string, const residuals::ResidualStats*> stats;
  for (const auto& s : b.residuals) stats[s.squid] = &s;
  bool any = false;
  for (const auto& r : b.ranked.rules) {
    if (!r.importance || *r.importance <= 0.0) continue;
    if (!any) {
      md << "| Squid | Severity | Type | Pairs | Mean | Max | Min | Stdev | RSS | Zero residuals (%) | Importance | Res. > 95% |\n";
      md << "|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|:---:|\n";
      any = true;
    }
    const auto* s = stats.count(r.squid) ? stats[r.squid] : nullptr;
    md << "| " << r.squid << " | " << (r.severity ? violations::to_string(*r.severity) : "?") << " | "
       << (r.kind ? violations::to_string(*r.kind) : "?") << " | ";
    if (s) {
      md << s->n_pairs << " | " << num(s->mean) << " | " << num(s->max) << " | " << num(s->min) << " | "
         << num(s->stdev) << " | " << num(s->rss) << " | " << num(s->pct_zero);
    } else {
      md << "n/a | n/a | n/a | n/a | n/a | n/a | n/a";
    }
    md << " | " << num(*r.importance) << " | " << (r.gate_95 ? "yes" : "") << " |\n";
  }
  if (!any) md << "No rule has positive importance.\n";

  md << "\n## Fault-prone rules\n\n";
  if (b.ranked.fault_prone_count() == 0) {
    md << "no rule passed both gates\n";
  } else {
    for (const auto& r : b.ranked.rules) {
      if (r.fault_prone) md << "- " << r.squid << " (importance " << num(*r.importance) << ")\n";
    }
    md << "\n| Type | Fault-prone rules |\n|---|---:|\n";
    for (auto k : kKinds) {
      md << "| " << violations::to_string(k) << " | " << b.ranked.fault_prone_by_kind[static_cast<std::size_t>(k)] << " |\n";
    }
    md << "\n| Severity | Fault-prone rules |\n|---|---:|\n";
    for (auto s : kSeverities) {
      md << "| " << violations::to_string(s) << " | " << b.ranked.fault_prone_by_severity[static_cast<std::size_t>(s)]
         << " |\n";
    }
  }

  md << "\n## BUG-rule baseline\n\nPredicts a commit fault-inducing when it introduces a BUG-type violation.\n\n";
  md << "| Predicted | Actual IND | Actual NOT IND |\n|---|---:|---:|\n";
  md << "| IND | " << b.baseline.cm.tp << " | " << b.baseline.cm.fp << " |\n";
  md << "| NOT IND | " << b.baseline.cm.fn << " | " << b.baseline.cm.tn << " |\n\n";
  md << "| Measure | BUG rules |\n|---|---:|\n";
  metric_rows(md, {&b.baseline.metrics});
  return md.str();
}

void emit_report(const ReportBundle& bundle, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw InputError("cannot create output directory " + out_dir.string());
  detail::AtomicFile js(out_dir / "report.json");
  js.stream() << to_json(bundle).dump(2) << '\n';
  js.commit();
  detail::AtomicFile md(out_dir / "report.md");
  md.stream() << render_markdown(bundle);
  md.commit();
}

std::vector<ModelSummary> read_metrics_csv(const fs::path& path) {
  csv::Table t = csv::read(path);
  const std::vector<std::string> want{"model", "fold", "precision", "recall", "mcc",
                                      "f_measure", "tnr", "fpr", "fnr", "auc"};
  if (t.header != want) throw InputError(path.string() + ": unexpected metrics header");
  std::vector<ModelSummary> out;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    if (f.size() != want.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    auto kind = learners::parse_model_kind(f[0]);
    if (!kind) throw InputError(path.string() + " line " + std::to_string(row.line) + ": unknown model");
    if (out.empty() || out.back().kind != *kind) out.push_back({*kind, {}, {}});
    eval::MetricsReport m;
    m.precision = csv::parse_double(f[2]);
    m.recall = csv::parse_double(f[3]);
    m.mcc = csv::parse_double(f[4]);
    m.f_measure = csv::parse_double(f[5]);
    m.tnr = csv::parse_double(f[6]);
    m.fpr = csv::parse_double(f[7]);
    m.fnr = csv::parse_double(f[8]);
    if (!f[9].empty()) m.auc = csv::parse_double(f[9]);
    if (f[1] == "mean") {
      out.back().mean = m;
    } else {
      out.back().folds.push_back(m);
    }
  }
  return out;
}

}  // namespace faultrank::pipeline
