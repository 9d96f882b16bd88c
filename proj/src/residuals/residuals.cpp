#include "faultrank/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "faultrank/common.hpp"
#include "faultrank/csv.hpp"

namespace faultrank::residuals {

using violations::RuleKind;
using violations::Severity;

std::vector<CommitFixPair> build_pairs(std::span<const szz::InducingCandidate> candidates,
                                       std::span<const issues::FixLink> fixlinks) {
  std::set<std::pair<std::string, std::string>> linked;
  for (const auto& l : fixlinks) {
    for (const auto& c : l.fix_commits) linked.emplace(l.issue_key, c);
  }
  std::vector<CommitFixPair> out;
  for (const auto& c : candidates) {
    if (c.date_filtered || !linked.count({c.issue_key, c.fix_commit})) continue;
    out.push_back({c.issue_key, c.inducing_commit, c.fix_commit, c.file});
  }
  std::sort(out.begin(), out.end(), [](const CommitFixPair& a, const CommitFixPair& b) {
    if (a.issue_key != b.issue_key) return issues::issue_key_less(a.issue_key, b.issue_key);
    return std::tie(a.inducing_commit, a.fixing_commit, a.file) <
           std::tie(b.inducing_commit, b.fixing_commit, b.file);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<long> compute_residual(std::string_view squid, const CommitFixPair& pair,
                                     const violations::DeltaIndex& deltas) {
  long ind = deltas.signed_delta(pair.inducing_commit, pair.file, squid);
  if (ind <= 0) return std::nullopt;
  return ind + deltas.signed_delta(pair.fixing_commit, pair.file, squid);
}

ResidualStats residual_stats(std::string_view squid, std::span<const long> residuals) {
  ResidualStats s;
  s.squid = std::string(squid);
  s.n_pairs = residuals.size();
  if (residuals.empty()) return s;
  const double n = static_cast<double>(residuals.size());
  double sum = 0.0;
  std::size_t zeros = 0;
  s.min = s.max = static_cast<double>(residuals[0]);
  for (long r : residuals) {
    double v = static_cast<double>(r);
    sum += v;
    s.rss += v * v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    if (r == 0) ++zeros;
  }
  s.mean = sum / n;
  double var = 0.0;
  for (long r : residuals) var += (static_cast<double>(r) - s.mean) * (static_cast<double>(r) - s.mean);
  s.stdev = std::sqrt(var / n);
  s.pct_zero = 100.0 * static_cast<double>(zeros) / n;
  s.gate_95 = s.pct_zero > 95.0;
  return s;
}

std::vector<ResidualStats> analyze_residuals(std::span<const CommitFixPair> pairs,
                                             std::span<const violations::ViolationDelta> deltas,
                                             const violations::RuleCatalog& catalog) {
  violations::DeltaIndex index(deltas);
  std::vector<ResidualStats> out;
  out.reserve(catalog.size());
  std::vector<long> values;
  for (const auto& rule : catalog.rules()) {
    values.clear();
    for (const auto& p : pairs) {
      if (auto r = compute_residual(rule.squid, p, index)) values.push_back(*r);
    }
    out.push_back(residual_stats(rule.squid, values));
  }
  return out;
}

std::size_t RankedRules::fault_prone_count() const {
  std::size_t n = 0;
  for (auto c : fault_prone_by_kind) n += c;
  return n;
}

RankedRules rank_rules(std::span<const eval::FeatureImportance> importance,
                       std::span<const ResidualStats> stats, const violations::RuleCatalog& catalog) {
  std::map<std::string, RankedRule> merged;
  for (const auto& i : importance) {
    auto& r = merged[i.squid];
    r.squid = i.squid;
    r.importance = i.importance;
  }
  for (const auto& s : stats) {
    auto& r = merged[s.squid];
    r.squid = s.squid;
    r.pct_zero = s.pct_zero;
    r.gate_95 = s.gate_95;
  }

  RankedRules out;
  for (auto& [squid, r] : merged) {
    if (const auto* d = catalog.find(squid)) {
      r.kind = d->kind;
      r.severity = d->severity;
    }
    r.missing_data = !r.importance || !r.pct_zero || !r.kind;
    r.fault_prone = !r.missing_data && *r.importance > 0.0 && r.gate_95;
    if (r.fault_prone) {
      ++out.fault_prone_by_kind[static_cast<std::size_t>(*r.kind)];
      ++out.fault_prone_by_severity[static_cast<std::size_t>(*r.severity)];
    }
    out.rules.push_back(std::move(r));
  }
  std::stable_sort(out.rules.begin(), out.rules.end(), [](const RankedRule& a, const RankedRule& b) {
    if (a.importance.has_value() != b.importance.has_value()) return a.importance.has_value();
    if (a.importance && *a.importance != *b.importance) return *a.importance > *b.importance;
    return a.squid < b.squid;
  });
  return out;
}

void write_pairs_csv(std::ostream& out, std::span<const CommitFixPair> pairs) {
  csv::Writer w(out);
  w.row({"issue", "inducing_commit", "fixing_commit", "file"});
  for (const auto& p : pairs) w.row({p.issue_key, p.inducing_commit, p.fixing_commit, p.file});
}

void write_residuals_csv(std::ostream& out, std::span<const ResidualStats> stats) {
  using csv::format_double;
  csv::Writer w(out);
  w.row({"squid", "n_pairs", "mean", "min", "max", "stdev", "rss", "pct_zero", "gate_95"});
  for (const auto& s : stats) {
    w.row({s.squid, std::to_string(s.n_pairs), format_double(s.mean), format_double(s.min),
           format_double(s.max), format_double(s.stdev), format_double(s.rss), format_double(s.pct_zero),
           s.gate_95 ? "1" : "0"});
  }
}

std::vector<ResidualStats> read_residuals_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  const std::vector<std::string> want{"squid", "n_pairs", "mean", "min", "max",
                                      "stdev", "rss",     "pct_zero", "gate_95"};
  if (t.header != want) throw InputError(path.string() + ": unexpected residuals header");
  std::vector<ResidualStats> out;
  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    if (f.size() != want.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    ResidualStats s;
    s.squid = f[0];
    s.n_pairs = static_cast<std::size_t>(csv::parse_int(f[1]));
    s.mean = csv::parse_double(f[2]);
    s.min = csv::parse_double(f[3]);
    s.max = csv::parse_double(f[4]);
    s.stdev = csv::parse_double(f[5]);
    s.rss = csv::parse_double(f[6]);
    s.pct_zero = csv::parse_double(f[7]);
    s.gate_95 = f[8] == "1";
    out.push_back(std::move(s));
  }
  return out;
}

void write_ranked_csv(std::ostream& out, const RankedRules& ranked) {
  csv::Writer w(out);
  w.row({"squid", "kind", "severity", "importance", "pct_zero", "gate_95", "fault_prone"});
  for (const auto& r : ranked.rules) {
    w.row({r.squid, r.kind ? std::string(violations::to_string(*r.kind)) : "",
           r.severity ? std::string(violations::to_string(*r.severity)) : "",
           r.importance ? csv::format_double(*r.importance) : "",
           r.pct_zero ? csv::format_double(*r.pct_zero) : "", r.gate_95 ? "1" : "0",
           r.fault_prone ? "1" : "0"});
  }
}

}  // namespace faultrank::residuals
