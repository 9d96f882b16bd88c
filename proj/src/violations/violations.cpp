#include "faultrank/violations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "faultrank/csv.hpp"

namespace faultrank::violations {

namespace {

std::string upper(std::string_view s) {
  std::string out = trim(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot read ") + what + " " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string key_of(std::string_view commit, std::string_view file, std::string_view rule) {
  std::string k;
  k.reserve(commit.size() + file.size() + rule.size() + 2);
  k.append(commit).push_back('\x1f');
  k.append(file).push_back('\x1f');
  k.append(rule);
  return k;
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::Bug: return "BUG";
    case RuleKind::CodeSmell: return "CODE_SMELL";
    case RuleKind::Vulnerability: return "VULNERABILITY";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Blocker: return "BLOCKER";
    case Severity::Critical: return "CRITICAL";
    case Severity::Major: return "MAJOR";
    case Severity::Minor: return "MINOR";
    case Severity::Info: return "INFO";
  }
  return "?";
}

std::optional<RuleKind> parse_rule_kind(std::string_view text) {
  std::string t = upper(text);
  if (t == "BUG") return RuleKind::Bug;
  if (t == "CODE_SMELL") return RuleKind::CodeSmell;
  if (t == "VULNERABILITY") return RuleKind::Vulnerability;
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view text) {
  std::string t = upper(text);
  if (t == "BLOCKER") return Severity::Blocker;
  if (t == "CRITICAL") return Severity::Critical;
  if (t == "MAJOR") return Severity::Major;
  if (t == "MINOR") return Severity::Minor;
  if (t == "INFO") return Severity::Info;
  return std::nullopt;
}

RuleCatalog::RuleCatalog(std::vector<RuleDescriptor> rules) : rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (!index_.emplace(rules_[i].squid, i).second) {
      throw InputError("duplicate rule " + rules_[i].squid);
    }
  }
}

const RuleDescriptor* RuleCatalog::find(std::string_view squid) const {
  auto it = index_.find(std::string(squid));
  return it == index_.end() ? nullptr : &rules_[it->second];
}

std::optional<std::size_t> RuleCatalog::column(std::string_view squid) const {
  auto it = index_.find(std::string(squid));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RuleCatalog parse_rule_catalog(std::string_view text) {
  csv::Table t = csv::parse(text);
  std::size_t sc = t.column("squid"), kc = t.column("kind"), vc = t.column("severity");
  if (sc == csv::Table::npos || kc == csv::Table::npos || vc == csv::Table::npos) {
    throw InputError("rules.csv must have columns squid,kind,severity");
  }
  std::vector<RuleDescriptor> rules;
  for (const auto& row : t.rows) {
    std::string where = "rules.csv line " + std::to_string(row.line);
    if (row.fields.size() != t.header.size()) throw InputError(where + ": wrong field count");
    RuleDescriptor r;
    r.squid = trim(row.fields[sc]);
    if (r.squid.empty()) throw InputError(where + ": empty squid");
    auto kind = parse_rule_kind(row.fields[kc]);
    if (!kind) throw InputError(where + ": unknown rule kind '" + row.fields[kc] + "'");
    auto sev = parse_severity(row.fields[vc]);
    if (!sev) throw InputError(where + ": unknown severity '" + row.fields[vc] + "'");
    r.kind = *kind;
    r.severity = *sev;
    rules.push_back(std::move(r));
  }
  return RuleCatalog(std::move(rules));
}

RuleCatalog load_rule_catalog(const std::filesystem::path& path) {
  return parse_rule_catalog(read_text(path, "rule catalog"));
}

Parsed<ViolationEvent> parse_violation_events(std::string_view text, const CommitOrder& order) {
  Parsed<ViolationEvent> out;
  csv::Table t = csv::parse(text);
  if (t.header.empty()) return out;
  std::size_t sc = t.column("squid"), fc = t.column("file"), oc = t.column("opened_commit"),
              cc = t.column("closed_commit");
  if (sc == csv::Table::npos || fc == csv::Table::npos || oc == csv::Table::npos ||
      cc == csv::Table::npos) {
    throw InputError("violations.csv must have columns squid,file,opened_commit,closed_commit");
  }
  for (const auto& row : t.rows) {
    std::string where = "line " + std::to_string(row.line) + ": ";
    if (row.fields.size() != t.header.size()) {
      out.warnings.push_back(where + "wrong field count");
      continue;
    }
    ViolationEvent e;
    e.rule = trim(row.fields[sc]);
    e.file = row.fields[fc];
    e.opened_at = trim(row.fields[oc]);
    std::string closed = trim(row.fields[cc]);
    if (!closed.empty()) e.closed_at = closed;
    auto opened = order.find(e.opened_at);
    if (opened == order.end()) {
      out.warnings.push_back(where + "unknown commit " + e.opened_at);
      continue;
    }
    if (e.closed_at) {
      auto closed_it = order.find(*e.closed_at);
      if (closed_it == order.end()) {
        out.warnings.push_back(where + "unknown commit " + *e.closed_at);
        continue;
      }
      if (closed_it->second <= opened->second) {
        out.warnings.push_back(where + "closed at " + *e.closed_at + " before being opened");
        continue;
      }
    }
    out.items.push_back(std::move(e));
  }
  return out;
}

Parsed<ViolationEvent> load_violation_events(const std::filesystem::path& path, const CommitOrder& order) {
  return parse_violation_events(read_text(path, "violations file"), order);
}

std::vector<ViolationDelta> compute_deltas(std::span<const ViolationEvent> events) {
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<long, long>> counts;
  for (const auto& e : events) {
    ++counts[{e.opened_at, e.file, e.rule}].first;
    if (e.closed_at) ++counts[{*e.closed_at, e.file, e.rule}].second;
  }
  std::vector<ViolationDelta> out;
  out.reserve(counts.size());
  for (const auto& [key, c] : counts) {
    if (c.first == 0 && c.second == 0) continue;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c.first, c.second});
  }
  return out;
}

void write_deltas_csv(std::ostream& out, std::span<const ViolationDelta> deltas) {
  csv::Writer w(out);
  w.row({"commit", "file", "squid", "introduced", "removed"});
  for (const auto& d : deltas) {
    w.row({d.commit, d.file, d.rule, std::to_string(d.introduced), std::to_string(d.removed)});
  }
}

std::vector<ViolationDelta> read_deltas_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  const char* names[] = {"commit", "file", "squid", "introduced", "removed"};
  std::size_t cols[5];
  for (int i = 0; i < 5; ++i) {
    cols[i] = t.column(names[i]);
    if (cols[i] == csv::Table::npos) throw InputError(path.string() + " lacks column " + names[i]);
  }
  std::vector<ViolationDelta> out;
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    out.push_back({row.fields[cols[0]], row.fields[cols[1]], row.fields[cols[2]],
                   static_cast<long>(csv::parse_int(row.fields[cols[3]])),
                   static_cast<long>(csv::parse_int(row.fields[cols[4]]))});
  }
  return out;
}

DeltaIndex::DeltaIndex(std::span<const ViolationDelta> deltas) {
  for (const auto& d : deltas) {
    by_key_[key_of(d.commit, d.file, d.rule)] += d.signed_delta();
    if (d.introduced > 0) by_commit_[d.commit][d.rule] += d.introduced;
  }
}

long DeltaIndex::signed_delta(std::string_view commit, std::string_view file, std::string_view rule) const {
  auto it = by_key_.find(key_of(commit, file, rule));
  return it == by_key_.end() ? 0 : it->second;
}

const std::unordered_map<std::string, long>* DeltaIndex::introduced_by_rule(std::string_view commit) const {
  auto it = by_commit_.find(std::string(commit));
  return it == by_commit_.end() ? nullptr : &it->second;
}

}  // namespace faultrank::violations
