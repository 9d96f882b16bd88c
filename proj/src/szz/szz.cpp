#include "faultrank/szz.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "faultrank/csv.hpp"

namespace faultrank::szz {

bool is_cosmetic_line(std::string_view line) {
  std::string t = trim(line);
  if (t.empty()) return true;
  auto starts = [&](std::string_view p) { return t.compare(0, p.size(), p) == 0; };
  return starts("//") || starts("/*") || starts("*");  // "*/" starts with '*'
}

std::vector<InducingCandidate> identify_inducing(const miner::CommitRecord& fix,
                                                 const issues::IssueRecord& issue,
                                                 const miner::History& history) {
  if (fix.is_root()) {
    spdlog::warn("fix commit {} for {} has no parent; nothing to blame", fix.hash, issue.key);
    return {};
  }
  const std::string& parent = fix.parents.front();
  // (inducing commit, file) -> candidate with the lowest line
  std::map<std::pair<std::string, std::string>, InducingCandidate> found;
  for (const auto& diff : fix.diffs) {
    if (diff.old_path.empty()) continue;
    std::vector<std::size_t> lines;
    for (const auto& d : diff.deleted) {
      if (!is_cosmetic_line(d.text)) lines.push_back(d.number);
    }
    if (lines.empty()) continue;
    auto blamed = history.blame_lines(diff.old_path, lines, parent);
    for (std::size_t i = 0; i < blamed.size(); ++i) {
      const auto& inducing = history.at(blamed[i].commit);
      auto key = std::make_pair(blamed[i].commit, diff.old_path);
      auto it = found.find(key);
      if (it != found.end() && it->second.line <= lines[i]) continue;
      found[key] = InducingCandidate{issue.key, fix.hash, blamed[i].commit, diff.old_path, lines[i],
                                     inducing.timestamp > issue.created};
    }
  }
  std::vector<InducingCandidate> out;
  out.reserve(found.size());
  for (auto& [key, cand] : found) out.push_back(std::move(cand));
  return out;
}

std::vector<InducingCandidate> identify_all(std::span<const issues::FixLink> links,
                                            std::span<const issues::IssueRecord> issue_list,
                                            const miner::History& history) {
  std::unordered_map<std::string, const issues::IssueRecord*> by_key;
  for (const auto& i : issue_list) by_key.emplace(i.key, &i);
  std::vector<InducingCandidate> out;
  for (const auto& link : links) {
    auto it = by_key.find(link.issue_key);
    if (it == by_key.end()) continue;
    for (const auto& hash : link.fix_commits) {
      const auto* fix = history.find(hash);
      if (!fix) continue;
      auto cands = identify_inducing(*fix, *it->second, history);
      out.insert(out.end(), std::make_move_iterator(cands.begin()), std::make_move_iterator(cands.end()));
    }
  }
  return out;
}

std::vector<FaultLabel> label_commits(std::span<const miner::CommitRecord> all,
                                      std::span<const InducingCandidate> candidates) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i].hash, i);
  std::vector<std::set<std::string>> keys(all.size());
  for (const auto& c : candidates) {
    auto it = index.find(c.inducing_commit);
    if (it == index.end()) throw ConsistencyError("candidate references unknown commit " + c.inducing_commit);
    if (!index.count(c.fix_commit)) throw ConsistencyError("candidate references unknown commit " + c.fix_commit);
    if (!c.date_filtered) keys[it->second].insert(c.issue_key);
  }
  std::vector<FaultLabel> labels;
  labels.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::vector<std::string> k(keys[i].begin(), keys[i].end());
    std::sort(k.begin(), k.end(), [](const std::string& a, const std::string& b) {
      return issues::issue_key_less(a, b);
    });
    labels.push_back({all[i].hash, !k.empty(), std::move(k)});
  }
  return labels;
}

void write_candidates_csv(std::ostream& out, std::span<const InducingCandidate> candidates) {
  csv::Writer w(out);
  w.row({"issue_key", "fix_commit", "inducing_commit", "file", "line", "date_filtered"});
  for (const auto& c : candidates) {
    w.row({c.issue_key, c.fix_commit, c.inducing_commit, c.file, std::to_string(c.line),
           c.date_filtered ? "1" : "0"});
  }
}

std::vector<InducingCandidate> read_candidates_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  const char* names[] = {"issue_key", "fix_commit", "inducing_commit", "file", "line", "date_filtered"};
  std::size_t cols[6];
  for (int i = 0; i < 6; ++i) {
    cols[i] = t.column(names[i]);
    if (cols[i] == csv::Table::npos) throw InputError(path.string() + " lacks column " + names[i]);
  }
  std::vector<InducingCandidate> out;
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    InducingCandidate c;
    c.issue_key = row.fields[cols[0]];
    c.fix_commit = row.fields[cols[1]];
    c.inducing_commit = row.fields[cols[2]];
    c.file = row.fields[cols[3]];
    c.line = static_cast<std::size_t>(csv::parse_int(row.fields[cols[4]]));
    c.date_filtered = row.fields[cols[5]] == "1";
    out.push_back(std::move(c));
  }
  return out;
}

void write_labels_csv(std::ostream& out, std::span<const FaultLabel> labels) {
  csv::Writer w(out);
  w.row({"commit_hash", "inducing", "issue_keys"});
  for (const auto& l : labels) {
    std::string keys;
    for (std::size_t i = 0; i < l.issue_keys.size(); ++i) {
      if (i) keys += ';';
      keys += l.issue_keys[i];
    }
    w.row({l.commit, l.inducing ? "1" : "0", keys});
  }
}

std::vector<FaultLabel> read_labels_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  std::size_t hc = t.column("commit_hash"), ic = t.column("inducing"), kc = t.column("issue_keys");
  if (hc == csv::Table::npos || ic == csv::Table::npos || kc == csv::Table::npos) {
    throw InputError(path.string() + ": expected columns commit_hash,inducing,issue_keys");
  }
  std::vector<FaultLabel> out;
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw InputError(path.string() + " line " + std::to_string(row.line) + ": wrong field count");
    }
    FaultLabel l;
    l.commit = row.fields[hc];
    l.inducing = row.fields[ic] == "1";
    std::string_view keys = row.fields[kc];
    std::size_t start = 0;
    while (start < keys.size()) {
      std::size_t semi = keys.find(';', start);
      if (semi == std::string_view::npos) semi = keys.size();
      if (semi > start) l.issue_keys.emplace_back(keys.substr(start, semi - start));
      start = semi + 1;
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace faultrank::szz
