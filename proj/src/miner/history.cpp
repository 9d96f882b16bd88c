#include <algorithm>
#include <istream>
#include <ostream>

#include "faultrank/miner.hpp"

namespace faultrank::miner {

namespace {

bool contains_line(const std::vector<DiffLine>& lines, std::size_t number) {
  auto it = std::lower_bound(lines.begin(), lines.end(), number,
                             [](const DiffLine& l, std::size_t n) { return l.number < n; });
  return it != lines.end() && it->number == number;
}

// Line number in the old file of an unchanged new-file line.
std::size_t map_to_old(const FileDiff& diff, std::size_t new_line) {
  std::size_t added_before =
      static_cast<std::size_t>(std::lower_bound(diff.added.begin(), diff.added.end(), new_line,
                                                [](const DiffLine& l, std::size_t n) {
                                                  return l.number < n;
                                                }) -
                               diff.added.begin());
  std::size_t old_line = new_line - added_before;
  for (const auto& d : diff.deleted) {
    if (d.number <= old_line) {
      ++old_line;
    } else {
      break;
    }
  }
  return old_line;
}

}  // namespace

std::vector<std::string> apply_diff(std::span<const std::string> old_lines, const FileDiff& diff) {
  const std::size_t new_size = old_lines.size() + diff.added.size() - diff.deleted.size();
  std::vector<std::string> out;
  out.reserve(new_size);
  std::size_t old_pos = 0;  // 0-based cursor into old_lines
  std::size_t del = 0, add = 0;
  for (std::size_t n = 1; n <= new_size; ++n) {
    if (add < diff.added.size() && diff.added[add].number == n) {
      out.push_back(diff.added[add++].text);
      continue;
    }
    while (del < diff.deleted.size() && diff.deleted[del].number == old_pos + 1) {
      ++old_pos;
      ++del;
    }
    if (old_pos >= old_lines.size()) throw ConsistencyError("diff does not apply to " + diff.path());
    out.push_back(old_lines[old_pos++]);
  }
  return out;
}

History::History(std::vector<CommitRecord> commits) : commits_(std::move(commits)) {
  positions_.reserve(commits_.size());
  file_index_.resize(commits_.size());
  for (std::size_t i = 0; i < commits_.size(); ++i) {
    const auto& c = commits_[i];
    for (const auto& p : c.parents) {
      if (!positions_.count(p)) {
        throw ConsistencyError("commit " + c.hash + " precedes its parent " + p);
      }
    }
    if (!positions_.emplace(c.hash, i).second) {
      throw ConsistencyError("duplicate commit " + c.hash);
    }
    for (std::size_t d = 0; d < c.diffs.size(); ++d) {
      const auto& diff = c.diffs[d];
      if (!diff.new_path.empty()) file_index_[i].by_new_path.emplace(diff.new_path, d);
      if (!diff.old_path.empty()) file_index_[i].by_old_path.emplace(diff.old_path, d);
    }
  }
}

const CommitRecord* History::find(std::string_view hash) const {
  auto it = positions_.find(std::string(hash));
  return it == positions_.end() ? nullptr : &commits_[it->second];
}

const CommitRecord& History::at(std::string_view hash) const {
  if (const auto* c = find(hash)) return *c;
  throw NotFoundError("unknown commit " + std::string(hash));
}

std::optional<std::size_t> History::position(std::string_view hash) const {
  auto it = positions_.find(std::string(hash));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

std::string History::line_blame(std::string_view path, std::size_t line, std::string_view at) const {
  std::size_t lines[] = {line};
  return blame_lines(path, lines, at).front().commit;
}

std::vector<BlameResult> History::blame_lines(std::string_view path,
                                              std::span<const std::size_t> lines,
                                              std::string_view at) const {
  auto start = position(at);
  if (!start) throw NotFoundError("unknown commit " + std::string(at));

  struct Pending {
    std::size_t slot;
    std::size_t line;
  };
  std::vector<BlameResult> results(lines.size());
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == 0) throw RangeError("line numbers start at 1");
    pending.push_back({i, lines[i]});
  }

  std::string current_path(path);
  std::size_t pos = *start;
  while (!pending.empty()) {
    const CommitRecord& c = commits_[pos];
    const Index& idx = file_index_[pos];
    auto it = idx.by_new_path.find(current_path);
    if (it == idx.by_new_path.end()) {
      if (idx.by_old_path.count(current_path)) {
        throw NotFoundError(current_path + " does not exist at " + c.hash);
      }
      if (c.is_root()) {
        throw NotFoundError(std::string(path) + " does not exist at " + std::string(at));
      }
      pos = *position(c.parents.front());
      continue;
    }
    const FileDiff& diff = c.diffs[it->second];
    std::vector<Pending> still;
    for (const auto& p : pending) {
      if (contains_line(diff.added, p.line)) {
        results[p.slot] = BlameResult{c.hash, current_path, p.line};
      } else {
        still.push_back(p);
      }
    }
    pending = std::move(still);
    if (pending.empty()) break;
    if (diff.old_path.empty() || c.is_root()) {
      throw RangeError("line " + std::to_string(lines[pending.front().slot]) + " is beyond the end of " +
                       std::string(path) + " at " + std::string(at));
    }
    for (auto& p : pending) p.line = map_to_old(diff, p.line);
    current_path = diff.old_path;
    pos = *position(c.parents.front());
  }
  return results;
}

std::map<std::string, std::vector<std::string>> History::snapshot(std::string_view at) const {
  auto start = position(at);
  if (!start) throw NotFoundError("unknown commit " + std::string(at));
  std::vector<std::size_t> chain;
  for (std::size_t pos = *start;;) {
    chain.push_back(pos);
    const auto& c = commits_[pos];
    if (c.is_root()) break;
    pos = *position(c.parents.front());
  }
  std::map<std::string, std::vector<std::string>> files;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& c = commits_[*it];
    // Read all old contents first so swaps and renames within one commit apply cleanly.
    std::vector<std::vector<std::string>> updated(c.diffs.size());
    for (std::size_t d = 0; d < c.diffs.size(); ++d) {
      const auto& diff = c.diffs[d];
      static const std::vector<std::string> kEmpty;
      const std::vector<std::string>* old = &kEmpty;
      if (!diff.old_path.empty()) {
        auto f = files.find(diff.old_path);
        if (f == files.end()) throw ConsistencyError(diff.old_path + " missing before " + c.hash);
        old = &f->second;
      }
      updated[d] = apply_diff(*old, diff);
    }
    for (const auto& diff : c.diffs) {
      if (!diff.old_path.empty()) files.erase(diff.old_path);
    }
    for (std::size_t d = 0; d < c.diffs.size(); ++d) {
      if (!c.diffs[d].new_path.empty()) files[c.diffs[d].new_path] = std::move(updated[d]);
    }
  }
  return files;
}

nlohmann::json to_json(const CommitRecord& commit) {
  nlohmann::json diffs = nlohmann::json::array();
  for (const auto& d : commit.diffs) {
    nlohmann::json added = nlohmann::json::array();
    for (const auto& l : d.added) added.push_back({l.number, l.text});
    nlohmann::json deleted = nlohmann::json::array();
    for (const auto& l : d.deleted) deleted.push_back({l.number, l.text});
    diffs.push_back({{"old_path", d.old_path},
                     {"new_path", d.new_path},
                     {"added", std::move(added)},
                     {"deleted", std::move(deleted)}});
  }
  return {{"hash", commit.hash},           {"parents", commit.parents},
          {"author", commit.author},       {"timestamp", commit.timestamp},
          {"message", commit.message},     {"diffs", std::move(diffs)}};
}

CommitRecord commit_from_json(const nlohmann::json& j) {
  CommitRecord c;
  c.hash = j.at("hash").get<std::string>();
  c.parents = j.at("parents").get<std::vector<std::string>>();
  c.author = j.at("author").get<std::string>();
  c.timestamp = j.at("timestamp").get<Timestamp>();
  c.message = j.at("message").get<std::string>();
  for (const auto& jd : j.at("diffs")) {
    FileDiff d;
    d.old_path = jd.at("old_path").get<std::string>();
    d.new_path = jd.at("new_path").get<std::string>();
    for (const auto& l : jd.at("added")) d.added.push_back({l.at(0).get<std::size_t>(), l.at(1).get<std::string>()});
    for (const auto& l : jd.at("deleted")) d.deleted.push_back({l.at(0).get<std::size_t>(), l.at(1).get<std::string>()});
    c.diffs.push_back(std::move(d));
  }
  return c;
}

void write_commits_jsonl(std::ostream& out, std::span<const CommitRecord> commits,
                         std::string_view project) {
  for (const auto& c : commits) {
    nlohmann::json j = to_json(c);
    if (!project.empty()) j["project"] = project;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

std::vector<ProjectCommits> read_commits_jsonl(std::istream& in) {
  std::vector<ProjectCommits> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("commits.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
    std::string project = j.value("project", std::string());
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ProjectCommits& g) { return g.project == project; });
    if (it == groups.end()) {
      groups.push_back({project, {}});
      it = groups.end() - 1;
    }
    try {
      it->commits.push_back(commit_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("commits.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return groups;
}

}  // namespace faultrank::miner
