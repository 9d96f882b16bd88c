#include <algorithm>
#include <queue>
#include <set>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "faultrank/line_diff.hpp"
#include "faultrank/miner.hpp"
#include "process.hpp"

namespace faultrank::miner {

namespace {

constexpr double kRenameThreshold = 0.6;
constexpr std::size_t kBinarySniffBytes = 8000;
constexpr std::size_t kCommitsPerBatch = 256;
constexpr std::size_t kMaxRenamePairs = 250000;

struct RawCommit {
  std::string hash;
  std::vector<std::string> parents;
  Timestamp timestamp = 0;
  std::string author;
  std::string message;
};

// One entry of `git diff-tree -r -z` output.
struct RawChange {
  std::string old_mode, new_mode;
  std::string old_blob, new_blob;
  char status = 0;
  std::string path;
};

bool is_regular(const std::string& mode) { return mode == "100644" || mode == "100755"; }

bool is_null_id(const std::string& id) {
  return std::all_of(id.begin(), id.end(), [](char c) { return c == '0'; });
}

bool looks_binary(const std::string& content) {
  return content.find('\0', 0) < std::min(content.size(), kBinarySniffBytes);
}

std::vector<std::string_view> split_nul(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t z = s.find('\0', start);
    if (z == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, z - start));
    start = z + 1;
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

class GitRepo {
 public:
  explicit GitRepo(std::filesystem::path path) : path_(std::move(path)) {}

  detail::ProcessResult run(std::vector<std::string> args,
                            const std::optional<std::filesystem::path>& in = std::nullopt) const {
    std::vector<std::string> argv{"git", "-C", path_.string(), "-c", "core.quotepath=off"};
    argv.insert(argv.end(), args.begin(), args.end());
    return detail::run_process(argv, in);
  }

  std::string run_checked(std::vector<std::string> args,
                          const std::optional<std::filesystem::path>& in = std::nullopt) const {
    auto r = run(args, in);
    if (r.exit_code != 0) {
      throw Error("git " + args.front() + " failed in " + path_.string() + ": " + trim(r.err));
    }
    return std::move(r.out);
  }

 private:
  std::filesystem::path path_;
};

std::vector<RawCommit> read_log(const GitRepo& git) {
  std::string out = git.run_checked(
      {"log", "-z", "--no-color", "--format=%H%x00%P%x00%ct%x00%ae%x00%B", "HEAD"});
  auto tokens = split_nul(out);
  if (tokens.size() % 5 != 0) throw Error("unexpected git log output");
  std::vector<RawCommit> commits;
  for (std::size_t i = 0; i < tokens.size(); i += 5) {
    RawCommit c;
    c.hash = std::string(tokens[i]);
    std::string_view parents = tokens[i + 1];
    std::size_t start = 0;
    while (start < parents.size()) {
      std::size_t sp = parents.find(' ', start);
      if (sp == std::string_view::npos) sp = parents.size();
      if (sp > start) c.parents.emplace_back(parents.substr(start, sp - start));
      start = sp + 1;
    }
    auto ts = parse_timestamp(tokens[i + 2]);
    if (!ts) throw Error("bad commit timestamp for " + c.hash);
    c.timestamp = *ts;
    c.author = std::string(tokens[i + 3]);
    std::string msg(tokens[i + 4]);
    while (!msg.empty() && (msg.back() == '\n' || msg.back() == '\r')) msg.pop_back();
    c.message = std::move(msg);
    commits.push_back(std::move(c));
  }
  return commits;
}

// Keeps commits with timestamp <= until whose parents are all kept, then
// orders them parents-first with (timestamp, hash) tie-breaking.
std::vector<RawCommit> order_commits(std::vector<RawCommit> raw, Timestamp until) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < raw.size(); ++i) index.emplace(raw[i].hash, i);

  std::vector<std::vector<std::size_t>> children(raw.size());
  std::vector<std::size_t> pending(raw.size(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (const auto& p : raw[i].parents) {
      auto it = index.find(p);
      if (it == index.end()) throw Error("parent " + p + " of " + raw[i].hash + " is missing");
      children[it->second].push_back(i);
      ++pending[i];
    }
  }

  using Key = std::tuple<Timestamp, std::string, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (pending[i] == 0 && raw[i].timestamp <= until) {
      ready.emplace(raw[i].timestamp, raw[i].hash, i);
    }
  }
  std::vector<RawCommit> ordered;
  while (!ready.empty()) {
    auto [ts, hash, i] = ready.top();
    ready.pop();
    for (std::size_t child : children[i]) {
      if (--pending[child] == 0 && raw[child].timestamp <= until) {
        ready.emplace(raw[child].timestamp, raw[child].hash, child);
      }
    }
    ordered.push_back(std::move(raw[i]));
  }
  return ordered;
}

std::unordered_map<std::string, std::vector<RawChange>> read_changes(
    const GitRepo& git, const std::vector<RawCommit>& commits) {
  std::string input;
  for (const auto& c : commits) {
    input += c.hash;
    if (!c.parents.empty()) input += ' ' + c.parents.front();
    input += '\n';
  }
  detail::TempFile in;
  in.write(input);
  std::string out = git.run_checked(
      {"diff-tree", "--stdin", "-r", "--root", "--no-renames", "-z", "--always", "--no-ext-diff"},
      in.path());

  std::unordered_map<std::string, std::vector<RawChange>> changes;
  std::vector<RawChange>* current = nullptr;
  auto tokens = split_nul(out);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string_view t = tokens[i];
    if (t.empty()) continue;
    if (t.front() != ':') {
      std::string hash(t);
      while (!hash.empty() && (hash.back() == '\n' || hash.back() == ' ')) hash.pop_back();
      current = &changes[hash];
      continue;
    }
    if (!current || i + 1 >= tokens.size()) throw Error("unexpected git diff-tree output");
    // ":<old mode> <new mode> <old id> <new id> <status>"
    RawChange ch;
    std::vector<std::string> fields;
    std::size_t start = 1;
    while (start < t.size()) {
      std::size_t sp = t.find(' ', start);
      if (sp == std::string_view::npos) sp = t.size();
      fields.emplace_back(t.substr(start, sp - start));
      start = sp + 1;
    }
    if (fields.size() != 5 || fields[4].empty()) throw Error("unexpected git diff-tree entry");
    ch.old_mode = fields[0];
    ch.new_mode = fields[1];
    ch.old_blob = fields[2];
    ch.new_blob = fields[3];
    ch.status = fields[4][0];
    ch.path = std::string(tokens[++i]);
    current->push_back(std::move(ch));
  }
  return changes;
}

std::unordered_map<std::string, std::string> read_blobs(const GitRepo& git,
                                                        const std::set<std::string>& ids) {
  std::unordered_map<std::string, std::string> blobs;
  if (ids.empty()) return blobs;
  std::string input;
  for (const auto& id : ids) input += id + '\n';
  detail::TempFile in;
  in.write(input);
  auto result = git.run({"cat-file", "--batch"}, in.path());
  if (result.exit_code != 0) throw Error("corrupt object store: " + trim(result.err));
  const std::string& out = result.out;
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t nl = out.find('\n', pos);
    if (nl == std::string::npos) throw Error("truncated git cat-file output");
    std::string header = out.substr(pos, nl - pos);
    pos = nl + 1;
    std::size_t sp1 = header.find(' ');
    std::string id = header.substr(0, sp1);
    if (sp1 == std::string::npos || header.compare(sp1 + 1, std::string::npos, "missing") == 0) {
      throw Error("missing or corrupt object " + id);
    }
    std::size_t sp2 = header.find(' ', sp1 + 1);
    if (sp2 == std::string::npos) throw Error("bad object header for " + id);
    std::size_t size = std::stoull(header.substr(sp2 + 1));
    if (pos + size > out.size()) throw Error("truncated object " + id);
    blobs.emplace(id, out.substr(pos, size));
    pos += size + 1;
  }
  for (const auto& id : ids) {
    if (!blobs.count(id)) throw Error("missing or corrupt object " + id);
  }
  return blobs;
}

struct Side {
  std::string path;
  std::string blob;
};

FileDiff make_diff(const std::string& old_path, const std::vector<std::string>& old_lines,
                   const std::string& new_path, const std::vector<std::string>& new_lines) {
  FileDiff d;
  d.old_path = old_path;
  d.new_path = new_path;
  LineEdits edits = diff_lines(old_lines, new_lines);
  d.deleted.reserve(edits.deleted.size());
  for (std::size_t i : edits.deleted) d.deleted.push_back({i + 1, old_lines[i]});
  d.added.reserve(edits.added.size());
  for (std::size_t j : edits.added) d.added.push_back({j + 1, new_lines[j]});
  return d;
}

std::vector<FileDiff> build_diffs(const std::vector<RawChange>& changes,
                                  const std::unordered_map<std::string, std::string>& blobs) {
  auto content = [&](const std::string& id) -> const std::string& { return blobs.at(id); };

  std::vector<FileDiff> diffs;
  std::vector<Side> deleted, added;
  for (const auto& ch : changes) {
    bool old_ok = is_regular(ch.old_mode) && !is_null_id(ch.old_blob);
    bool new_ok = is_regular(ch.new_mode) && !is_null_id(ch.new_blob);
    if ((old_ok && looks_binary(content(ch.old_blob))) ||
        (new_ok && looks_binary(content(ch.new_blob)))) {
      continue;
    }
    if (old_ok && new_ok) {
      diffs.push_back(make_diff(ch.path, split_lines(content(ch.old_blob)), ch.path,
                                split_lines(content(ch.new_blob))));
    } else if (old_ok) {
      deleted.push_back({ch.path, ch.old_blob});
    } else if (new_ok) {
      added.push_back({ch.path, ch.new_blob});
    }
  }

  // Rename pairing: greedy by descending similarity, then path order.
  std::vector<std::vector<std::string>> del_lines, add_lines;
  for (const auto& s : deleted) del_lines.push_back(split_lines(content(s.blob)));
  for (const auto& s : added) add_lines.push_back(split_lines(content(s.blob)));
  struct Pair {
    double sim;
    std::size_t a, d;
  };
  std::vector<Pair> pairs;
  bool full_scan = deleted.size() * added.size() <= kMaxRenamePairs;
  for (std::size_t a = 0; a < added.size(); ++a) {
    for (std::size_t d = 0; d < deleted.size(); ++d) {
      double sim = 0.0;
      if (added[a].blob == deleted[d].blob) {
        sim = 1.0;
      } else if (full_scan) {
        sim = line_set_similarity(del_lines[d], add_lines[a]);
      }
      if (sim >= kRenameThreshold) pairs.push_back({sim, a, d});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
    if (x.sim != y.sim) return x.sim > y.sim;
    if (added[x.a].path != added[y.a].path) return added[x.a].path < added[y.a].path;
    return deleted[x.d].path < deleted[y.d].path;
  });
  std::vector<bool> a_used(added.size(), false), d_used(deleted.size(), false);
  for (const auto& p : pairs) {
    if (a_used[p.a] || d_used[p.d]) continue;
    a_used[p.a] = d_used[p.d] = true;
    diffs.push_back(make_diff(deleted[p.d].path, del_lines[p.d], added[p.a].path, add_lines[p.a]));
  }
  static const std::vector<std::string> kEmpty;
  for (std::size_t d = 0; d < deleted.size(); ++d) {
    if (!d_used[d]) diffs.push_back(make_diff(deleted[d].path, del_lines[d], "", kEmpty));
  }
  for (std::size_t a = 0; a < added.size(); ++a) {
    if (!a_used[a]) diffs.push_back(make_diff("", kEmpty, added[a].path, add_lines[a]));
  }
  std::sort(diffs.begin(), diffs.end(), [](const FileDiff& x, const FileDiff& y) {
    if (x.path() != y.path()) return x.path() < y.path();
    return x.old_path < y.old_path;
  });
  return diffs;
}

}  // namespace

std::vector<CommitRecord> extract_history(const std::filesystem::path& repo_path, Timestamp until) {
  std::error_code ec;
  if (!std::filesystem::is_directory(repo_path, ec)) {
    throw InputError("unreadable repository: " + repo_path.string());
  }
  GitRepo git(repo_path);
  auto probe = git.run({"rev-parse", "--git-dir"});
  if (probe.exit_code != 0) {
    throw InputError("unreadable repository: " + repo_path.string() + ": " + trim(probe.err));
  }
  if (git.run({"rev-parse", "--verify", "-q", "HEAD^{commit}"}).exit_code != 0) {
    spdlog::info("{}: no commits", repo_path.string());
    return {};
  }

  std::vector<RawCommit> ordered = order_commits(read_log(git), until);
  spdlog::info("{}: {} commits", repo_path.string(), ordered.size());

  std::vector<CommitRecord> records;
  records.reserve(ordered.size());
  for (std::size_t begin = 0; begin < ordered.size(); begin += kCommitsPerBatch) {
    std::size_t end = std::min(ordered.size(), begin + kCommitsPerBatch);
    std::vector<RawCommit> batch(std::make_move_iterator(ordered.begin() + begin),
                                 std::make_move_iterator(ordered.begin() + end));
    auto changes = read_changes(git, batch);
    std::set<std::string> ids;
    for (const auto& [hash, list] : changes) {
      for (const auto& ch : list) {
        if (is_regular(ch.old_mode) && !is_null_id(ch.old_blob)) ids.insert(ch.old_blob);
        if (is_regular(ch.new_mode) && !is_null_id(ch.new_blob)) ids.insert(ch.new_blob);
      }
    }
    auto blobs = read_blobs(git, ids);
    for (auto& c : batch) {
      CommitRecord rec;
      rec.hash = std::move(c.hash);
      rec.parents = std::move(c.parents);
      rec.author = std::move(c.author);
      rec.timestamp = c.timestamp;
      rec.message = std::move(c.message);
      if (auto it = changes.find(rec.hash); it != changes.end()) {
        rec.diffs = build_diffs(it->second, blobs);
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace faultrank::miner
