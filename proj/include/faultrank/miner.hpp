#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "faultrank/common.hpp"

namespace faultrank::miner {

struct DiffLine {
  std::size_t number = 0;  // 1-based
  std::string text;
  bool operator==(const DiffLine&) const = default;
};

/// One file's change in a commit. An empty old_path means the file was
/// created, an empty new_path that it was deleted; differing non-empty paths
/// mean a rename.
struct FileDiff {
  std::string old_path;
  std::string new_path;
  std::vector<DiffLine> added;    // new-file line numbers
  std::vector<DiffLine> deleted;  // old-file line numbers

  const std::string& path() const { return new_path.empty() ? old_path : new_path; }
  bool operator==(const FileDiff&) const = default;
};

struct CommitRecord {
  std::string hash;
  std::vector<std::string> parents;  // first parent first
  std::string author;
  Timestamp timestamp = 0;
  std::string message;
  std::vector<FileDiff> diffs;  // merges: against the first parent

  bool is_root() const { return parents.empty(); }
  bool operator==(const CommitRecord&) const = default;
};

inline constexpr Timestamp kNoLimit = std::numeric_limits<Timestamp>::max();

/// Reads the history reachable from HEAD of the git repository at
/// `repo_path`, keeping commits with timestamp <= until whose ancestors are
/// also kept. Output is topologically ordered, ties broken by (committer
/// timestamp, hash). Requires the `git` executable on PATH.
std::vector<CommitRecord> extract_history(const std::filesystem::path& repo_path,
                                          Timestamp until = kNoLimit);

/// Applies one FileDiff to the previous content of the file.
std::vector<std::string> apply_diff(std::span<const std::string> old_lines, const FileDiff& diff);

struct BlameResult {
  std::string commit;
  std::string path;   // path of the file in `commit`
  std::size_t line;   // line number in `commit`'s version of the file
};

/// Read-only view over an extracted history answering blame and content
/// queries. Blame follows first parents and the miner's rename decisions.
class History {
 public:
  History() = default;
  explicit History(std::vector<CommitRecord> commits);
  History(const History&) = delete;
  History& operator=(const History&) = delete;
  History(History&&) = default;
  History& operator=(History&&) = default;

  const std::vector<CommitRecord>& commits() const { return commits_; }
  std::size_t size() const { return commits_.size(); }

  const CommitRecord* find(std::string_view hash) const;
  /// Throws NotFoundError.
  const CommitRecord& at(std::string_view hash) const;
  std::optional<std::size_t> position(std::string_view hash) const;

  /// Commit that added or last modified `line` of `path` as of commit `at`.
  std::string line_blame(std::string_view path, std::size_t line, std::string_view at) const;

  /// Batch form of line_blame: one result per requested line, same order.
  std::vector<BlameResult> blame_lines(std::string_view path, std::span<const std::size_t> lines,
                                       std::string_view at) const;

  /// Content of every file at `at`, reconstructed by replaying diffs along
  /// the first-parent chain.
  std::map<std::string, std::vector<std::string>> snapshot(std::string_view at) const;

 private:
  struct Index {
    std::unordered_map<std::string_view, std::size_t> by_new_path;
    std::unordered_map<std::string_view, std::size_t> by_old_path;
  };

  std::vector<CommitRecord> commits_;
  std::unordered_map<std::string, std::size_t> positions_;
  std::vector<Index> file_index_;
};

nlohmann::json to_json(const CommitRecord& commit);
CommitRecord commit_from_json(const nlohmann::json& j);

/// commits.jsonl: one object per line; `project` is added when non-empty.
void write_commits_jsonl(std::ostream& out, std::span<const CommitRecord> commits,
                         std::string_view project = {});

struct ProjectCommits {
  std::string project;
  std::vector<CommitRecord> commits;
};

/// Groups lines by their `project` field, keeping first-appearance order.
std::vector<ProjectCommits> read_commits_jsonl(std::istream& in);

}  // namespace faultrank::miner
