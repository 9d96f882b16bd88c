#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faultrank/issues.hpp"
#include "faultrank/miner.hpp"

namespace faultrank::szz {

struct InducingCandidate {
  std::string issue_key;
  std::string fix_commit;
  std::string inducing_commit;
  std::string file;   // path in the fix's first parent
  std::size_t line;   // old-file line number blamed
  bool date_filtered = false;  // inducing commit postdates the issue report
  bool operator==(const InducingCandidate&) const = default;
};

struct FaultLabel {
  std::string commit;
  bool inducing = false;
  std::vector<std::string> issue_keys;
  bool operator==(const FaultLabel&) const = default;
};

/// Blank lines and comment-only lines (//, /*, *, */ after trimming).
bool is_cosmetic_line(std::string_view line);

/// Plain SZZ for one (fix, issue) pair: blames every non-cosmetic line the
/// fix deletes at the fix's first parent. One candidate per (inducing
/// commit, file), keeping the lowest blamed line.
std::vector<InducingCandidate> identify_inducing(const miner::CommitRecord& fix,
                                                 const issues::IssueRecord& issue,
                                                 const miner::History& history);

/// Runs identify_inducing over every fix link whose issue is known.
std::vector<InducingCandidate> identify_all(std::span<const issues::FixLink> links,
                                            std::span<const issues::IssueRecord> issues,
                                            const miner::History& history);

/// One label per commit, in history order. Throws ConsistencyError when a
/// candidate names a commit missing from `all`.
std::vector<FaultLabel> label_commits(std::span<const miner::CommitRecord> all,
                                      std::span<const InducingCandidate> candidates);

void write_candidates_csv(std::ostream& out, std::span<const InducingCandidate> candidates);
std::vector<InducingCandidate> read_candidates_csv(const std::filesystem::path& path);
void write_labels_csv(std::ostream& out, std::span<const FaultLabel> labels);
std::vector<FaultLabel> read_labels_csv(const std::filesystem::path& path);

}  // namespace faultrank::szz
