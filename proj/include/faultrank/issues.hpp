#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faultrank/common.hpp"
#include "faultrank/miner.hpp"

namespace faultrank::issues {

enum class IssueKind { Bug, Other };

struct IssueRecord {
  std::string key;  // PROJECT-123
  IssueKind kind = IssueKind::Other;
  Timestamp created = 0;
  std::optional<Timestamp> resolved;
  std::string resolution;
  bool operator==(const IssueRecord&) const = default;
};

struct FixLink {
  std::string issue_key;
  std::vector<std::string> fix_commits;  // sorted, non-empty
  bool operator==(const FixLink&) const = default;
};

bool is_valid_issue_key(std::string_view key);

/// Orders keys by project prefix, then numerically by the issue number.
bool issue_key_less(std::string_view a, std::string_view b);

/// Reads issues.csv or issues.json (detected from the first non-blank
/// character). Malformed rows are skipped with a warning naming the line or
/// array index. Throws InputError when the file cannot be read.
Parsed<IssueRecord> parse_issues(const std::filesystem::path& path);
Parsed<IssueRecord> parse_issues_text(std::string_view text);

/// Issue keys mentioned in a commit message at word boundaries.
std::vector<std::string> mentioned_keys(std::string_view message);

/// Links each fixed bug to every commit whose message names its key.
std::vector<FixLink> link_fixes(std::span<const miner::CommitRecord> commits,
                                std::span<const IssueRecord> issues);

/// fixlinks.csv: issue_key,commit_hash
void write_fixlinks_csv(std::ostream& out, std::span<const FixLink> links);
std::vector<FixLink> read_fixlinks_csv(const std::filesystem::path& path);

}  // namespace faultrank::issues
