#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "faultrank/common.hpp"

namespace faultrank::violations {

enum class RuleKind { Bug, CodeSmell, Vulnerability };
enum class Severity { Blocker, Critical, Major, Minor, Info };

std::string_view to_string(RuleKind kind);
std::string_view to_string(Severity severity);
std::optional<RuleKind> parse_rule_kind(std::string_view text);
std::optional<Severity> parse_severity(std::string_view text);

struct RuleDescriptor {
  std::string squid;
  RuleKind kind = RuleKind::CodeSmell;
  Severity severity = Severity::Major;
  bool operator==(const RuleDescriptor&) const = default;
};

/// The rule universe in file order; this order fixes the feature columns.
class RuleCatalog {
 public:
  RuleCatalog() = default;
  /// Throws InputError on duplicate squids.
  explicit RuleCatalog(std::vector<RuleDescriptor> rules);

  const std::vector<RuleDescriptor>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  const RuleDescriptor* find(std::string_view squid) const;
  std::optional<std::size_t> column(std::string_view squid) const;

 private:
  std::vector<RuleDescriptor> rules_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ViolationEvent {
  std::string rule;
  std::string file;
  std::string opened_at;
  std::optional<std::string> closed_at;
  bool operator==(const ViolationEvent&) const = default;
};

struct ViolationDelta {
  std::string commit;
  std::string file;
  std::string rule;
  long introduced = 0;
  long removed = 0;
  long signed_delta() const { return introduced - removed; }
  bool operator==(const ViolationDelta&) const = default;
};

/// rules.csv: squid,kind,severity (header row). Unknown enum values and
/// duplicate squids are fatal.
RuleCatalog load_rule_catalog(const std::filesystem::path& path);
RuleCatalog parse_rule_catalog(std::string_view text);

/// Position of each known commit in history order, used to validate events.
using CommitOrder = std::unordered_map<std::string, std::size_t>;

/// violations.csv: squid,file,opened_commit,closed_commit. Events naming
/// unknown commits or closing before they open are skipped with a warning.
Parsed<ViolationEvent> load_violation_events(const std::filesystem::path& path, const CommitOrder& order);
Parsed<ViolationEvent> parse_violation_events(std::string_view text, const CommitOrder& order);

/// Per (commit, file, rule) introduction/removal counts; all-zero tuples are
/// omitted. Sorted by (commit, file, rule).
std::vector<ViolationDelta> compute_deltas(std::span<const ViolationEvent> events);

void write_deltas_csv(std::ostream& out, std::span<const ViolationDelta> deltas);
std::vector<ViolationDelta> read_deltas_csv(const std::filesystem::path& path);

/// Lookup of signed deltas at (commit, file, rule).
class DeltaIndex {
 public:
  explicit DeltaIndex(std::span<const ViolationDelta> deltas);
  /// introduced - removed, 0 when absent.
  long signed_delta(std::string_view commit, std::string_view file, std::string_view rule) const;
  /// Per-commit introduced counts summed over files, keyed by rule.
  const std::unordered_map<std::string, long>* introduced_by_rule(std::string_view commit) const;

 private:
  std::unordered_map<std::string, long> by_key_;
  std::unordered_map<std::string, std::unordered_map<std::string, long>> by_commit_;
};

}  // namespace faultrank::violations
