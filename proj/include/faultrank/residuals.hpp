#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faultrank/eval.hpp"
#include "faultrank/issues.hpp"
#include "faultrank/szz.hpp"
#include "faultrank/violations.hpp"

namespace faultrank::residuals {

struct CommitFixPair {
  std::string issue_key;
  std::string inducing_commit;
  std::string fixing_commit;
  std::string file;
  bool operator==(const CommitFixPair&) const = default;
};

/// One pair per (issue, inducing, fixing, file) among candidates that pass
/// the date filter and whose fix is linked to the issue.
std::vector<CommitFixPair> build_pairs(std::span<const szz::InducingCandidate> candidates,
                                       std::span<const issues::FixLink> fixlinks);

/// Signed delta at the inducing commit plus signed delta at the fix, or
/// nullopt when the inducing commit did not add any of the rule's violations.
std::optional<long> compute_residual(std::string_view squid, const CommitFixPair& pair,
                                     const violations::DeltaIndex& deltas);

struct ResidualStats {
  std::string squid;
  std::size_t n_pairs = 0;
  double mean = 0, min = 0, max = 0, stdev = 0, rss = 0, pct_zero = 0;
  bool gate_95 = false;
  bool operator==(const ResidualStats&) const = default;
};

ResidualStats residual_stats(std::string_view squid, std::span<const long> residuals);

/// Stats for every catalog rule, in catalog order.
std::vector<ResidualStats> analyze_residuals(std::span<const CommitFixPair> pairs,
                                             std::span<const violations::ViolationDelta> deltas,
                                             const violations::RuleCatalog& catalog);

struct RankedRule {
  std::string squid;
  std::optional<violations::RuleKind> kind;
  std::optional<violations::Severity> severity;
  std::optional<double> importance;
  std::optional<double> pct_zero;
  bool gate_95 = false;
  bool fault_prone = false;
  bool missing_data = false;
  bool operator==(const RankedRule&) const = default;
};

struct RankedRules {
  std::vector<RankedRule> rules;  // importance descending, then squid
  // fault-prone counts, indexed by RuleKind / Severity
  std::array<std::size_t, 3> fault_prone_by_kind{};
  std::array<std::size_t, 5> fault_prone_by_severity{};
  std::size_t fault_prone_count() const;
  bool operator==(const RankedRules&) const = default;
};

/// Fault-prone: importance > 0 and gate_95. Rules seen in only one input are
/// flagged missing_data and never fault-prone.
RankedRules rank_rules(std::span<const eval::FeatureImportance> importance,
                       std::span<const ResidualStats> stats, const violations::RuleCatalog& catalog);

void write_pairs_csv(std::ostream& out, std::span<const CommitFixPair> pairs);
/// squid,n_pairs,mean,min,max,stdev,rss,pct_zero,gate_95
void write_residuals_csv(std::ostream& out, std::span<const ResidualStats> stats);
std::vector<ResidualStats> read_residuals_csv(const std::filesystem::path& path);
/// squid,kind,severity,importance,pct_zero,gate_95,fault_prone
void write_ranked_csv(std::ostream& out, const RankedRules& ranked);

}  // namespace faultrank::residuals
