#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faultrank/common.hpp"
#include "faultrank/miner.hpp"
#include "faultrank/szz.hpp"
#include "faultrank/violations.hpp"

namespace faultrank::learners {

/// Commits × rule-introduction counts. Rows are grouped by project and
/// ordered by time within each project; columns follow catalog order.
struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;         // row-major, n_rows * n_cols
  std::vector<std::uint8_t> labels;   // 1 = fault-inducing
  std::vector<std::string> column_names;
  std::vector<std::string> projects;  // per row
  std::vector<std::string> commits;   // per row
  std::vector<Timestamp> timestamps;  // per row

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * n_cols, n_cols};
  }
  double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

  /// Throws InputError on inconsistent sizes or non-finite values.
  void validate() const;
  bool operator==(const FeatureMatrix&) const = default;
};

/// Unlabelled matrix with default metadata; handy for tests and generators.
FeatureMatrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                          std::vector<std::uint8_t> labels);

FeatureMatrix select_rows(const FeatureMatrix& x, std::span<const std::size_t> rows);
FeatureMatrix drop_column(const FeatureMatrix& x, std::size_t column);

struct ProjectHistory {
  std::string project;
  std::span<const miner::CommitRecord> commits;
};

/// One row per commit: introduced-violation counts per rule (summed over
/// files) and the SZZ label. Rows are stably sorted by timestamp per project.
FeatureMatrix build_feature_matrix(std::span<const ProjectHistory> projects,
                                   std::span<const szz::FaultLabel> labels,
                                   std::span<const violations::ViolationDelta> deltas,
                                   const violations::RuleCatalog& catalog);

/// features.csv: project,commit,timestamp,label,<squid>...
void write_features_csv(std::ostream& out, const FeatureMatrix& x);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

}  // namespace faultrank::learners
