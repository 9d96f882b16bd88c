#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "faultrank/features.hpp"
#include "faultrank/learners.hpp"
#include "rng.hpp"

namespace faultrank::learners::detail {

/// Column-major view of a training matrix with each feature's distinct values
/// enumerated, so exact split search can accumulate per distinct value.
struct BinnedColumns {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::vector<double>> distinct;  // per feature, ascending
  std::vector<std::uint32_t> bins;            // [col * n_rows + row]
  std::vector<double> raw;                    // [col * n_rows + row]

  static BinnedColumns build(const FeatureMatrix& x);
  std::uint32_t bin(std::size_t col, std::size_t row) const { return bins[col * n_rows + row]; }
  double value(std::size_t col, std::size_t row) const { return raw[col * n_rows + row]; }
};

enum class Criterion {
  Gini,          // stats: (weight, weight * label); leaf = positive fraction
  SquaredError,  // stats: (weight, weight * target); leaf = mean target
  Newton,        // stats: (hessian, gradient); leaf = -G / (H + lambda)
};

struct TreeParams {
  Criterion criterion = Criterion::Gini;
  int max_depth = -1;            // -1: unlimited
  std::size_t max_features = 0;  // 0: all features at every split
  bool random_thresholds = false;
  double l2_lambda = 0.0;
};

/// Per-row statistics driving the split criterion (see Criterion).
struct TreeTargets {
  std::span<const double> first;
  std::span<const double> second;
  std::span<const std::uint8_t> labels;  // Gini purity check
};

/// Grows one tree on `rows` (rows not listed are out of the sample). `rng`
/// may be null when neither feature subsetting nor random thresholds are used.
Tree grow_tree(const BinnedColumns& data, std::vector<std::size_t> rows, const TreeTargets& targets,
               const TreeParams& params, Rng* rng);

/// Multiplicity of each row in a size-n draw with replacement.
std::vector<double> bootstrap_weights(std::size_t n, Rng& rng);

}  // namespace faultrank::learners::detail
