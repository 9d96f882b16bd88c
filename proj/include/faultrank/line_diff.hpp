#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace faultrank::miner {

/// Minimal line edit script between two files (Myers, linear-space bisection).
/// Indices are 0-based and strictly increasing.
struct LineEdits {
  std::vector<std::size_t> deleted;  // positions in the old file
  std::vector<std::size_t> added;    // positions in the new file
};

LineEdits diff_lines(std::span<const std::string> old_lines, std::span<const std::string> new_lines);

/// Splits on '\n'. A trailing line without a newline still counts; "" has no lines.
std::vector<std::string> split_lines(std::string_view content);

/// Dice coefficient over line multisets: 2|A ∩ B| / (|A| + |B|), 1 when both are empty.
double line_set_similarity(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace faultrank::miner
