#include "faultrank/line_diff.hpp"

#include <string_view>
#include <unordered_map>

namespace faultrank::miner {

namespace {

// Myers' O(ND) algorithm with middle-snake bisection, operating on interned
// line ids. Emits deletions/insertions in ascending order.
class Differ {
 public:
  Differ(std::vector<int> a, std::vector<int> b) : a_(std::move(a)), b_(std::move(b)) {}

  LineEdits run() {
    diff(0, a_.size(), 0, b_.size());
    return std::move(out_);
  }

 private:
  void diff(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    while (a0 < a1 && b0 < b1 && a_[a0] == b_[b0]) {
      ++a0;
      ++b0;
    }
    std::size_t suffix = 0;
    while (a1 - suffix > a0 && b1 - suffix > b0 && a_[a1 - suffix - 1] == b_[b1 - suffix - 1]) {
      ++suffix;
    }
    a1 -= suffix;
    b1 -= suffix;
    if (a0 == a1) {
      for (std::size_t j = b0; j < b1; ++j) out_.added.push_back(j);
      return;
    }
    if (b0 == b1) {
      for (std::size_t i = a0; i < a1; ++i) out_.deleted.push_back(i);
      return;
    }
    bisect(a0, a1, b0, b1);
  }

  void bisect(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    const long n = static_cast<long>(a1 - a0);
    const long m = static_cast<long>(b1 - b0);
    const long max_d = (n + m + 1) / 2;
    const long v_offset = max_d;
    const long v_length = 2 * max_d + 2;
    std::vector<long> v1(static_cast<std::size_t>(v_length), -1);
    std::vector<long> v2(static_cast<std::size_t>(v_length), -1);
    v1[static_cast<std::size_t>(v_offset + 1)] = 0;
    v2[static_cast<std::size_t>(v_offset + 1)] = 0;
    const long delta = n - m;
    const bool front = (delta % 2) != 0;
    long k1start = 0, k1end = 0, k2start = 0, k2end = 0;
    auto A = [&](long i) { return a_[a0 + static_cast<std::size_t>(i)]; };
    auto B = [&](long j) { return b_[b0 + static_cast<std::size_t>(j)]; };
    auto at = [](std::vector<long>& v, long i) -> long& { return v[static_cast<std::size_t>(i)]; };

    for (long d = 0; d < max_d; ++d) {
      for (long k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
        const long k1_offset = v_offset + k1;
        long x1;
        if (k1 == -d || (k1 != d && at(v1, k1_offset - 1) < at(v1, k1_offset + 1))) {
          x1 = at(v1, k1_offset + 1);
        } else {
          x1 = at(v1, k1_offset - 1) + 1;
        }
        long y1 = x1 - k1;
        while (x1 < n && y1 < m && A(x1) == B(y1)) {
          ++x1;
          ++y1;
        }
        at(v1, k1_offset) = x1;
        if (x1 > n) {
          k1end += 2;
        } else if (y1 > m) {
          k1start += 2;
        } else if (front) {
          const long k2_offset = v_offset + delta - k1;
          if (k2_offset >= 0 && k2_offset < v_length && at(v2, k2_offset) != -1) {
            const long x2 = n - at(v2, k2_offset);
            if (x1 >= x2) {
              split(a0, a1, b0, b1, x1, y1);
              return;
            }
          }
        }
      }
      for (long k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
        const long k2_offset = v_offset + k2;
        long x2;
        if (k2 == -d || (k2 != d && at(v2, k2_offset - 1) < at(v2, k2_offset + 1))) {
          x2 = at(v2, k2_offset + 1);
        } else {
          x2 = at(v2, k2_offset - 1) + 1;
        }
        long y2 = x2 - k2;
        while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) {
          ++x2;
          ++y2;
        }
        at(v2, k2_offset) = x2;
        if (x2 > n) {
          k2end += 2;
        } else if (y2 > m) {
          k2start += 2;
        } else if (!front) {
          const long k1_offset = v_offset + delta - k2;
          if (k1_offset >= 0 && k1_offset < v_length && at(v1, k1_offset) != -1) {
            const long x1 = at(v1, k1_offset);
            const long y1 = v_offset + x1 - k1_offset;
            if (x1 >= n - x2) {
              split(a0, a1, b0, b1, x1, y1);
              return;
            }
          }
        }
      }
    }
    // No commonality at all.
    for (std::size_t i = a0; i < a1; ++i) out_.deleted.push_back(i);
    for (std::size_t j = b0; j < b1; ++j) out_.added.push_back(j);
  }

  void split(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1, long x, long y) {
    const std::size_t ax = a0 + static_cast<std::size_t>(x);
    const std::size_t by = b0 + static_cast<std::size_t>(y);
    diff(a0, ax, b0, by);
    diff(ax, a1, by, b1);
  }

  std::vector<int> a_;
  std::vector<int> b_;
  LineEdits out_;
};

}  // namespace

LineEdits diff_lines(std::span<const std::string> old_lines, std::span<const std::string> new_lines) {
  std::unordered_map<std::string_view, int> ids;
  auto intern = [&](std::span<const std::string> lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
      auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  std::vector<int> a = intern(old_lines);
  std::vector<int> b = intern(new_lines);
  return Differ(std::move(a), std::move(b)).run();
}

std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(content.substr(start));
      break;
    }
    lines.emplace_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

double line_set_similarity(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::unordered_map<std::string_view, long> counts;
  for (const auto& l : a) ++counts[l];
  std::size_t common = 0;
  for (const auto& l : b) {
    auto it = counts.find(l);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

}  // namespace faultrank::miner
