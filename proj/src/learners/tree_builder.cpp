#include "tree_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace faultrank::learners::detail {

BinnedColumns BinnedColumns::build(const FeatureMatrix& x) {
  BinnedColumns b;
  b.n_rows = x.n_rows;
  b.n_cols = x.n_cols;
  b.distinct.resize(x.n_cols);
  b.bins.resize(x.n_rows * x.n_cols);
  b.raw.resize(x.n_rows * x.n_cols);
  std::vector<double> col(x.n_rows);
  for (std::size_t j = 0; j < x.n_cols; ++j) {
    for (std::size_t i = 0; i < x.n_rows; ++i) {
      col[i] = x.at(i, j);
      b.raw[j * x.n_rows + i] = col[i];
    }
    auto& d = b.distinct[j];
    d = col;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (std::size_t i = 0; i < x.n_rows; ++i) {
      auto it = std::lower_bound(d.begin(), d.end(), col[i]);
      b.bins[j * x.n_rows + i] = static_cast<std::uint32_t>(it - d.begin());
    }
  }
  return b;
}

namespace {

struct Bin {
  std::uint32_t bin;
  double s0;
  double s1;
  std::size_t count;
};

struct Split {
  bool found = false;
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  double threshold = 0.0;
};

struct Totals {
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t count = 0;
};

double midpoint(double lo, double hi) {
  double m = lo + (hi - lo) / 2.0;
  return m >= hi ? lo : m;
}

class Grower {
 public:
  Grower(const BinnedColumns& data, std::vector<std::size_t> rows, const TreeTargets& t,
         const TreeParams& p, Rng* rng)
      : data_(data), rows_(std::move(rows)), t_(t), p_(p), rng_(rng) {
    std::size_t widest = 0;
    for (const auto& d : data_.distinct) widest = std::max(widest, d.size());
    hist_.assign(widest, Bin{0, 0.0, 0.0, 0});
    perm_.resize(data_.n_cols);
  }

  Tree run() {
    Tree tree;
    tree.nodes.emplace_back();
    if (rows_.empty()) return tree;
    struct Frame {
      int node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Frame> stack{{0, 0, rows_.size(), 0}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      Totals tot = totals(f.begin, f.end);
      tree.nodes[f.node].value = leaf_value(tot);

      if (p_.max_depth >= 0 && f.depth >= p_.max_depth) continue;
      if (tot.count < 2) continue;
      if (p_.criterion == Criterion::Gini && pure(f.begin, f.end)) continue;

      Split s = best_split(f.begin, f.end, tot);
      if (!s.found) continue;

      auto first = rows_.begin() + static_cast<std::ptrdiff_t>(f.begin);
      auto last = rows_.begin() + static_cast<std::ptrdiff_t>(f.end);
      auto mid = std::stable_partition(first, last, [&](std::size_t r) {
        return data_.value(s.feature, r) <= s.threshold;
      });
      std::size_t m = static_cast<std::size_t>(mid - rows_.begin());
      if (m == f.begin || m == f.end) continue;

      int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[f.node];
      node.feature = static_cast<int>(s.feature);
      node.threshold = s.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, m, f.end, f.depth + 1});
      stack.push_back({left, f.begin, m, f.depth + 1});
    }
    return tree;
  }

 private:
  Totals totals(std::size_t b, std::size_t e) const {
    Totals t;
    for (std::size_t i = b; i < e; ++i) {
      std::size_t r = rows_[i];
      t.s0 += t_.first[r];
      t.s1 += t_.second[r];
    }
    t.count = e - b;
    return t;
  }

  bool pure(std::size_t b, std::size_t e) const {
    std::size_t pos = 0;
    for (std::size_t i = b; i < e; ++i) pos += t_.labels[rows_[i]] ? 1 : 0;
    return pos == 0 || pos == e - b;
  }

  double leaf_value(const Totals& t) const {
    switch (p_.criterion) {
      case Criterion::Gini:
      case Criterion::SquaredError:
        return t.s0 > 0.0 ? t.s1 / t.s0 : 0.0;
      case Criterion::Newton:
        return -t.s1 / (t.s0 + p_.l2_lambda);
    }
    return 0.0;
  }

  // Larger is better; parent term included so a useless split scores 0.
  double gain(const Totals& l, const Totals& r, const Totals& parent) const {
    switch (p_.criterion) {
      case Criterion::Gini: {
        auto w = [](double s0, double s1) { return s0 > 0.0 ? s1 * (s0 - s1) / s0 : 0.0; };
        return 2.0 * (w(parent.s0, parent.s1) - w(l.s0, l.s1) - w(r.s0, r.s1));
      }
      case Criterion::SquaredError:
        return l.s1 * l.s1 / l.s0 + r.s1 * r.s1 / r.s0 - parent.s1 * parent.s1 / parent.s0;
      case Criterion::Newton: {
        double lam = p_.l2_lambda;
        return 0.5 * (l.s1 * l.s1 / (l.s0 + lam) + r.s1 * r.s1 / (r.s0 + lam) -
                      parent.s1 * parent.s1 / (parent.s0 + lam));
      }
    }
    return 0.0;
  }

  bool valid_children(const Totals& l, const Totals& r) const {
    if (l.count == 0 || r.count == 0) return false;
    if (p_.criterion == Criterion::Newton) return true;
    return l.s0 > 0.0 && r.s0 > 0.0;
  }

  bool acceptable(double g, const Totals& parent) const {
    // Gini keeps zero-gain splits (XOR needs one); the regressors need progress.
    if (p_.criterion == Criterion::Gini) return g >= -1e-12 * std::max(1.0, parent.s0);
    return g > 1e-12;
  }

  void consider(Split& best, std::size_t feature, double threshold, const Totals& l,
                const Totals& parent) {
    Totals r{parent.s0 - l.s0, parent.s1 - l.s1, parent.count - l.count};
    if (!valid_children(l, r)) return;
    double g = gain(l, r, parent);
    if (!acceptable(g, parent)) return;
    if (!best.found || g > best.gain) {
      best = Split{true, g, feature, threshold};
    }
  }

  // Returns false when the feature is constant on the node.
  bool exact_split(std::size_t f, std::size_t b, std::size_t e, const Totals& parent, Split& best) {
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
    for (std::size_t i = b; i < e; ++i) {
      std::uint32_t v = data_.bin(f, rows_[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) return false;
    const auto& values = data_.distinct[f];
    std::size_t n = e - b;

    bins_.clear();
    if (static_cast<std::size_t>(hi - lo) <= 4 * n) {
      for (std::size_t i = b; i < e; ++i) {
        std::size_t r = rows_[i];
        Bin& h = hist_[data_.bin(f, r)];
        h.s0 += t_.first[r];
        h.s1 += t_.second[r];
        ++h.count;
      }
      for (std::uint32_t k = lo; k <= hi; ++k) {
        Bin& h = hist_[k];
        if (h.count == 0) continue;
        bins_.push_back({k, h.s0, h.s1, h.count});
        h = Bin{0, 0.0, 0.0, 0};
      }
    } else {
      sorted_.clear();
      for (std::size_t i = b; i < e; ++i) {
        std::size_t r = rows_[i];
        sorted_.push_back({data_.bin(f, r), t_.first[r], t_.second[r], 1});
      }
      std::stable_sort(sorted_.begin(), sorted_.end(),
                       [](const Bin& x, const Bin& y) { return x.bin < y.bin; });
      for (const Bin& s : sorted_) {
        if (!bins_.empty() && bins_.back().bin == s.bin) {
          bins_.back().s0 += s.s0;
          bins_.back().s1 += s.s1;
          ++bins_.back().count;
        } else {
          bins_.push_back(s);
        }
      }
    }

    Totals left;
    for (std::size_t k = 0; k + 1 < bins_.size(); ++k) {
      left.s0 += bins_[k].s0;
      left.s1 += bins_[k].s1;
      left.count += bins_[k].count;
      double t = midpoint(values[bins_[k].bin], values[bins_[k + 1].bin]);
      consider(best, f, t, left, parent);
    }
    return true;
  }

  bool random_split(std::size_t f, std::size_t b, std::size_t e, const Totals& parent, Split& best) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = b; i < e; ++i) {
      double v = data_.value(f, rows_[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) return false;
    double t = lo + rng_->unit() * (hi - lo);
    if (t >= hi) t = lo;
    Totals left;
    for (std::size_t i = b; i < e; ++i) {
      std::size_t r = rows_[i];
      if (data_.value(f, r) <= t) {
        left.s0 += t_.first[r];
        left.s1 += t_.second[r];
        ++left.count;
      }
    }
    consider(best, f, t, left, parent);
    return true;
  }

  Split best_split(std::size_t b, std::size_t e, const Totals& parent) {
    Split best;
    const std::size_t p = data_.n_cols;
    const bool subset = p_.max_features > 0 && p_.max_features < p;
    const std::size_t wanted = subset ? p_.max_features : p;
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::size_t visited = 0;
    for (std::size_t k = 0; k < p && visited < wanted; ++k) {
      if (subset || p_.random_thresholds) {
        std::size_t j = k + rng_->index(p - k);
        std::swap(perm_[k], perm_[j]);
      }
      std::size_t f = perm_[k];
      bool informative = p_.random_thresholds ? random_split(f, b, e, parent, best)
                                              : exact_split(f, b, e, parent, best);
      if (informative) ++visited;
    }
    return best;
  }

  const BinnedColumns& data_;
  std::vector<std::size_t> rows_;
  const TreeTargets& t_;
  const TreeParams& p_;
  Rng* rng_;
  std::vector<Bin> hist_;
  std::vector<Bin> bins_;
  std::vector<Bin> sorted_;
  std::vector<std::size_t> perm_;
};

}  // namespace

Tree grow_tree(const BinnedColumns& data, std::vector<std::size_t> rows, const TreeTargets& targets,
               const TreeParams& params, Rng* rng) {
  return Grower(data, std::move(rows), targets, params, rng).run();
}

}  // namespace faultrank::learners::detail
