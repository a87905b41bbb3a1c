#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/hypothesis.hpp"

namespace dtdist {

/// A uniform-distribution learner together with its declared sample
/// requirement and guarantee.  The declaration is used for planning only.
struct UniformLearner {
  std::string name;
  std::function<Hypothesis(const LabeledSample&)> learn;
  std::uint64_t m = 1;
  double eps = 0.1;
  double delta = 0.5;
  double c = 0.0;  // robustness coefficient; 0 means the auto-robust 3m

  double robustness() const noexcept { return c > 0.0 ? c : 3.0 * static_cast<double>(m); }
};

// ---------------------------------------------------------------------------
// Exhaustive ERM over depth-<=k decision trees.
// ---------------------------------------------------------------------------

/// Upper bound on the number of depth-<=k trees over n variables with 0/1 leaves.
inline double tree_class_size(int n, int k) {
  double c = 2.0;
  for (int j = 1; j <= k; ++j) c = 2.0 + n * c * c;
  return c;
}

namespace detail {

struct TreeFit {
  std::uint64_t err = 0;
  int var = -1;  // -1: leaf
  int label = 0;
  std::unique_ptr<TreeFit> lo, hi;
};

inline TreeFit fit_tree(const LabeledSample& s, const std::vector<std::uint32_t>& idx,
                        std::uint64_t path, int depth) {
  std::uint64_t ones = 0;
  for (auto j : idx) ones += s.labels[j];
  const std::uint64_t zeros = idx.size() - ones;
  TreeFit best;
  best.label = ones > zeros ? 1 : 0;
  best.err = std::min(ones, zeros);
  if (depth == 0 || best.err == 0) return best;
  std::vector<std::uint32_t> lo, hi;
  for (int v = 0; v < s.n; ++v) {
    if ((path >> v) & 1ULL) continue;
    lo.clear();
    hi.clear();
    for (auto j : idx) ((s.points[j] >> v) & 1ULL ? hi : lo).push_back(j);
    TreeFit l = fit_tree(s, lo, path | (1ULL << v), depth - 1);
    if (l.err >= best.err) continue;
    TreeFit h = fit_tree(s, hi, path | (1ULL << v), depth - 1);
    if (l.err + h.err < best.err) {
      best.err = l.err + h.err;
      best.var = v;
      best.lo = std::make_unique<TreeFit>(std::move(l));
      best.hi = std::make_unique<TreeFit>(std::move(h));
      if (best.err == 0) break;
    }
  }
  return best;
}

inline int emit_tree(const TreeFit& f, DecisionTree::Builder& b) {
  if (f.var < 0) return b.leaf(f.label);
  const int lo = emit_tree(*f.lo, b);
  const int hi = emit_tree(*f.hi, b);
  return b.split(f.var, lo, hi);
}

}  // namespace detail

/// Depth-<=k tree minimizing empirical error on s.  Ties prefer a leaf, then
/// the smaller split variable, then label 0.
inline Hypothesis exhaustive_tree_learn(const LabeledSample& s, int k) {
  if (k < 0 || k > 3) throw ArgumentError("exhaustive tree learner supports 0 <= k <= 3");
  if (s.n > 16) throw DimensionError("exhaustive tree learner supports n <= 16");
  const double work = std::pow(static_cast<double>(std::max(1, s.n)), k) *
                      static_cast<double>(std::max<std::size_t>(1, s.size()));
  if (work > 1e11) throw BudgetError("exhaustive tree search too large");
  std::vector<std::uint32_t> idx(s.size());
  for (std::uint32_t j = 0; j < idx.size(); ++j) idx[j] = j;
  const detail::TreeFit fit = detail::fit_tree(s, idx, 0, k);
  DecisionTree::Builder b;
  const int root = detail::emit_tree(fit, b);
  return Hypothesis(s.n, Hypothesis::Tree{b.build(s.n, root)});
}

/// Realizable ERM bound at confidence 1/2: m = ceil((ln|C| + ln 2)/eps).
inline UniformLearner make_tree_learner(int n, int k, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("learner eps must be positive");
  UniformLearner l;
  l.name = "tree:" + std::to_string(k);
  l.learn = [k](const LabeledSample& s) { return exhaustive_tree_learn(s, k); };
  l.m = static_cast<std::uint64_t>(
      std::ceil((std::log(tree_class_size(n, k)) + std::log(2.0)) / eps));
  l.eps = eps;
  l.delta = 0.5;
  return l;
}

// ---------------------------------------------------------------------------
// Low-degree algorithm.
// ---------------------------------------------------------------------------

/// All masks over n coordinates with popcount <= k, by size then value.
inline std::vector<std::uint64_t> low_degree_masks(int n, int k) {
  std::vector<std::uint64_t> out;
  if (k < 0) return out;
  out.push_back(0);
  for (int size = 1; size <= std::min(k, n); ++size) {
    std::uint64_t m = (1ULL << size) - 1;
    const std::uint64_t limit = 1ULL << n;
    while (m < limit) {
      out.push_back(m);
      // Gosper's hack: next mask with the same popcount.
      const std::uint64_t c = m & (~m + 1);
      const std::uint64_t r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }
  return out;
}

inline Hypothesis low_degree_learn(const LabeledSample& s, int k, double /*eps*/) {
  if (s.empty()) return Hypothesis::constant(s.n, 0);
  const auto masks = low_degree_masks(s.n, k);
  const double count = static_cast<double>(s.size());
  const double floor = std::sqrt(2.0 * std::log(2.0 * static_cast<double>(masks.size())) / count);
  Hypothesis::LowDegree poly;
  for (std::uint64_t mask : masks) {
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const int y = s.labels[j] ? 1 : -1;
      acc += y * Hypothesis::character(mask, s.points[j]);
    }
    const double c = static_cast<double>(acc) / count;
    if (std::abs(c) >= floor) poly.terms.emplace_back(mask, c);
  }
  return Hypothesis(s.n, std::move(poly));
}

inline UniformLearner make_low_degree_learner(int n, int k, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("learner eps must be positive");
  const double coeffs = static_cast<double>(low_degree_masks(n, k).size());
  UniformLearner l;
  l.name = "lowdeg:" + std::to_string(k);
  l.learn = [k, eps](const LabeledSample& s) { return low_degree_learn(s, k, eps); };
  l.m = static_cast<std::uint64_t>(std::ceil(4.0 * coeffs * std::log(4.0 * coeffs) / eps));
  l.eps = eps;
  l.delta = 0.5;
  return l;
}

/// Majority vote over the labels; learns constants.
inline UniformLearner make_majority_learner(double eps) {
  UniformLearner l;
  l.name = "majority";
  l.learn = [](const LabeledSample& s) {
    std::size_t ones = 0;
    for (auto b : s.labels) ones += b;
    return Hypothesis::constant(s.n, 2 * ones > s.size() ? 1 : 0);
  };
  l.m = 1;
  l.eps = eps;
  l.delta = 0.5;
  return l;
}

/// Parses "lowdeg:k", "tree:k" or "majority".
inline UniformLearner make_learner(const std::string& descriptor, int n, double eps) {
  if (descriptor == "majority") return make_majority_learner(eps);
  const auto colon = descriptor.find(':');
  if (colon == std::string::npos) throw ArgumentError("unknown learner '" + descriptor + "'");
  const std::string kind = descriptor.substr(0, colon);
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(descriptor.substr(colon + 1), &used);
    if (used != descriptor.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ArgumentError("bad learner degree in '" + descriptor + "'");
  }
  if (k < 0) throw ArgumentError("learner degree must be >= 0");
  if (kind == "lowdeg") return make_low_degree_learner(n, k, eps);
  if (kind == "tree") return make_tree_learner(n, k, eps);
  throw ArgumentError("unknown learner '" + descriptor + "'");
}

}  // namespace dtdist
