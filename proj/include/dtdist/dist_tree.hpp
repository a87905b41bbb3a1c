#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/point.hpp"
#include "dtdist/random.hpp"

namespace dtdist {

/// Absolute tolerance for the normalization invariant and exact identities.
inline constexpr double kExactTol = 1e-9;

/// A distribution over {-1,1}^n whose pmf is computed by a decision tree: each
/// leaf holds the density p_l shared by all 2^(n-|l|) points reaching it.
/// Immutable; subtree masses are computed once at construction.
class DistTree {
 public:
  /// Validates nonnegative densities and sum_l 2^(n-|l|) p_l = 1 within 1e-9.
  explicit DistTree(DecisionTree densities) : tree_(std::move(densities)) {
    for (const auto& nd : tree_.nodes()) {
      if (nd.is_leaf() && !(nd.value >= 0.0)) throw ArgumentError("negative leaf density");
    }
    mass_.assign(tree_.nodes().size(), 0.0);
    const double total = fill_mass(0, 0);
    if (std::abs(total - 1.0) > kExactTol) {
      throw ArgumentError("leaf densities sum to " + std::to_string(total) + ", not 1");
    }
  }

  static DistTree uniform(int n) {
    check_dim(n);
    return DistTree(DecisionTree::constant(n, std::ldexp(1.0, -n)));
  }

  /// Scales the leaf densities of `raw` so that they are normalized.
  static DistTree normalized(const DecisionTree& raw) {
    double total = 0.0;
    for (const auto& leaf : raw.leaves()) {
      if (leaf.value < 0.0) throw ArgumentError("negative leaf density");
      total += std::ldexp(leaf.value, raw.dim() - leaf.path.depth());
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw ArgumentError("cannot normalize a tree with zero total mass");
    }
    return DistTree(raw.map_leaves([total](double v) { return v / total; }));
  }

  int dim() const noexcept { return tree_.dim(); }
  const DecisionTree& tree() const noexcept { return tree_; }
  int depth() const { return tree_.depth(); }

  double pmf(const Point& x) const { return tree_.eval(x); }
  double pmf(std::uint64_t bits) const noexcept { return tree_.eval(bits); }

  /// Probability mass of the subtree rooted at node `idx`.
  double mass(int idx) const { return mass_[static_cast<std::size_t>(idx)]; }

  /// Pr_{x~D}[x consistent with s].
  double restricted_mass(const Restriction& s) const {
    s.check_within(dim());
    return cond_mass(0, 0, s);
  }

  /// Draw by descending with probability proportional to subtree mass, then
  /// filling the coordinates off the path uniformly.
  Point sample(Rng& rng) const { return Point(dim(), sample_bits(rng)); }

  std::uint64_t sample_bits(Rng& rng) const {
    int idx = 0;
    std::uint64_t mask = 0, vals = 0;
    while (!tree_.node(idx).is_leaf()) {
      const auto& nd = tree_.node(idx);
      const double lo = mass(nd.lo), hi = mass(nd.hi);
      const bool go_hi = uniform01(rng) * (lo + hi) >= lo && hi > 0.0;
      mask |= 1ULL << nd.var;
      if (go_hi) vals |= 1ULL << nd.var;
      idx = go_hi ? nd.hi : nd.lo;
    }
    return vals | (rng() & low_mask(dim()) & ~mask);
  }

  /// Exact draw from D conditioned on consistency with s.
  Point sample_conditional(const Restriction& s, Rng& rng) const {
    s.check_within(dim());
    std::vector<double> cm(tree_.nodes().size(), 0.0);
    if (!(fill_cond_mass(0, 0, s, cm) > 0.0)) {
      throw ZeroWeightError("subcube " + s.to_string() + " has zero probability");
    }
    return Point(dim(), sample_conditional_bits(s, cm, rng));
  }

  /// Conditional masses of every node under s (for repeated conditional draws).
  std::vector<double> conditional_masses(const Restriction& s) const {
    std::vector<double> cm(tree_.nodes().size(), 0.0);
    fill_cond_mass(0, 0, s, cm);
    return cm;
  }

  std::uint64_t sample_conditional_bits(const Restriction& s, const std::vector<double>& cm,
                                        Rng& rng) const {
    int idx = 0;
    std::uint64_t mask = 0, vals = 0;
    while (!tree_.node(idx).is_leaf()) {
      const auto& nd = tree_.node(idx);
      bool go_hi;
      if (s.fixes(nd.var)) {
        go_hi = s.value(nd.var) > 0;
      } else {
        const double lo = cm[static_cast<std::size_t>(nd.lo)];
        const double hi = cm[static_cast<std::size_t>(nd.hi)];
        go_hi = uniform01(rng) * (lo + hi) >= lo && hi > 0.0;
      }
      mask |= 1ULL << nd.var;
      if (go_hi) vals |= 1ULL << nd.var;
      idx = go_hi ? nd.hi : nd.lo;
    }
    const std::uint64_t fixed = mask | s.mask();
    return vals | s.values() | (rng() & low_mask(dim()) & ~fixed);
  }

 private:
  double fill_mass(int idx, int depth) {
    const auto& nd = tree_.node(idx);
    double m;
    if (nd.is_leaf()) {
      m = std::ldexp(nd.value, dim() - depth);
    } else {
      m = fill_mass(nd.lo, depth + 1) + fill_mass(nd.hi, depth + 1);
    }
    mass_[static_cast<std::size_t>(idx)] = m;
    return m;
  }

  double cond_mass(int idx, std::uint64_t path, const Restriction& s) const {
    const auto& nd = tree_.node(idx);
    if (nd.is_leaf()) {
      const int fixed = std::popcount(path | s.mask());
      return std::ldexp(nd.value, dim() - fixed);
    }
    const std::uint64_t p = path | (1ULL << nd.var);
    if (s.fixes(nd.var)) return cond_mass(s.value(nd.var) > 0 ? nd.hi : nd.lo, p, s);
    return cond_mass(nd.lo, p, s) + cond_mass(nd.hi, p, s);
  }

  double fill_cond_mass(int idx, std::uint64_t path, const Restriction& s,
                        std::vector<double>& cm) const {
    const auto& nd = tree_.node(idx);
    double m;
    if (nd.is_leaf()) {
      m = std::ldexp(nd.value, dim() - std::popcount(path | s.mask()));
    } else {
      const std::uint64_t p = path | (1ULL << nd.var);
      if (s.fixes(nd.var)) {
        m = fill_cond_mass(s.value(nd.var) > 0 ? nd.hi : nd.lo, p, s, cm);
      } else {
        m = fill_cond_mass(nd.lo, p, s, cm) + fill_cond_mass(nd.hi, p, s, cm);
      }
    }
    cm[static_cast<std::size_t>(idx)] = m;
    return m;
  }

  DecisionTree tree_;
  std::vector<double> mass_;
};

}  // namespace dtdist
