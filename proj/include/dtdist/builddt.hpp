#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/influence.hpp"
#include "dtdist/oracle.hpp"
#include "dtdist/point.hpp"

namespace dtdist {

enum class ThresholdMode { Exact, Estimated };

struct BuildParams {
  int depth = 0;
  double tau = 0.0;
  double eps = 0.0;
  double delta = 0.1;
  std::uint64_t leaf_sample_count = 0;
  ThresholdMode threshold_mode = ThresholdMode::Exact;

  void validate(int n) const {
    if (depth < 0 || depth > n) throw ArgumentError("depth budget must lie in [0, n]");
    if (!(eps > 0.0) || !(tau > 0.0)) throw ArgumentError("tau and eps must be positive");
    if (tau > eps) throw ArgumentError("tau must not exceed eps");
    if (!(delta > 0.0) || delta >= 1.0) throw ArgumentError("delta must lie in (0,1)");
  }
};

struct SearchStats {
  std::uint64_t recursive_calls = 0;
  std::uint64_t influence_queries = 0;
  std::uint64_t leaf_estimates = 0;
  std::uint64_t memo_hits = 0;
};

/// Plain samples for one leaf label: ceil(32 4^d ln(2^{d+2}/delta) / eps^2).
inline std::uint64_t leaf_sample_count(int d, double eps, double delta) {
  const double c = 32.0 * std::ldexp(1.0, 2 * d) * std::log(std::ldexp(1.0, d + 2) / delta) /
                   (eps * eps);
  if (c > 1e18) throw BudgetError("leaf sample count overflows");
  return static_cast<std::uint64_t>(std::ceil(c));
}

/// Bound on the number of BuildDT invocations: (16 d^3 / eps)^d.
inline double call_bound(int d, double eps) {
  if (d == 0) return 1.0;
  return std::pow(16.0 * d * d * d / eps, d);
}

/// Coordinates that qualify as split candidates at s, in increasing order.
inline std::vector<int> select_candidates(const std::vector<double>& influences,
                                          const Restriction& s, const BuildParams& p) {
  const double cut = p.threshold_mode == ThresholdMode::Exact ? p.tau : 0.75 * p.tau;
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(influences.size()); ++i) {
    if (!s.fixes(i) && influences[static_cast<std::size_t>(i)] >= cut) out.push_back(i);
  }
  return out;
}

inline std::vector<int> candidate_set(InfluenceOracle& oracle, const Restriction& s,
                                      const BuildParams& p) {
  if (p.threshold_mode == ThresholdMode::Estimated && oracle.accuracy() > p.tau / 4.0) {
    throw ArgumentError("estimated thresholds need influence accuracy <= tau/4");
  }
  return select_candidates(oracle.estimate_all(s), s, p);
}

/// Leaf density for restriction s: 2^{|s|} Pr_D[s] / 2^n, exact with
/// EXACT_PMF access and otherwise the empirical fraction of
/// p.leaf_sample_count plain samples.
inline double leaf_label(DistOracle& oracle, const Restriction& s, const BuildParams& p) {
  s.check_within(oracle.dim());
  const int n = oracle.dim();
  if (oracle.grants(AccessMode::ExactPmf)) {
    return std::ldexp(oracle.subcube_weight(s), s.depth() - n);
  }
  if (p.leaf_sample_count == 0) throw ArgumentError("leaf_sample_count must be positive");
  std::uint64_t hits = 0;
  for (std::uint64_t k = 0; k < p.leaf_sample_count; ++k) {
    hits += s.consistent(oracle.sample_bits()) ? 1 : 0;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(p.leaf_sample_count);
  return std::ldexp(frac, s.depth() - n);
}

/// Leaf-uniform average of total influence at the leaves of `shape`:
/// objective(internal) = (objective(lo) + objective(hi)) / 2.
inline double tree_objective(const DecisionTree& shape, InfluenceOracle& oracle) {
  struct Walk {
    const DecisionTree& t;
    InfluenceOracle& o;
    double operator()(int idx, const Restriction& s) const {
      const auto& nd = t.node(idx);
      if (nd.is_leaf()) {
        double total = 0.0;
        for (double v : o.estimate_all(s)) total += v;
        return total;
      }
      return 0.5 * ((*this)(nd.lo, s.extended(nd.var, -1)) + (*this)(nd.hi, s.extended(nd.var, +1)));
    }
  };
  return Walk{shape, oracle}(0, Restriction{});
}

/// Output of a search from restriction s.  Leaf values of `tree` are
/// weighting-scale labels 2^{|l|} Pr_D[l] (not densities).
struct BuildResult {
  DecisionTree tree;
  double objective = 0.0;
  SearchStats stats;
};

/// Exhaustive search over depth-limited, everywhere tau-influential trees
/// minimizing the expected total influence at the leaves.  Subtree results
/// are memoized by (restriction as a set, remaining depth).
class TreeSearch {
 public:
  TreeSearch(DistOracle& dist, InfluenceOracle& infl, BuildParams params)
      : dist_(dist), infl_(infl), p_(params) {
    p_.validate(dist.dim());
    if (p_.threshold_mode == ThresholdMode::Estimated && infl.accuracy() > p_.tau / 4.0) {
      throw ArgumentError("estimated thresholds need influence accuracy <= tau/4");
    }
    call_guard_ = call_bound(p_.depth, p_.eps) * std::max(1, dist.dim());
  }

  /// Leaf labels read from this pool instead of fresh samples per leaf.
  void use_pool(std::shared_ptr<SamplePool> pool) { pool_ = std::move(pool); }

  BuildResult run(const Restriction& s) {
    s.check_within(dist_.dim());
    const std::uint64_t q0 = infl_.queries();
    const auto node = search(s, p_.depth);
    stats_.influence_queries = infl_.queries() - q0;
    DecisionTree::Builder b;
    const int root = flatten(*node, b);
    return BuildResult{b.build(dist_.dim(), root), node->objective, stats_};
  }

  const SearchStats& stats() const noexcept { return stats_; }

 private:
  struct Shape {
    int var = -1;
    std::shared_ptr<const Shape> lo, hi;
    double label = 0.0;
    double objective = 0.0;
  };
  using ShapePtr = std::shared_ptr<const Shape>;
  using Key = std::pair<std::uint64_t, std::uint64_t>;

  struct MemoKeyHash {
    std::size_t operator()(const std::pair<Key, int>& k) const noexcept {
      return RestrictionKeyHash{}(k.first) ^ (static_cast<std::size_t>(k.second) * 0x9e3779b97f4a7c15ULL);
    }
  };

  ShapePtr search(const Restriction& s, int budget) {
    if (++stats_.recursive_calls > call_guard_) {
      throw BudgetError("BuildDT recursion guard exceeded (" + std::to_string(call_guard_) + " calls)");
    }
    const auto memo_key = std::make_pair(s.key(), budget);
    if (auto it = memo_.find(memo_key); it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second;
    }
    ShapePtr result;
    if (zero_mass(s)) {
      result = std::make_shared<const Shape>(Shape{-1, nullptr, nullptr, 0.0, 0.0});
    } else {
      const auto& infl = influences(s);
      double leaf_obj = 0.0;
      for (double v : infl) leaf_obj += v;
      const auto cands = budget > 0 ? select_candidates(infl, s, p_) : std::vector<int>{};
      if (cands.empty()) {
        result = std::make_shared<const Shape>(Shape{-1, nullptr, nullptr, label(s), leaf_obj});
      } else {
        double best = std::numeric_limits<double>::infinity();
        for (int i : cands) {
          auto lo = search(s.extended(i, -1), budget - 1);
          auto hi = search(s.extended(i, +1), budget - 1);
          const double obj = 0.5 * (lo->objective + hi->objective);
          // Smallest index wins ties.
          if (obj < best - 1e-12) {
            best = obj;
            result = std::make_shared<const Shape>(Shape{i, lo, hi, 0.0, obj});
          }
        }
      }
    }
    memo_.emplace(memo_key, result);
    return result;
  }

  bool zero_mass(const Restriction& s) {
    if (s.empty()) return false;
    if (dist_.grants(AccessMode::ExactPmf)) return !(dist_.dense().restricted_mass(s) > 0.0);
    if (pool_) return pool_->stats(s).consistent == 0;
    return false;
  }

  const std::vector<double>& influences(const Restriction& s) {
    auto it = influence_cache_.find(s.key());
    if (it != influence_cache_.end()) return it->second;
    return influence_cache_.emplace(s.key(), infl_.estimate_all(s)).first->second;
  }

  double label(const Restriction& s) {
    ++stats_.leaf_estimates;
    if (pool_ && !dist_.grants(AccessMode::ExactPmf)) {
      return std::ldexp(pool_->weight(s), s.depth());
    }
    return std::ldexp(leaf_label(dist_, s, p_), dist_.dim());
  }

  static int flatten(const Shape& sh, DecisionTree::Builder& b) {
    if (sh.var < 0) return b.leaf(sh.label);
    const int lo = flatten(*sh.lo, b);
    const int hi = flatten(*sh.hi, b);
    return b.split(sh.var, lo, hi);
  }

  DistOracle& dist_;
  InfluenceOracle& infl_;
  BuildParams p_;
  std::shared_ptr<SamplePool> pool_;
  double call_guard_ = 0.0;
  SearchStats stats_;
  std::unordered_map<std::pair<Key, int>, ShapePtr, MemoKeyHash> memo_;
  std::unordered_map<Key, std::vector<double>, RestrictionKeyHash> influence_cache_;
};

inline BuildResult build_dt(DistOracle& dist, InfluenceOracle& infl, const Restriction& s,
                            const BuildParams& p) {
  TreeSearch search(dist, infl, p);
  return search.run(s);
}

struct LearnOptions {
  double tau_override = 0.0;  // > 0 replaces eps / (8 d^2)
  Budget budget{};
};

struct LearnResult {
  DistTree tree = DistTree::uniform(0);
  DecisionTree raw_labels;  // leaf labels before renormalization (weighting scale)
  double objective = 0.0;
  double tau = 0.0;
  double influence_accuracy = 0.0;  // requested per-query accuracy
  double achieved_accuracy = 0.0;   // worst accuracy delivered under the budget
  std::uint64_t pool_planned = 0;
  std::uint64_t pool_used = 0;
  SearchStats stats;
  QueryCounts queries;
};

/// Learns a depth-d tree distribution within TV eps of D (w.p. 1 - delta for
/// the estimating kinds).  tau defaults to eps / (8 d^2).
inline LearnResult learn_distribution(DistOracle& oracle, int n, int d, double eps, double delta,
                                      InfluenceKind kind, const LearnOptions& opt = {}) {
  if (n != oracle.dim()) throw DimensionError("learn_distribution: n does not match the oracle");
  if (d < 0 || d > n) throw ArgumentError("depth must lie in [0, n]");
  if (!(eps > 0.0) || eps >= 1.0 || !(delta > 0.0) || delta >= 1.0) {
    throw ArgumentError("eps and delta must lie in (0,1)");
  }
  const QueryCounts before = oracle.counts();
  LearnResult out;
  out.tau = opt.tau_override > 0.0 ? opt.tau_override
                                   : (d == 0 ? eps : eps / (8.0 * d * d));
  const double accuracy = std::min(out.tau / 4.0, eps / n);
  out.influence_accuracy = accuracy;
  // Union bound over every influence query the search can make.
  const double per_query_delta = delta / (2.0 * n * std::max(1.0, call_bound(d, eps)));

  BuildParams p;
  p.depth = d;
  p.tau = out.tau;
  p.eps = eps;
  p.delta = delta;
  p.leaf_sample_count = leaf_sample_count(d, eps, delta);
  p.threshold_mode = kind == InfluenceKind::Exact ? ThresholdMode::Exact : ThresholdMode::Estimated;

  InfluenceOracle infl(kind, oracle, accuracy, per_query_delta, opt.budget);
  TreeSearch search(oracle, infl, p);
  if (kind != InfluenceKind::Exact) {
    // Pool large enough for the leaf labels and for pooled influence estimates
    // 2^d sqrt(2 ln(2/delta') / N) <= accuracy; capped by the budget.
    const double infl_need = 2.0 * std::ldexp(1.0, 2 * d) * std::log(2.0 / per_query_delta) /
                             (accuracy * accuracy);
    const double planned = std::max(static_cast<double>(p.leaf_sample_count), infl_need);
    out.pool_planned = planned > 1e18 ? std::numeric_limits<std::uint64_t>::max()
                                      : static_cast<std::uint64_t>(std::ceil(planned));
    out.pool_used = std::min(out.pool_planned, opt.budget.max_pool_samples);
    auto pool = std::make_shared<SamplePool>(oracle, out.pool_used);
    infl.attach_pool(pool);
    search.use_pool(pool);
  }
  BuildResult built = search.run(Restriction{});
  out.raw_labels = built.tree;
  out.objective = built.objective;
  out.stats = built.stats;
  out.achieved_accuracy = infl.worst_accuracy();
  const DecisionTree densities =
      built.tree.map_leaves([n](double label) { return std::ldexp(label, -n); });
  try {
    out.tree = DistTree::normalized(densities);
  } catch (const ArgumentError& e) {
    throw ArgumentError(std::string("normalization failure: ") + e.what());
  }
  QueryCounts after = oracle.counts();
  out.queries = QueryCounts{after.sample - before.sample, after.subcube - before.subcube,
                            after.exact - before.exact};
  return out;
}

}  // namespace dtdist
