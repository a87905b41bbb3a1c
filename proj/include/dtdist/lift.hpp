#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dtdist/builddt.hpp"
#include "dtdist/dense_pmf.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/hypothesis.hpp"
#include "dtdist/influence.hpp"
#include "dtdist/learners.hpp"
#include "dtdist/oracle.hpp"
#include "dtdist/random.hpp"

namespace dtdist {

/// M = ceil(8 (d + m + ln(2^{d+1}/delta)) 2^d / eps): enough labeled points
/// for every leaf of weight >= eps/2^d to receive m of them.
inline std::uint64_t required_sample_size(std::uint64_t m, int d, double eps, double delta) {
  if (m == 0 || d < 0 || !(eps > 0.0) || !(delta > 0.0)) {
    throw ArgumentError("required_sample_size needs positive m, eps, delta and d >= 0");
  }
  const double v = 8.0 * (d + static_cast<double>(m) + std::log(std::ldexp(1.0, d + 1) / delta)) *
                   std::ldexp(1.0, d) / eps;
  if (v > 1e18) throw BudgetError("required sample size overflows");
  return static_cast<std::uint64_t>(std::ceil(v));
}

/// Routes every example to its leaf of t and replaces the coordinates on that
/// leaf's path with fresh uniform signs.  Keys are leaf node indices; every
/// leaf is present, possibly with an empty sample.
inline std::map<int, LabeledSample> split_and_rerandomize(const DistTree& t, const LabeledSample& s,
                                                          Rng& rng) {
  if (s.n != t.dim()) throw DimensionError("sample and tree dimensions differ");
  const DecisionTree& tree = t.tree();
  std::map<int, LabeledSample> out;
  std::vector<std::uint64_t> path_mask(tree.nodes().size(), 0);
  for (const auto& leaf : tree.leaves()) {
    out[leaf.node] = LabeledSample{s.n, {}, {}, s.source_tag};
    path_mask[static_cast<std::size_t>(leaf.node)] = leaf.path.mask();
  }
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::uint64_t x = s.points[j];
    const int leaf = tree.leaf_of(x);
    const std::uint64_t pm = path_mask[static_cast<std::size_t>(leaf)];
    auto& dst = out[leaf];
    dst.points.push_back((x & ~pm) | (pm ? rng() & pm : 0));
    dst.labels.push_back(s.labels[j]);
  }
  return out;
}

struct LeafReport {
  int node = 0;
  std::size_t examples = 0;
  bool skipped = false;    // fewer than m examples: constant 0
  std::string error;       // learner failure, also answered by constant 0
};

struct LiftReport {
  std::vector<LeafReport> leaves;
  std::size_t skipped() const {
    std::size_t c = 0;
    for (const auto& l : leaves) c += l.skipped ? 1 : 0;
    return c;
  }
  std::size_t failed() const {
    std::size_t c = 0;
    for (const auto& l : leaves) c += l.error.empty() ? 0 : 1;
    return c;
  }
};

/// Runs `learner` on each leaf's rerandomized sample and stitches the results
/// into a leaf-routed hypothesis.
inline Hypothesis lift_learn(const DistTree& t, const UniformLearner& learner, const LabeledSample& s,
                             Rng& rng, LiftReport* report = nullptr) {
  auto parts = split_and_rerandomize(t, s, rng);
  const DecisionTree& tree = t.tree();
  Hypothesis::Routed routed;
  std::map<int, std::size_t> slot;
  for (auto& [node, sample] : parts) {
    LeafReport lr{node, sample.size(), false, {}};
    std::shared_ptr<const Hypothesis> h;
    if (sample.size() < learner.m) {
      lr.skipped = true;
    } else {
      try {
        h = std::make_shared<const Hypothesis>(learner.learn(sample));
      } catch (const std::exception& e) {
        lr.error = e.what();
      }
    }
    if (!h) h = std::make_shared<const Hypothesis>(Hypothesis::constant(t.dim(), 0));
    slot[node] = routed.leaves.size();
    routed.leaves.push_back(std::move(h));
    if (report) report->leaves.push_back(std::move(lr));
  }
  // Skeleton leaves hold their slot index.
  DecisionTree::Builder b;
  std::function<int(int)> copy = [&](int idx) {
    const auto& nd = tree.node(idx);
    if (nd.is_leaf()) return b.leaf(static_cast<double>(slot.at(idx)));
    const int lo = copy(nd.lo);
    const int hi = copy(nd.hi);
    return b.split(nd.var, lo, hi);
  };
  const int root = copy(0);
  routed.skeleton = b.build(t.dim(), root);
  return Hypothesis(t.dim(), std::move(routed));
}

/// Learner that runs `base` ceil(log2(2/delta_target)) times on disjoint
/// chunks and keeps the hypothesis with the fewest holdout mistakes.
inline UniformLearner boost(const UniformLearner& base, double delta_target, const Budget& budget = {}) {
  if (!(delta_target > 0.0) || delta_target >= 1.0) throw ArgumentError("boost needs delta in (0,1)");
  if (base.delta > 0.5) throw ArgumentError("boost needs a base learner with delta <= 1/2");
  const auto runs = static_cast<std::uint64_t>(std::ceil(std::log2(2.0 / delta_target)));
  const double tol = 0.05 * base.eps;
  const double hold_need = std::ceil(2.0 * std::log(4.0 * static_cast<double>(runs) / delta_target) /
                                     (tol * tol));
  const std::uint64_t holdout =
      std::min<std::uint64_t>(budget.max_holdout, static_cast<std::uint64_t>(std::min(hold_need, 1e18)));
  UniformLearner out;
  out.name = base.name + "+boost";
  out.m = runs * base.m + holdout;
  out.eps = 1.1 * base.eps;
  out.delta = delta_target;
  out.c = base.robustness();
  out.learn = [base, runs, holdout](const LabeledSample& s) {
    if (s.size() < runs * base.m + holdout) {
      throw ArgumentError("boost: " + std::to_string(s.size()) + " examples cannot fill " +
                          std::to_string(runs) + " chunks of " + std::to_string(base.m) +
                          " plus a holdout of " + std::to_string(holdout));
    }
    const std::size_t train = s.size() - holdout;
    const std::size_t chunk = train / runs;
    std::size_t best_err = std::numeric_limits<std::size_t>::max();
    Hypothesis best;
    for (std::uint64_t r = 0; r < runs; ++r) {
      Hypothesis h = base.learn(s.slice(r * chunk, (r + 1) * chunk));
      std::size_t err = 0;
      for (std::size_t j = train; j < s.size(); ++j) {
        err += static_cast<std::size_t>(h.predict(s.points[j]) != s.labels[j]);
      }
      if (err < best_err) {
        best_err = err;
        best = std::move(h);
      }
    }
    return best;
  };
  return out;
}

/// Pr_{x~D}[h(x) != f*(x)], exactly, with f* given as a truth table.
inline double weighted_error(const Hypothesis& h, const DensePmf& d,
                             const std::vector<std::uint8_t>& truth) {
  if (h.dim() != d.dim() || truth.size() != d.size()) {
    throw DimensionError("weighted_error: dimension mismatch");
  }
  double err = 0.0;
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    if (h.predict(x) != truth[x]) err += d.pmf(x);
  }
  return err;
}

/// Draws one labeled example (x, f*(x)) with x ~ D.
using LabeledStream = std::function<std::pair<std::uint64_t, int>()>;

struct EndToEndOptions {
  Budget budget{};
  std::uint64_t seed = 0;  // rerandomization stream
  /// Influence estimator; by default SAMPLE access uses the monotone bias
  /// estimator, SUBCUBE_SAMPLE uses InfEst and EXACT_PMF exact influences.
  std::optional<InfluenceKind> kind;
};

struct EndToEndResult {
  Hypothesis hypothesis;
  LearnResult distribution;
  double dist_eps = 0.0;            // TV target eps / (3m)
  double leaf_delta = 0.0;          // per-leaf failure delta / (2 2^d)
  UniformLearner boosted;
  std::uint64_t samples_planned = 0;
  std::uint64_t samples_used = 0;
  LiftReport report;
};

inline InfluenceKind default_kind(AccessMode m) {
  switch (m) {
    case AccessMode::Sample: return InfluenceKind::MonotoneBias;
    case AccessMode::SubcubeSample: return InfluenceKind::SubcubeInfEst;
    case AccessMode::ExactPmf: return InfluenceKind::Exact;
  }
  return InfluenceKind::Exact;
}

/// Learns D as a depth-d tree, then lifts the boosted learner through it.
/// Failures are rethrown as StageError naming the stage.
inline EndToEndResult end_to_end(DistOracle& d_oracle, const LabeledStream& stream,
                                 const UniformLearner& learner, int n, int d, double eps, double delta,
                                 const EndToEndOptions& opt = {}) {
  if (!(eps > 0.0) || eps >= 1.0 || !(delta > 0.0) || delta >= 1.0) {
    throw ArgumentError("end_to_end needs eps, delta in (0,1)");
  }
  EndToEndResult out;
  const InfluenceKind kind = opt.kind.value_or(default_kind(d_oracle.mode()));
  out.dist_eps = eps / learner.robustness();
  out.leaf_delta = delta / (2.0 * std::ldexp(1.0, d));
  try {
    LearnOptions lo;
    lo.budget = opt.budget;
    out.distribution = learn_distribution(d_oracle, n, d, out.dist_eps, delta / 2.0, kind, lo);
  } catch (const std::exception& e) {
    throw StageError("learn_distribution", e.what());
  }
  try {
    out.boosted = boost(learner, out.leaf_delta, opt.budget);
  } catch (const std::exception& e) {
    throw StageError("boost", e.what());
  }
  LabeledSample sample{n, {}, {}, "end_to_end"};
  try {
    out.samples_planned = required_sample_size(out.boosted.m, d, eps, delta);
    out.samples_used = std::min(out.samples_planned, opt.budget.max_lift_samples);
    sample.points.reserve(out.samples_used);
    sample.labels.reserve(out.samples_used);
    for (std::uint64_t j = 0; j < out.samples_used; ++j) {
      const auto [x, y] = stream();
      sample.add(x, y);
    }
  } catch (const std::exception& e) {
    throw StageError("sample", e.what());
  }
  try {
    Rng rng(stream_seed(opt.seed, "lift.rerandomize"));
    out.hypothesis = lift_learn(out.distribution.tree, out.boosted, sample, rng, &out.report);
  } catch (const std::exception& e) {
    throw StageError("lift_learn", e.what());
  }
  return out;
}

}  // namespace dtdist
