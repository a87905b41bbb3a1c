#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtdist/dense_pmf.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/oracle.hpp"
#include "dtdist/point.hpp"

namespace dtdist {

struct InfluenceEstimate {
  int coord = 0;
  double value = 0.0;  // always >= 0
  Restriction restriction;
  double accuracy = 0.0;    // additive accuracy the estimate was sized for
  double confidence = 0.0;  // failure probability it was sized for
  std::uint64_t samples_used = 0;  // 0 for exact values
};

namespace detail {

inline void check_free_coord(int n, int i, const Restriction& s) {
  if (i < 0 || i >= n) throw DimensionError("coordinate " + std::to_string(i) + " out of range");
  if (s.fixes(i)) {
    throw ArgumentError("coordinate " + std::to_string(i) + " is fixed by " + s.to_string());
  }
}

inline double sum_abs_pairs(const DensePmf& d, int i, const Restriction& s) {
  const std::uint64_t b = 1ULL << i;
  double acc = 0.0;
  for_each_consistent(d.dim(), s.mask() | b, s.values(),
                      [&](std::uint64_t x) { acc += std::abs(d.pmf(x) - d.pmf(x | b)); });
  return acc;
}

inline void require_weight(const DensePmf& d, const Restriction& s) {
  if (!(d.restricted_mass(s) > 0.0)) {
    throw ZeroWeightError("subcube " + s.to_string() + " has zero weight");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact influences by enumeration.
//
// Inf_i((f_D)_s) = E_{x~U}|f_s(x) - f_s(x^{~i})| = (1/2) E_x|f_s(x) - f_s(x^{+i})|
// with f = 2^n D.  Only the 2^(n-|s|) points consistent with s matter.
// ---------------------------------------------------------------------------

inline double exact_influence(const DensePmf& d, int i, const Restriction& s = {}) {
  s.check_within(d.dim());
  detail::check_free_coord(d.dim(), i, s);
  detail::require_weight(d, s);
  // (1/2) * 2^-(n-|s|) * sum over consistent x of |f(x) - f(x^i)|, each pair counted once
  // on the x_i = -1 side (hence no 1/2), and f = 2^n D.
  return std::ldexp(detail::sum_abs_pairs(d, i, s), s.depth());
}

/// Influences of every coordinate (0 for coordinates fixed by s).
inline std::vector<double> exact_influences(const DensePmf& d, const Restriction& s = {}) {
  s.check_within(d.dim());
  detail::require_weight(d, s);
  const int n = d.dim();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for_each_consistent(n, s.mask(), s.values(), [&](std::uint64_t x) {
    const double fx = d.pmf(x);
    for (int i = 0; i < n; ++i) {
      const std::uint64_t b = 1ULL << i;
      if ((s.mask() & b) || (x & b)) continue;
      out[static_cast<std::size_t>(i)] += std::abs(fx - d.pmf(x | b));
    }
  });
  for (double& v : out) v = std::ldexp(v, s.depth());
  return out;
}

inline double exact_total_influence(const DensePmf& d, const Restriction& s = {}) {
  const auto inf = exact_influences(d, s);
  double total = 0.0;
  for (double v : inf) total += v;
  return total;
}

/// Inf_i((f_D)_s) = 2^{|s|} * Pr_D[s] * Inf_i(f_{D_s}).
inline double scale_to_restriction(double cond_inf, const Restriction& s, double weight) {
  return std::ldexp(weight * cond_inf, s.depth());
}

// ---------------------------------------------------------------------------
// Monotone distributions: Inf_i(f_E) = E_{x~E}[x_i].
// ---------------------------------------------------------------------------

/// Hoeffding sample count for a [-1,1]-valued mean to be within +-eps w.p. 1-delta.
inline std::uint64_t hoeffding_count(double eps, double delta, double range = 2.0) {
  if (!(eps > 0.0) || !(delta > 0.0) || delta >= 1.0) {
    throw ArgumentError("hoeffding_count needs eps > 0 and delta in (0,1)");
  }
  const double m = range * range * std::log(2.0 / delta) / (2.0 * eps * eps);
  if (m > 1e18) throw BudgetError("required sample count overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(m)));
}

/// Estimate of Inf_i(f_{D_s}) (the conditional distribution) from plain
/// samples filtered to s.  x_i ranges over [-1,1], so Hoeffding needs
/// ceil(2 ln(2/delta)/eps^2) conditioned draws.
inline InfluenceEstimate monotone_bias_estimate(DistOracle& oracle, int i, const Restriction& s,
                                                double eps, double delta) {
  s.check_within(oracle.dim());
  detail::check_free_coord(oracle.dim(), i, s);
  const std::uint64_t q = hoeffding_count(eps, delta);
  std::int64_t sum = 0;
  for (std::uint64_t k = 0; k < q; ++k) sum += oracle.sample_consistent(s)[i];
  const double mean = static_cast<double>(sum) / static_cast<double>(q);
  return InfluenceEstimate{i, std::max(0.0, mean), s, eps, delta, q};
}

// ---------------------------------------------------------------------------
// Subcube conditional sampling.
// ---------------------------------------------------------------------------

/// Samples drawn inside one InfEst run for bias parameter eps.
inline std::uint64_t infest_inner_count(double eps) {
  if (!(eps > 0.0)) throw ArgumentError("infest needs eps > 0");
  const double k = std::ceil(1.0 / (eps * eps));
  if (k > 1e18) throw BudgetError("infest inner sample count overflows");
  return static_cast<std::uint64_t>(k);
}

namespace detail {

inline double infest_run(DistOracle& oracle, int i, const Restriction& s, std::uint64_t k) {
  const Point x = oracle.subcube_sample(s);
  // The two-point subcube {x, x^{+i}}, intersected with s.
  const std::uint64_t pair_mask = low_mask(oracle.dim()) & ~(1ULL << i);
  const Restriction pair = Restriction::from_masks(pair_mask, x.bits() & pair_mask);
  const std::uint64_t hits = oracle.subcube_count_equal(pair, k, x);
  const double p = static_cast<double>(hits) / static_cast<double>(k);
  return std::abs(p - (1.0 - p));
}

}  // namespace detail

/// One run of InfEst on E = D_s: its expectation is within eps of Inf_i(f_{D_s}).
inline double infest(DistOracle& oracle, int i, const Restriction& s, double eps) {
  s.check_within(oracle.dim());
  detail::check_free_coord(oracle.dim(), i, s);
  return detail::infest_run(oracle, i, s, infest_inner_count(eps));
}

/// Number of InfEst(eps/2) runs averaged for accuracy eps at confidence 1-delta (C = 2).
inline std::uint64_t infest_run_count(double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0) || delta >= 1.0) {
    throw ArgumentError("infest_high_accuracy needs eps > 0 and delta in (0,1)");
  }
  const double half = eps / 2.0;
  const double r = std::ceil(2.0 * std::log(2.0 / delta) / (half * half));
  if (r > 1e18) throw BudgetError("infest run count overflows");
  return static_cast<std::uint64_t>(r);
}

/// Caps applied when an estimator is used inside a pipeline.  The unbounded
/// budget reproduces the Hoeffding-sized counts exactly.
struct Budget {
  std::uint64_t max_pool_samples = std::uint64_t{1} << 21;
  std::uint64_t max_conditional_samples = std::uint64_t{1} << 20;
  std::uint64_t max_infest_runs = 2048;
  std::uint64_t max_infest_inner = std::uint64_t{1} << 20;
  std::uint64_t max_holdout = 4096;
  std::uint64_t max_lift_samples = std::uint64_t{1} << 18;

  static Budget unbounded() {
    constexpr auto inf = std::numeric_limits<std::uint64_t>::max();
    return Budget{inf, inf, inf, inf, inf, inf};
  }
};

namespace detail {

/// Mean of `runs` InfEst runs with `inner` samples each; accuracy achieved at
/// confidence 1-delta is 1/sqrt(inner) (bias) + sqrt(ln(2/delta)/(2 runs)).
inline InfluenceEstimate infest_mean(DistOracle& oracle, int i, const Restriction& s,
                                     std::uint64_t runs, std::uint64_t inner, double delta) {
  // Pairwise summation keeps the mean independent of accumulation drift.
  std::vector<double> vals(runs);
  for (auto& v : vals) v = infest_run(oracle, i, s, inner);
  while (vals.size() > 1) {
    std::size_t half = vals.size() / 2;
    for (std::size_t k = 0; k < half; ++k) vals[k] = vals[2 * k] + vals[2 * k + 1];
    if (vals.size() % 2) vals[half++] = vals.back();
    vals.resize(half);
  }
  const double mean = vals[0] / static_cast<double>(runs);
  const double acc = 1.0 / std::sqrt(static_cast<double>(inner)) +
                     std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(runs)));
  return InfluenceEstimate{i, mean, s, acc, delta, runs * (inner + 1)};
}

}  // namespace detail

/// Mean of ceil(2 ln(2/delta)/(eps/2)^2) InfEst(eps/2) runs: within +-eps of
/// Inf_i(f_{D_s}) with probability >= 1 - delta.
inline InfluenceEstimate infest_high_accuracy(DistOracle& oracle, int i, const Restriction& s,
                                              double eps, double delta) {
  s.check_within(oracle.dim());
  detail::check_free_coord(oracle.dim(), i, s);
  const std::uint64_t runs = infest_run_count(eps, delta);
  const std::uint64_t inner = infest_inner_count(eps / 2.0);
  InfluenceEstimate est = detail::infest_mean(oracle, i, s, runs, inner, delta);
  est.accuracy = eps;
  return est;
}

// ---------------------------------------------------------------------------
// Shared pool of plain samples.
//
// Every restriction's estimates (weight, per-coordinate bias, leaf mass) are
// read off the same N draws; each individual estimate keeps its Hoeffding
// guarantee for the number of pool points consistent with it.
// ---------------------------------------------------------------------------

class SamplePool {
 public:
  struct Stats {
    std::uint64_t consistent = 0;        // pool points consistent with s
    std::vector<std::int64_t> sign_sum;  // sum of x_i over those points
  };

  SamplePool(DistOracle& oracle, std::uint64_t size) : n_(oracle.dim()) {
    if (size == 0) throw ArgumentError("sample pool must be nonempty");
    points_.resize(size);
    for (auto& p : points_) p = oracle.sample_bits();
    // Small cubes: a histogram makes per-restriction stats cost 2^{n-|s|}.
    if (n_ <= 20 && (std::uint64_t{1} << n_) <= size) {
      histogram_.assign(std::size_t{1} << n_, 0);
      for (std::uint64_t x : points_) ++histogram_[x];
    }
  }

  int dim() const noexcept { return n_; }
  std::uint64_t size() const noexcept { return points_.size(); }
  const std::vector<std::uint64_t>& points() const noexcept { return points_; }

  const Stats& stats(const Restriction& s) {
    auto it = cache_.find(s.key());
    if (it != cache_.end()) return it->second;
    Stats st;
    st.sign_sum.assign(static_cast<std::size_t>(n_), 0);
    std::vector<std::uint64_t> ones(static_cast<std::size_t>(n_), 0);
    if (!histogram_.empty()) {
      for_each_consistent(n_, s.mask(), s.values(), [&](std::uint64_t x) {
        const std::uint64_t c = histogram_[x];
        if (c == 0) return;
        st.consistent += c;
        for (std::uint64_t b = x; b != 0; b &= b - 1) ones[static_cast<std::size_t>(std::countr_zero(b))] += c;
      });
    } else {
      for (std::uint64_t x : points_) {
        if (!s.consistent(x)) continue;
        ++st.consistent;
        for (std::uint64_t b = x; b != 0; b &= b - 1) ++ones[static_cast<std::size_t>(std::countr_zero(b))];
      }
    }
    for (int i = 0; i < n_; ++i) {
      st.sign_sum[static_cast<std::size_t>(i)] =
          2 * static_cast<std::int64_t>(ones[static_cast<std::size_t>(i)]) -
          static_cast<std::int64_t>(st.consistent);
    }
    return cache_.emplace(s.key(), std::move(st)).first->second;
  }

  /// Empirical Pr_D[s].
  double weight(const Restriction& s) {
    return static_cast<double>(stats(s).consistent) / static_cast<double>(points_.size());
  }

 private:
  int n_;
  std::vector<std::uint64_t> points_;
  std::vector<std::uint32_t> histogram_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Stats, RestrictionKeyHash> cache_;
};

// ---------------------------------------------------------------------------
// Uniform front door over the three influence sources.
// ---------------------------------------------------------------------------

enum class InfluenceKind { Exact, MonotoneBias, SubcubeInfEst };

inline const char* to_string(InfluenceKind k) {
  switch (k) {
    case InfluenceKind::Exact: return "exact";
    case InfluenceKind::MonotoneBias: return "monotone";
    case InfluenceKind::SubcubeInfEst: return "subcube";
  }
  return "?";
}

inline AccessMode required_mode(InfluenceKind k) {
  switch (k) {
    case InfluenceKind::Exact: return AccessMode::ExactPmf;
    case InfluenceKind::MonotoneBias: return AccessMode::Sample;
    case InfluenceKind::SubcubeInfEst: return AccessMode::SubcubeSample;
  }
  return AccessMode::ExactPmf;
}

/// Answers Inf_i((f_D)_s) queries.  Estimating kinds read weights (and, for
/// MONOTONE_BIAS, biases) from a shared SamplePool when one is attached, and
/// otherwise draw fresh samples per query.
class InfluenceOracle {
 public:
  InfluenceOracle(InfluenceKind kind, DistOracle& source, double accuracy, double confidence,
                  Budget budget = {})
      : kind_(kind), source_(&source), accuracy_(accuracy), confidence_(confidence),
        budget_(budget) {
    if (!source.grants(required_mode(kind))) {
      throw ModeError(std::string("influence oracle '") + to_string(kind) + "' needs '" +
                      to_string(required_mode(kind)) + "' access, source grants '" +
                      to_string(source.mode()) + "'");
    }
    if (!(accuracy > 0.0) || !(confidence > 0.0) || confidence >= 1.0) {
      throw ArgumentError("influence oracle needs accuracy > 0 and confidence in (0,1)");
    }
  }

  InfluenceKind kind() const noexcept { return kind_; }
  double accuracy() const noexcept { return accuracy_; }
  double confidence() const noexcept { return confidence_; }
  const Budget& budget() const noexcept { return budget_; }
  DistOracle& source() noexcept { return *source_; }
  std::uint64_t queries() const noexcept { return queries_; }
  /// Worst additive accuracy actually achieved by any answer so far.
  double worst_accuracy() const noexcept { return worst_accuracy_; }

  void attach_pool(std::shared_ptr<SamplePool> pool) { pool_ = std::move(pool); }
  const std::shared_ptr<SamplePool>& pool() const noexcept { return pool_; }

  InfluenceEstimate estimate(int i, const Restriction& s) {
    return estimate(i, s, accuracy_, confidence_);
  }

  /// Estimate of Inf_i((f_D)_s) within +-accuracy w.p. >= 1 - confidence
  /// (subject to the budget; the returned accuracy is what was achieved).
  InfluenceEstimate estimate(int i, const Restriction& s, double accuracy, double confidence) {
    const int n = source_->dim();
    s.check_within(n);
    detail::check_free_coord(n, i, s);
    ++queries_;
    InfluenceEstimate est;
    switch (kind_) {
      case InfluenceKind::Exact: {
        const DensePmf& d = source_->dense();
        est = InfluenceEstimate{i, exact_influence(d, i, s), s, 0.0, 0.0, 0};
        break;
      }
      case InfluenceKind::MonotoneBias:
        est = pool_ ? monotone_from_pool(i, s, confidence) : monotone_fresh(i, s, accuracy, confidence);
        break;
      case InfluenceKind::SubcubeInfEst:
        est = subcube(i, s, accuracy, confidence);
        break;
    }
    worst_accuracy_ = std::max(worst_accuracy_, est.accuracy);
    return est;
  }

  /// Estimates for every coordinate (entries for fixed coordinates are 0).
  std::vector<double> estimate_all(const Restriction& s) {
    const int n = source_->dim();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    if (kind_ == InfluenceKind::Exact) {
      queries_ += static_cast<std::uint64_t>(n - s.depth());
      return exact_influences(source_->dense(), s);
    }
    for (int i = 0; i < n; ++i) {
      if (!s.fixes(i)) out[static_cast<std::size_t>(i)] = estimate(i, s).value;
    }
    return out;
  }

 private:
  // Conditional accuracy needed so that 2^{|s|} w_hat times it stays within `accuracy`.
  static double conditional_accuracy(double accuracy, const Restriction& s, double w_hat) {
    return accuracy / (std::ldexp(1.0, s.depth()) * std::clamp(w_hat, 1e-12, 1.0));
  }

  double weight_estimate(const Restriction& s, double accuracy, double confidence,
                         std::uint64_t& used) {
    if (s.empty()) return 1.0;
    if (pool_) {
      used += pool_->size();
      return pool_->weight(s);
    }
    const double tol = std::ldexp(accuracy, -(s.depth() + 2));
    const std::uint64_t q =
        std::min(hoeffding_count(tol, confidence, 1.0), budget_.max_pool_samples);
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < q; ++k) hits += s.consistent(source_->sample_bits()) ? 1 : 0;
    used += q;
    return static_cast<double>(hits) / static_cast<double>(q);
  }

  InfluenceEstimate monotone_from_pool(int i, const Restriction& s, double confidence) {
    const auto& st = pool_->stats(s);
    const double n_pool = static_cast<double>(pool_->size());
    // 2^{|s|} * (consistent / N) * (sign_sum / consistent)
    const double value =
        std::max(0.0, std::ldexp(static_cast<double>(st.sign_sum[static_cast<std::size_t>(i)]) / n_pool,
                                 s.depth()));
    // Z = 2^{|s|} x_i 1[x in s] lies in [-2^{|s|}, 2^{|s|}].
    const double acc =
        std::ldexp(1.0, s.depth()) * std::sqrt(2.0 * std::log(2.0 / confidence) / n_pool);
    return InfluenceEstimate{i, value, s, acc, confidence, pool_->size()};
  }

  InfluenceEstimate monotone_fresh(int i, const Restriction& s, double accuracy,
                                   double confidence) {
    std::uint64_t used = 0;
    const double w = weight_estimate(s, accuracy, confidence, used);
    if (!(w > 0.0)) throw ZeroWeightError("estimated weight of " + s.to_string() + " is zero");
    const double cond_acc = conditional_accuracy(accuracy, s, w);
    const std::uint64_t q =
        std::min(hoeffding_count(cond_acc, confidence), budget_.max_conditional_samples);
    std::int64_t sum = 0;
    for (std::uint64_t k = 0; k < q; ++k) sum += source_->sample_consistent(s)[i];
    const double cond = std::max(0.0, static_cast<double>(sum) / static_cast<double>(q));
    const double achieved = std::ldexp(w, s.depth()) *
                                std::sqrt(2.0 * std::log(2.0 / confidence) / static_cast<double>(q)) +
                            std::ldexp(accuracy, -2);
    return InfluenceEstimate{i, scale_to_restriction(cond, s, w), s, achieved, confidence, used + q};
  }

  InfluenceEstimate subcube(int i, const Restriction& s, double accuracy, double confidence) {
    std::uint64_t used = 0;
    const double w = weight_estimate(s, accuracy, confidence, used);
    if (!(w > 0.0)) {
      // No evidence of mass: the scaled influence estimate is 0.
      return InfluenceEstimate{i, 0.0, s, accuracy, confidence, used};
    }
    const double cond_acc = conditional_accuracy(accuracy, s, w);
    std::uint64_t runs = budget_.max_infest_runs, inner = budget_.max_infest_inner;
    if (cond_acc < 1.0) {
      runs = std::min(infest_run_count(cond_acc, confidence), runs);
      inner = std::min(infest_inner_count(cond_acc / 2.0), inner);
    } else {
      runs = std::min<std::uint64_t>(infest_run_count(1.0, confidence), runs);
      inner = std::min<std::uint64_t>(4, inner);
    }
    InfluenceEstimate cond = detail::infest_mean(*source_, i, s, runs, inner, confidence);
    const double achieved = std::ldexp(w, s.depth()) * cond.accuracy + std::ldexp(accuracy, -2);
    return InfluenceEstimate{i, scale_to_restriction(cond.value, s, w), s, achieved, confidence,
                             used + cond.samples_used};
  }

  InfluenceKind kind_;
  DistOracle* source_;
  double accuracy_;
  double confidence_;
  Budget budget_;
  std::shared_ptr<SamplePool> pool_;
  std::uint64_t queries_ = 0;
  double worst_accuracy_ = 0.0;
};

/// Free-function form of InfluenceOracle::estimate.
inline InfluenceEstimate oracle_influence(InfluenceOracle& o, int i, const Restriction& s,
                                          double accuracy, double confidence) {
  return o.estimate(i, s, accuracy, confidence);
}

}  // namespace dtdist
