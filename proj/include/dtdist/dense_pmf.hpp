#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/point.hpp"
#include "dtdist/random.hpp"

namespace dtdist {

/// Desk-scale guard for full 2^n tables.
inline constexpr int kMaxDenseDim = 20;

/// Full probability table over {-1,1}^n, indexed by Point::bits().
class DensePmf {
 public:
  DensePmf(int n, std::vector<double> table) : n_(n), table_(std::move(table)) {
    if (n < 0 || n > kMaxDenseDim) {
      throw DimensionError("dense pmf dimension " + std::to_string(n) + " exceeds " +
                           std::to_string(kMaxDenseDim));
    }
    if (table_.size() != (std::size_t{1} << n)) {
      throw DimensionError("dense pmf table must have 2^n entries");
    }
    double total = 0.0;
    for (double v : table_) {
      if (!(v >= 0.0)) throw ArgumentError("negative probability in dense pmf");
      total += v;
    }
    if (std::abs(total - 1.0) > kExactTol) {
      throw ArgumentError("dense pmf sums to " + std::to_string(total) + ", not 1");
    }
    cdf_.resize(table_.size());
    std::partial_sum(table_.begin(), table_.end(), cdf_.begin());
  }

  static DensePmf uniform(int n) {
    return DensePmf(n, std::vector<double>(std::size_t{1} << n, std::ldexp(1.0, -n)));
  }
  static DensePmf point_mass(const Point& x) {
    std::vector<double> t(std::size_t{1} << x.dim(), 0.0);
    t[x.bits()] = 1.0;
    return DensePmf(x.dim(), std::move(t));
  }

  int dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return table_.size(); }
  const std::vector<double>& table() const noexcept { return table_; }

  double pmf(std::uint64_t bits) const { return table_[bits]; }
  double pmf(const Point& x) const {
    check_point(x);
    return table_[x.bits()];
  }

  double restricted_mass(const Restriction& s) const {
    s.check_within(n_);
    double w = 0.0;
    for_each_consistent(n_, s.mask(), s.values(), [&](std::uint64_t b) { w += table_[b]; });
    return w;
  }

  Point sample(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
    if (idx >= table_.size()) idx = table_.size() - 1;
    while (table_[idx] == 0.0 && idx > 0) --idx;  // never land on a zero cell
    return Point(n_, idx);
  }

  Point sample_conditional(const Restriction& s, Rng& rng) const {
    const double w = restricted_mass(s);
    if (!(w > 0.0)) throw ZeroWeightError("subcube " + s.to_string() + " has zero probability");
    double u = uniform01(rng) * w;
    std::uint64_t last = s.values();
    bool done = false;
    for_each_consistent(n_, s.mask(), s.values(), [&](std::uint64_t b) {
      if (done) return;
      if (table_[b] > 0.0) last = b;
      u -= table_[b];
      if (u < 0.0 && table_[b] > 0.0) done = true;
    });
    return Point(n_, last);
  }

  void check_point(const Point& x) const {
    if (x.dim() != n_) {
      throw DimensionError("point of dimension " + std::to_string(x.dim()) +
                           " given to pmf of dimension " + std::to_string(n_));
    }
  }

 private:
  int n_;
  std::vector<double> table_;
  std::vector<double> cdf_;
};

/// Conditional distribution D_s over the free coordinates (in increasing
/// original index order) together with its weight Pr_D[s].
struct RestrictedPmf {
  DensePmf pmf;
  double weight;
  std::vector<int> free_coords;
};

inline RestrictedPmf restrict_dist(const DensePmf& d, const Restriction& s) {
  s.check_within(d.dim());
  const double w = d.restricted_mass(s);
  if (!(w > 0.0)) throw ZeroWeightError("subcube " + s.to_string() + " has zero weight");
  std::vector<int> free;
  for (int i = 0; i < d.dim(); ++i) {
    if (!s.fixes(i)) free.push_back(i);
  }
  const int m = static_cast<int>(free.size());
  std::vector<double> t(std::size_t{1} << m);
  for (std::uint64_t y = 0; y < t.size(); ++y) {
    std::uint64_t x = s.values();
    for (int k = 0; k < m; ++k) {
      if ((y >> k) & 1ULL) x |= 1ULL << free[static_cast<std::size_t>(k)];
    }
    t[y] = d.pmf(x) / w;
  }
  // Renormalize away the rounding of the division so the table invariant holds.
  const double total = std::accumulate(t.begin(), t.end(), 0.0);
  for (double& v : t) v /= total;
  return RestrictedPmf{DensePmf(m, std::move(t)), w, std::move(free)};
}

inline double eval_pmf(const DistTree& t, const Point& x) { return t.pmf(x); }
inline double eval_pmf(const DensePmf& d, const Point& x) { return d.pmf(x); }

/// f_D(x) = 2^n D(x); averages exactly 1 under the uniform distribution.
template <class Dist>
double weighting(const Dist& d, const Point& x) {
  return std::ldexp(eval_pmf(d, x), d.dim());
}

inline double tv_distance(const DensePmf& a, const DensePmf& b) {
  if (a.dim() != b.dim()) throw DimensionError("tv_distance of pmfs with different dimension");
  double s = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) s += std::abs(a.table()[x] - b.table()[x]);
  return 0.5 * s;
}

inline DensePmf tree_to_dense(const DistTree& t) {
  const int n = t.dim();
  if (n > kMaxDenseDim) throw DimensionError("tree too wide for a dense table");
  std::vector<double> table(std::size_t{1} << n);
  for (std::uint64_t x = 0; x < table.size(); ++x) table[x] = t.pmf(x);
  return DensePmf(n, std::move(table));
}

namespace detail {

inline bool halves_equal(const DensePmf& d, std::uint64_t mask, std::uint64_t values, int i) {
  bool equal = true;
  const std::uint64_t b = 1ULL << i;
  for_each_consistent(d.dim(), mask | b, values, [&](std::uint64_t x) {
    if (equal && d.pmf(x) != d.pmf(x | b)) equal = false;
  });
  return equal;
}

inline int dense_to_tree_node(const DensePmf& d, std::uint64_t mask, std::uint64_t values,
                              DecisionTree::Builder& b) {
  for (int i = 0; i < d.dim(); ++i) {
    if ((mask >> i) & 1ULL) continue;
    if (!halves_equal(d, mask, values, i)) {
      const std::uint64_t bit = 1ULL << i;
      const int lo = dense_to_tree_node(d, mask | bit, values, b);
      const int hi = dense_to_tree_node(d, mask | bit, values | bit, b);
      return b.split(i, lo, hi);
    }
  }
  // Constant on this subcube.
  return b.leaf(d.pmf(values));
}

}  // namespace detail

/// Exact tree for a dense pmf, splitting on the lowest coordinate whose two
/// halves differ.  Exact but not depth-minimal in general.
inline DistTree dense_to_tree(const DensePmf& d) {
  DecisionTree::Builder b;
  const int root = detail::dense_to_tree_node(d, 0, 0, b);
  return DistTree(b.build(d.dim(), root));
}

}  // namespace dtdist
