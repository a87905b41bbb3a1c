#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/dense_pmf.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/hypothesis.hpp"
#include "dtdist/influence.hpp"
#include "dtdist/point.hpp"
#include "dtdist/random.hpp"

namespace dtdist {

inline constexpr int kMaxGenDim = 16;

struct Instance {
  DistTree tree;
  DensePmf dense;
  std::optional<std::vector<std::uint8_t>> target;
  std::uint64_t seed = 0;
  int n = 0;
  int d = 0;
  bool monotone = false;
  std::string generator;
};

/// Pointwise monotonicity: flipping any -1 to +1 never lowers the pmf.
/// Checking covering pairs is enough by transitivity.
inline bool is_monotone(const DensePmf& d, double tol = 1e-12) {
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    for (int i = 0; i < d.dim(); ++i) {
      const std::uint64_t b = 1ULL << i;
      if (!(x & b) && d.pmf(x) > d.pmf(x | b) + tol) return false;
    }
  }
  return true;
}

namespace detail {

inline void check_gen(int n, int d) {
  if (n < 0 || n > kMaxGenDim) throw DimensionError("generator supports 0 <= n <= 16");
  if (d < 0 || d > n) throw ArgumentError("generator needs 0 <= d <= n");
}

/// Coordinate drawn uniformly among those not in `used`.
inline int fresh_coord(int n, std::uint64_t used, Rng& rng) {
  const int free = n - std::popcount(used);
  auto k = static_cast<int>(rng() % static_cast<std::uint64_t>(free));
  for (int i = 0; i < n; ++i) {
    if ((used >> i) & 1ULL) continue;
    if (k-- == 0) return i;
  }
  return -1;
}

struct TopologyBuilder {
  int n, d;
  Rng& rng;
  DecisionTree::Builder b;
  std::vector<int> leaf_depth;  // indexed by leaf order

  // Leaves carry their visit order as a placeholder value.
  int grow(int depth, std::uint64_t used, bool spine) {
    const bool early = !spine && depth > 0 && uniform01(rng) < 0.2;
    if (depth == d || early) {
      leaf_depth.push_back(depth);
      return b.leaf(static_cast<double>(leaf_depth.size() - 1));
    }
    const int v = fresh_coord(n, used, rng);
    const int lo = grow(depth + 1, used | (1ULL << v), spine);
    const int hi = grow(depth + 1, used | (1ULL << v), false);
    return b.split(v, lo, hi);
  }
};

}  // namespace detail

/// Random depth-d tree distribution.  A spine down the lo branches has depth
/// exactly d; other nodes stop early with probability 0.2.  Leaf masses are
/// Dirichlet(1).
inline Instance gen_dt_dist(int n, int d, std::uint64_t seed) {
  detail::check_gen(n, d);
  Rng rng(stream_seed(seed, "testbed.dt"));
  detail::TopologyBuilder tb{n, d, rng, {}, {}};
  const int root = tb.grow(0, 0, true);
  const DecisionTree shape = tb.b.build(n, root);
  std::vector<double> mass(tb.leaf_depth.size());
  double total = 0.0;
  for (double& m : mass) {
    m = -std::log(1.0 - uniform01(rng));
    total += m;
  }
  const DecisionTree dens = shape.map_leaves([&](double slot) {
    const auto k = static_cast<std::size_t>(slot);
    return std::ldexp(mass[k] / total, tb.leaf_depth[k] - n);
  });
  DistTree tree(dens);
  DensePmf dense = tree_to_dense(tree);
  return Instance{std::move(tree), std::move(dense), std::nullopt, seed, n, d, false, "dt"};
}

/// pmf proportional to c^{#{i in J : x_i = +1}} for a random |J| = d and c in [1.5, 4).
inline Instance gen_monotone_dist(int n, int d, std::uint64_t seed) {
  detail::check_gen(n, d);
  Rng rng(stream_seed(seed, "testbed.monotone"));
  std::vector<int> coords(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < d; ++k) {
    const auto j = k + static_cast<int>(rng() % static_cast<std::uint64_t>(n - k));
    std::swap(coords[static_cast<std::size_t>(k)], coords[static_cast<std::size_t>(j)]);
  }
  std::vector<int> J(coords.begin(), coords.begin() + d);
  std::sort(J.begin(), J.end());
  const double c = 1.5 + 2.5 * uniform01(rng);
  const double z = std::pow(1.0 + c, d);
  DecisionTree::Builder b;
  auto grow = [&](auto&& self, int level, int ups) -> int {
    if (level == d) return b.leaf(std::ldexp(std::pow(c, ups) / z, d - n));
    const int lo = self(self, level + 1, ups);
    const int hi = self(self, level + 1, ups + 1);
    return b.split(J[static_cast<std::size_t>(level)], lo, hi);
  };
  const int root = grow(grow, 0, 0);
  DistTree tree(b.build(n, root));
  DensePmf dense = tree_to_dense(tree);
  if (!is_monotone(dense)) throw ArgumentError("monotone generator produced a non-monotone pmf");
  return Instance{std::move(tree), std::move(dense), std::nullopt, seed, n, d, true, "monotone"};
}

/// gen_dt_dist draws until one is monotone.
inline Instance gen_monotone_by_rejection(int n, int d, std::uint64_t seed,
                                          std::uint64_t cap = 10000) {
  for (std::uint64_t a = 0; a < cap; ++a) {
    Instance inst = gen_dt_dist(n, d, split_seed(seed, a));
    if (is_monotone(inst.dense)) {
      inst.monotone = true;
      inst.generator = "monotone-rejection";
      inst.seed = seed;
      return inst;
    }
  }
  throw BudgetError("no monotone instance within " + std::to_string(cap) + " attempts");
}

/// The running example over n = 2: D(-,-) = D(-,+) = 1/8, D(+,-) = 1/4, D(+,+) = 1/2.
inline Instance running_example_e2() {
  DecisionTree::Builder b;
  const int lo = b.leaf(0.125);
  const int hl = b.leaf(0.25);
  const int hh = b.leaf(0.5);
  const int hi = b.split(1, hl, hh);
  const int root = b.split(0, lo, hi);
  DistTree tree(b.build(2, root));
  DensePmf dense(2, {0.125, 0.25, 0.125, 0.5});
  return Instance{std::move(tree), std::move(dense), std::nullopt, 0, 2, 2, true, "e2"};
}

// ---------------------------------------------------------------------------
// Target functions.
// ---------------------------------------------------------------------------

/// Complete depth-k tree with fresh coordinates on every path and random 0/1 leaves.
inline DecisionTree gen_target_tree(int n, int k, std::uint64_t seed) {
  detail::check_gen(n, k);
  Rng rng(stream_seed(seed, "testbed.target.tree"));
  DecisionTree::Builder b;
  auto grow = [&](auto&& self, int depth, std::uint64_t used) -> int {
    if (depth == k) return b.leaf(coin(rng) ? 1.0 : 0.0);
    const int v = detail::fresh_coord(n, used, rng);
    const int lo = self(self, depth + 1, used | (1ULL << v));
    const int hi = self(self, depth + 1, used | (1ULL << v));
    return b.split(v, lo, hi);
  };
  const int root = grow(grow, 0, 0);
  return b.build(n, root);
}

/// Random member of "const", "depth:k", "junta:k" or "degree:k" as a truth table.
inline std::vector<std::uint8_t> gen_target(int n, const std::string& cls, std::uint64_t seed) {
  if (n < 0 || n > kMaxGenDim) throw DimensionError("targets support n <= 16");
  const std::size_t size = std::size_t{1} << n;
  std::vector<std::uint8_t> t(size);
  if (cls == "const") {
    Rng rng(stream_seed(seed, "testbed.target.const"));
    std::fill(t.begin(), t.end(), static_cast<std::uint8_t>(coin(rng)));
    return t;
  }
  const auto colon = cls.find(':');
  if (colon == std::string::npos) throw ArgumentError("unknown target class '" + cls + "'");
  const std::string kind = cls.substr(0, colon);
  int k = -1;
  try {
    k = std::stoi(cls.substr(colon + 1));
  } catch (const std::exception&) {
    throw ArgumentError("bad parameter in target class '" + cls + "'");
  }
  if (k < 0 || k > n) throw ArgumentError("target parameter must lie in [0, n]");
  if (kind == "depth") {
    const DecisionTree tree = gen_target_tree(n, k, seed);
    for (std::uint64_t x = 0; x < size; ++x) t[x] = tree.eval(x) > 0.5 ? 1 : 0;
    return t;
  }
  if (kind == "junta") {
    Rng rng(stream_seed(seed, "testbed.target.junta"));
    std::vector<int> J;
    std::uint64_t used = 0;
    for (int j = 0; j < k; ++j) {
      const int v = detail::fresh_coord(n, used, rng);
      used |= 1ULL << v;
      J.push_back(v);
    }
    const std::size_t jsize = std::size_t{1} << k;
    std::vector<std::uint8_t> small(jsize);
    auto depends_on_all = [&] {
      for (int j = 0; j < k; ++j) {
        bool dep = false;
        for (std::size_t y = 0; y < jsize && !dep; ++y) dep = small[y] != small[y ^ (std::size_t{1} << j)];
        if (!dep) return false;
      }
      return true;
    };
    do {
      for (auto& v : small) v = static_cast<std::uint8_t>(coin(rng));
    } while (!depends_on_all());
    for (std::uint64_t x = 0; x < size; ++x) {
      std::size_t y = 0;
      for (int j = 0; j < k; ++j) y |= ((x >> J[static_cast<std::size_t>(j)]) & 1ULL) << j;
      t[x] = small[y];
    }
    return t;
  }
  if (kind == "degree") {
    Rng rng(stream_seed(seed, "testbed.target.degree"));
    std::vector<std::pair<std::uint64_t, double>> terms;
    // Masks of popcount <= k with standard normal coefficients (Box-Muller).
    for (std::uint64_t m = 0; m < size; ++m) {
      if (std::popcount(m) > k) continue;
      const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
      terms.emplace_back(m, std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2));
    }
    for (std::uint64_t x = 0; x < size; ++x) {
      double s = 0.0;
      for (const auto& [m, c] : terms) s += Hypothesis::character(m, x) * c;
      t[x] = s > 0.0 ? 1 : 0;
    }
    return t;
  }
  throw ArgumentError("unknown target class '" + cls + "'");
}

// ---------------------------------------------------------------------------
// Brute-force oracles.  These use the rerandomization form of influence,
// E_x E_b |f(x) - f(x with x_i := b)|, and never the pairing shortcut.
// ---------------------------------------------------------------------------

struct BruteStats {
  std::vector<double> inf;
  double total_inf = 0.0;
  double var1 = 0.0;
  double var_mu = 0.0;
  int sensitivity = 0;
  double mean = 0.0;
};

inline BruteStats brute_stats(const std::vector<double>& f, int n) {
  if (n < 0 || n > 14) throw DimensionError("brute_stats supports n <= 14");
  const std::size_t size = std::size_t{1} << n;
  if (f.size() != size) throw DimensionError("brute_stats table must have 2^n entries");
  BruteStats st;
  st.inf.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t b = 1ULL << i;
    double acc = 0.0;
    for (std::uint64_t x = 0; x < size; ++x) {
      acc += std::abs(f[x] - f[x & ~b]) + std::abs(f[x] - f[x | b]);
    }
    st.inf[static_cast<std::size_t>(i)] = acc / (2.0 * static_cast<double>(size));
    st.total_inf += st.inf[static_cast<std::size_t>(i)];
  }
  for (double v : f) st.mean += v;
  st.mean /= static_cast<double>(size);
  for (double v : f) st.var_mu += std::abs(v - st.mean);
  st.var_mu /= static_cast<double>(size);
  // sum_{x,y} |f(x) - f(y)| = 2 sum_k (2k - N + 1) v_(k) over sorted values.
  std::vector<double> sorted = f;
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(size);
  double pair_sum = 0.0;
  for (std::size_t k = 0; k < size; ++k) pair_sum += (2.0 * static_cast<double>(k) - N + 1.0) * sorted[k];
  st.var1 = 2.0 * pair_sum / (N * N);
  for (std::uint64_t x = 0; x < size; ++x) {
    int s = 0;
    for (int i = 0; i < n; ++i) s += f[x] != f[x ^ (1ULL << i)] ? 1 : 0;
    st.sensitivity = std::max(st.sensitivity, s);
  }
  return st;
}

/// Table of (f_D)_s over all of {-1,1}^n (coordinates in s are ignored).
inline std::vector<double> restricted_weighting(const DensePmf& d, const Restriction& s) {
  s.check_within(d.dim());
  std::vector<double> g(d.size());
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    g[x] = std::ldexp(d.pmf((x & ~s.mask()) | s.values()), d.dim());
  }
  return g;
}

inline std::vector<double> weighting_table(const DensePmf& d) { return restricted_weighting(d, {}); }

inline BruteStats brute_restricted_stats(const DensePmf& d, const Restriction& s) {
  return brute_stats(restricted_weighting(d, s), d.dim());
}

// ---------------------------------------------------------------------------
// Inequality and identity suite.
// ---------------------------------------------------------------------------

inline constexpr double kCheckSlack = 1e-9;

struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs for inequalities; -|lhs - rhs| for identities
  bool identity = false;
  bool pass = true;
};

struct InequalityReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass; }));
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline CheckResult leq(std::string name, double lhs, double rhs) {
  const double m = rhs - lhs;
  return CheckResult{std::move(name), lhs, rhs, m, false, m >= -kCheckSlack};
}

inline CheckResult same(std::string name, double lhs, double rhs) {
  const double dev = std::abs(lhs - rhs);
  return CheckResult{std::move(name), lhs, rhs, -dev, true, dev <= kCheckSlack};
}

/// Random tree shape of depth <= dmax with a random spine depth.
inline DecisionTree random_shape(int n, int dmax, Rng& rng) {
  const int depth = static_cast<int>(rng() % static_cast<std::uint64_t>(dmax + 1));
  detail::TopologyBuilder tb{n, depth, rng, {}, {}};
  const int root = tb.grow(0, 0, true);
  return tb.b.build(n, root);
}

}  // namespace detail

/// Evaluates every preliminary inequality and identity on `inst` exactly.
/// Auxiliary trees (the comparison tree T' and the second distribution) are
/// drawn from `aux_seed`.
inline InequalityReport check_inequalities(const Instance& inst, std::uint64_t aux_seed = 0) {
  const int n = inst.dense.dim();
  if (n > 12) throw DimensionError("check_inequalities supports n <= 12");
  InequalityReport rep;
  const std::vector<double> f = weighting_table(inst.dense);
  const BruteStats st = brute_stats(f, n);

  rep.checks.push_back(detail::leq("efron_stein", st.var1, st.total_inf));
  rep.checks.push_back(
      detail::leq("influence_sensitivity", st.total_inf, 2.0 * st.sensitivity * st.var1));
  rep.checks.push_back(detail::leq("var_mu_le_var1", st.var_mu, st.var1));
  rep.checks.push_back(detail::leq("var1_le_2var_mu", st.var1, 2.0 * st.var_mu));

  // E_b[Inf(f_{x_i=b})] = Inf(f) - Inf_i(f), worst coordinate.
  {
    double worst_dev = 0.0, lhs_w = 0.0, rhs_w = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lo = brute_restricted_stats(inst.dense, Restriction{{i, -1}}).total_inf;
      const double hi = brute_restricted_stats(inst.dense, Restriction{{i, +1}}).total_inf;
      const double lhs = 0.5 * (lo + hi);
      const double rhs = st.total_inf - st.inf[static_cast<std::size_t>(i)];
      if (std::abs(lhs - rhs) >= worst_dev) {
        worst_dev = std::abs(lhs - rhs);
        lhs_w = lhs;
        rhs_w = rhs;
      }
    }
    rep.checks.push_back(detail::same("influence_drops", lhs_w, rhs_w));
  }

  const double tv_u = tv_distance(inst.dense, DensePmf::uniform(n));
  rep.checks.push_back(detail::leq("tv_uniform_le_influence", 2.0 * tv_u, st.total_inf));

  // Exact influence by pairing agrees with the rerandomization definition.
  {
    const auto exact = exact_influences(inst.dense);
    double dev = 0.0, lhs_w = 0.0, rhs_w = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = exact[static_cast<std::size_t>(i)], b = st.inf[static_cast<std::size_t>(i)];
      if (std::abs(a - b) >= dev) {
        dev = std::abs(a - b);
        lhs_w = a;
        rhs_w = b;
      }
    }
    rep.checks.push_back(detail::same("influence_oracles_agree", lhs_w, rhs_w));
  }

  Rng rng(stream_seed(aux_seed, "testbed.check"));

  // Expected total influence at the leaves of T' vs its l1 error, with T'
  // labeled by leaf averages of f.
  {
    const DecisionTree shape = detail::random_shape(n, std::min(3, n), rng);
    double lhs = 0.0, l1 = 0.0;
    for (const auto& leaf : shape.leaves()) {
      const std::vector<double> g = restricted_weighting(inst.dense, leaf.path);
      const double inf_leaf = brute_stats(g, n).total_inf;
      lhs += std::ldexp(inf_leaf, -leaf.path.depth());
      double avg = 0.0;
      std::uint64_t cnt = 0;
      for_each_consistent(n, leaf.path.mask(), leaf.path.values(), [&](std::uint64_t x) {
        avg += f[x];
        ++cnt;
      });
      avg /= static_cast<double>(cnt);
      for_each_consistent(n, leaf.path.mask(), leaf.path.values(),
                          [&](std::uint64_t x) { l1 += std::abs(f[x] - avg); });
    }
    const int d = inst.tree.depth();
    rep.checks.push_back(detail::leq("leaf_influence_le_l1_error", lhs, 4.0 * d * std::ldexp(l1, -n)));
  }

  // A second tree distribution D_T.
  const Instance other = gen_dt_dist(n, std::min(3, n), rng());
  {
    double l1 = 0.0;
    for (std::uint64_t x = 0; x < inst.dense.size(); ++x) {
      l1 += std::abs(f[x] - std::ldexp(other.dense.pmf(x), n));
    }
    rep.checks.push_back(
        detail::same("tv_equals_label_error", tv_distance(inst.dense, other.dense), std::ldexp(l1, -(n + 1))));
  }
  {
    double lhs = 0.0;
    for (const auto& leaf : other.tree.tree().leaves()) {
      const double w = inst.dense.restricted_mass(leaf.path);
      if (!(w > 0.0)) continue;
      double tv_leaf = 1.0;
      if (other.dense.restricted_mass(leaf.path) > 0.0) {
        tv_leaf = tv_distance(restrict_dist(inst.dense, leaf.path).pmf,
                              restrict_dist(other.dense, leaf.path).pmf);
      }
      lhs += w * tv_leaf;
    }
    rep.checks.push_back(detail::leq("tv_split", lhs, 2.0 * tv_distance(inst.dense, other.dense)));
  }

  if (inst.monotone) {
    double dev = 0.0, lhs_w = 0.0, rhs_w = 0.0;
    for (int i = 0; i < n; ++i) {
      double bias = 0.0;
      for (std::uint64_t x = 0; x < inst.dense.size(); ++x) {
        bias += ((x >> i) & 1ULL ? 1.0 : -1.0) * inst.dense.pmf(x);
      }
      const double inf = st.inf[static_cast<std::size_t>(i)];
      if (std::abs(inf - bias) >= dev) {
        dev = std::abs(inf - bias);
        lhs_w = inf;
        rhs_w = bias;
      }
    }
    rep.checks.push_back(detail::same("monotone_bias", lhs_w, rhs_w));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Brute-force optimum of the BuildDT objective.
// ---------------------------------------------------------------------------

struct BruteTree {
  DecisionTree tree;  // leaves hold 2^{|l|} Pr_D[l]
  double objective = 0.0;
};

namespace detail {

struct Candidate {
  // Preorder encoding: var >= 0 split, -1 leaf.
  std::vector<int> code;
  double objective;
};

inline std::vector<Candidate> all_trees(const DensePmf& d, const Restriction& s, int budget,
                                        double tau) {
  const BruteStats st = brute_restricted_stats(d, s);
  std::vector<Candidate> out;
  out.push_back(Candidate{{-1}, [&] {
                            double t = 0.0;
                            for (int i = 0; i < d.dim(); ++i) {
                              if (!s.fixes(i)) t += st.inf[static_cast<std::size_t>(i)];
                            }
                            return t;
                          }()});
  if (budget == 0) return out;
  for (int i = 0; i < d.dim(); ++i) {
    if (s.fixes(i) || st.inf[static_cast<std::size_t>(i)] < tau) continue;
    const auto lo = all_trees(d, s.extended(i, -1), budget - 1, tau);
    const auto hi = all_trees(d, s.extended(i, +1), budget - 1, tau);
    for (const auto& a : lo) {
      for (const auto& b : hi) {
        Candidate c;
        c.code.push_back(i);
        c.code.insert(c.code.end(), a.code.begin(), a.code.end());
        c.code.insert(c.code.end(), b.code.begin(), b.code.end());
        c.objective = 0.5 * (a.objective + b.objective);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

inline int decode(const std::vector<int>& code, std::size_t& pos, const DensePmf& d,
                  const Restriction& s, DecisionTree::Builder& b) {
  const int v = code[pos++];
  if (v < 0) return b.leaf(std::ldexp(d.restricted_mass(s), s.depth()));
  const int lo = decode(code, pos, d, s.extended(v, -1), b);
  const int hi = decode(code, pos, d, s.extended(v, +1), b);
  return b.split(v, lo, hi);
}

}  // namespace detail

/// Enumerates every depth-<=d everywhere-tau-influential tree and returns one
/// minimizing the leaf-uniform expected total influence (first in
/// enumeration order among equals).
inline BruteTree brute_optimal_tree(const DensePmf& dist, int d, double tau) {
  if (dist.dim() > 5 || d > 2 || d < 0) throw DimensionError("brute_optimal_tree supports n <= 5, d <= 2");
  const auto all = detail::all_trees(dist, {}, d, tau);
  std::size_t best = 0;
  for (std::size_t k = 1; k < all.size(); ++k) {
    if (all[k].objective < all[best].objective) best = k;
  }
  DecisionTree::Builder b;
  std::size_t pos = 0;
  const int root = detail::decode(all[best].code, pos, dist, {}, b);
  return BruteTree{b.build(dist.dim(), root), all[best].objective};
}

}  // namespace dtdist
