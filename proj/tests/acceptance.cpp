// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dtdist/dtdist.hpp"
#include "support.hpp"

using namespace dtdist;
using testsupport::Gen;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

/// Largest recursive-call count seen against its bound, over criteria 1 to 4.
struct CallLedger {
  std::uint64_t runs = 0;
  std::uint64_t over = 0;
  double worst_ratio = 0.0;
  void add(std::uint64_t calls, int d, double eps) {
    const double bound = call_bound(d, eps);
    ++runs;
    over += static_cast<double>(calls) > bound ? 1 : 0;
    worst_ratio = std::max(worst_ratio, static_cast<double>(calls) / bound);
  }
} calls;

/// Learns from `inst` with the given kind and returns the exact TV of the result.
double learn_tv(const Instance& inst, int d, double eps, double delta, InfluenceKind kind, std::uint64_t seed) {
  auto tree = std::make_shared<const DistTree>(inst.tree);
  DistOracle oracle(tree, required_mode(kind), seed);
  const LearnResult r = learn_distribution(oracle, inst.n, d, eps, delta, kind);
  calls.add(r.stats.recursive_calls, d, eps);
  return tv_distance(tree_to_dense(r.tree), inst.dense);
}

void criterion1() {
  const auto t0 = Clock::now();
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Instance inst = gen_dt_dist(12, 3, 1000 + k);
    const double tv = learn_tv(inst, 3, 0.1, 0.1, InfluenceKind::Exact, k);
    worst = std::max(worst, tv);
    ok += tv <= 0.1 ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  report(1, ok == 50 && secs <= 120.0,
         fmt("exact BuildDT n=12 d=3 eps=0.1: %.0f/50 with TV <= 0.1 (worst %.4f), %.1f s (limit 120 s)", ok, worst,
             secs));
}

void criterion2() {
  Gen g(2002);
  int ok = 0;
  double worst = 0.0;
  static constexpr double kTaus[] = {0.01, 0.05, 0.1, 0.3};
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + g.below(5);
    const int d = g.below(std::min(n, 2) + 1);
    const double tau = kTaus[g.below(4)];
    const Instance inst = gen_dt_dist(n, std::min(n, 3), g.next());
    auto tree = std::make_shared<const DistTree>(inst.tree);
    DistOracle oracle(tree, AccessMode::ExactPmf, g.next());
    InfluenceOracle io(InfluenceKind::Exact, oracle, tau / 4.0, 0.5);
    BuildParams p;
    p.depth = d;
    p.tau = tau;
    p.eps = 1.0;
    const BuildResult built = build_dt(oracle, io, {}, p);
    calls.add(built.stats.recursive_calls, d, p.eps);
    const double got = built.objective;
    const double want = brute_optimal_tree(inst.dense, d, tau).objective;
    worst = std::max(worst, std::abs(got - want));
    ok += std::abs(got - want) <= 1e-9 ? 1 : 0;
  }
  report(2, ok == 100, fmt("BuildDT objective = brute-force optimum: %.0f/100 within 1e-9 (worst %.2e)", ok, worst));
}

void criterion3() {
  const auto t0 = Clock::now();
  int ok = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Instance inst = gen_monotone_dist(10, 3, 3000 + k);
    ok += learn_tv(inst, 3, 0.15, 0.1, InfluenceKind::MonotoneBias, 30 + k) <= 0.15 ? 1 : 0;
  }
  report(3, ok >= 18,
         fmt("monotone samples-only n=10 d=3 eps=0.15: %.0f/20 with TV <= 0.15 (need 18), %.1f s", ok,
             seconds_since(t0)));
}

void criterion4() {
  const auto t0 = Clock::now();
  int ok = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Instance inst = gen_dt_dist(10, 3, 4000 + k);
    ok += learn_tv(inst, 3, 0.15, 0.1, InfluenceKind::SubcubeInfEst, 40 + k) <= 0.15 ? 1 : 0;
  }
  report(4, ok >= 18,
         fmt("subcube InfEst n=10 d=3 eps=0.15: %.0f/20 with TV <= 0.15 (need 18), %.1f s", ok,
             seconds_since(t0)));
}

void criterion5() {
  Gen g(5005);
  double worst = 0.0;
  int coords = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + g.below(10);
    const Instance inst = gen_monotone_dist(n, g.below(std::min(n, 4) + 1), g.next());
    for (int i = 0; i < n; ++i) {
      double bias = 0.0;
      for (std::uint64_t x = 0; x < inst.dense.size(); ++x) {
        bias += ((x >> i) & 1 ? 1.0 : -1.0) * inst.dense.pmf(x);
      }
      worst = std::max(worst, std::abs(exact_influence(inst.dense, i) - bias));
      ++coords;
    }
  }
  report(5, worst <= 1e-9,
         fmt("monotone influence = bias on %.0f coordinates of 100 instances: worst deviation %.2e (tol 1e-9)",
             coords, worst));
}

void criterion6() {
  const auto e2 = std::make_shared<const DistTree>(running_example_e2().tree);
  DistOracle oracle(e2, AccessMode::SubcubeSample, 6006);
  double mean[2] = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 10000; ++k) mean[i] += infest(oracle, i, {}, 0.01);
    mean[i] /= 10000.0;
  }
  const double e1 = std::abs(mean[0] - 0.5), e2d = std::abs(mean[1] - 0.25);
  report(6, e1 <= 0.02 && e2d <= 0.02,
         fmt("InfEst on E2, 10^4 runs at eps=0.01: means %.4f (vs 0.5) and %.4f (vs 0.25), tol 0.02", mean[0],
             mean[1]));
}

void criterion7() {
  Gen g(7007);
  double worst = 0.0;
  int triples = 0;
  while (triples < 1000) {
    const int n = 2 + g.below(9);
    const Instance inst = gen_dt_dist(n, g.below(std::min(n, 3) + 1), g.next());
    const Restriction s = testsupport::random_restriction(n, n - 1, g);
    if (!(inst.dense.restricted_mass(s) > 0.0)) continue;
    const auto r = restrict_dist(inst.dense, s);
    const auto k = static_cast<std::size_t>(g.below(static_cast<int>(r.free_coords.size())));
    const double cond = exact_influence(r.pmf, static_cast<int>(k));
    const double direct = exact_influence(inst.dense, r.free_coords[k], s);
    worst = std::max(worst, std::abs(direct - scale_to_restriction(cond, s, r.weight)));
    ++triples;
  }
  report(7, worst <= 1e-9, fmt("scaling identity over %.0f (D, s, i) triples: worst deviation %.2e (tol 1e-9)",
                               triples, worst));
}

void criterion8() {
  Gen g(8008);
  std::size_t checks = 0, bad = 0;
  std::string first;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + g.below(10);
    const int d = g.below(std::min(n, 3) + 1);
    const Instance inst = k % 4 == 3 ? gen_monotone_dist(n, d, g.next()) : gen_dt_dist(n, d, g.next());
    const InequalityReport rep = check_inequalities(inst, g.next());
    checks += rep.checks.size();
    bad += rep.failures();
    for (const auto& c : rep.checks) {
      if (!c.pass && first.empty()) first = " first: " + c.name;
    }
  }
  report(8, bad == 0,
         fmt("inequality suite on 1000 instances: %.0f violations in %.0f checks (slack 1e-9)", bad, checks) +
             first);
}

void criterion9() {
  const auto t0 = Clock::now();
  const UniformLearner learner = make_tree_learner(10, 2, 0.1);
  int ok[2] = {0, 0};
  for (int path = 0; path < 2; ++path) {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const std::uint64_t seed = 9000 + 100 * path + k;
      const Instance inst = path == 0 ? gen_monotone_dist(10, 2, seed) : gen_dt_dist(10, 2, seed);
      const auto truth = gen_target(10, "depth:2", seed);
      auto tree = std::make_shared<const DistTree>(inst.tree);
      DistOracle oracle(tree, path == 0 ? AccessMode::Sample : AccessMode::SubcubeSample, seed);
      DistOracle labeled(tree, AccessMode::Sample, seed ^ 0x5eed);
      LabeledStream stream = [&] {
        const std::uint64_t x = labeled.sample_bits();
        return std::make_pair(x, static_cast<int>(truth[x]));
      };
      EndToEndOptions opt;
      opt.seed = seed;
      try {
        const EndToEndResult r = end_to_end(oracle, stream, learner, 10, 2, 0.1, 0.1, opt);
        ok[path] += weighted_error(r.hypothesis, inst.dense, truth) <= 0.1 ? 1 : 0;
      } catch (const StageError& e) {
        std::printf("  criterion 9 trial %d/%d: %s\n", path, static_cast<int>(k), e.what());
      }
    }
  }
  report(9, ok[0] >= 18 && ok[1] >= 18,
         fmt("lifted tree:2 learner n=10 d=2 eps=0.1: monotone %.0f/20, subcube %.0f/20 with error <= 0.1 "
             "(need 18 each), %.1f s",
             ok[0], ok[1], seconds_since(t0)));
}

/// Seconds per example for lift_learn at sample size m (best of 3 batches of
/// roughly 4e5 examples each).
double lift_time_per_point(const Instance& inst, const UniformLearner& learner, std::size_t m) {
  Rng rng(m);
  const auto truth = gen_target(inst.n, "depth:2", 10);
  DistOracle labeled(std::make_shared<const DistTree>(inst.tree), AccessMode::Sample, m);
  LabeledSample s{inst.n, {}, {}, "timing"};
  for (std::size_t k = 0; k < m; ++k) {
    const std::uint64_t x = labeled.sample_bits();
    s.add(x, truth[x]);
  }
  const std::size_t reps = std::max<std::size_t>(1, 400000 / m);
  double best = 1e300;
  for (int round = 0; round < 3; ++round) {
    const auto t0 = Clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
      const Hypothesis h = lift_learn(inst.tree, learner, s, rng);
      if (h.dim() != inst.n) std::abort();
    }
    best = std::min(best, seconds_since(t0) / static_cast<double>(reps * m));
  }
  return best;
}

void criterion10() {
  const bool calls_ok = calls.over == 0 && calls.runs == 190;
  // Fixed (n, d) = (10, 3); leaf learner is degree-1 regression, linear in its
  // sample. Its declared requirement is lowered so no leaf is skipped at |S| = 10^3.
  const Instance inst = gen_dt_dist(10, 3, 10010);
  UniformLearner learner = make_low_degree_learner(10, 1, 0.1);
  learner.m = 1;
  std::vector<double> per;
  for (std::size_t m : {1000u, 10000u, 100000u}) per.push_back(lift_time_per_point(inst, learner, m));
  const double spread = *std::max_element(per.begin(), per.end()) / *std::min_element(per.begin(), per.end());
  report(10, calls_ok && spread <= 2.0,
         fmt("calls within (16d^3/eps)^d in %.0f/%.0f runs (worst ratio %.2e); ", calls.runs - calls.over,
             calls.runs, calls.worst_ratio) +
             fmt("lift_learn ns/example at |S|=1e3,1e4,1e5: %.1f %.1f %.1f (max/min %.2f, limit 2)", per[0] * 1e9,
                 per[1] * 1e9, per[2] * 1e9, spread));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  for (std::size_t k = 0; k < all.size(); ++k) {
    try {
      all[k]();
    } catch (const std::exception& e) {
      report(static_cast<int>(k + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures == 0 ? 0 : 1;
}
