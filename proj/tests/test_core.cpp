#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "dtdist/dtdist.hpp"
#include "support.hpp"

using namespace dtdist;
using testsupport::Gen;

namespace {

std::shared_ptr<const DistTree> e2_tree() {
  return std::make_shared<const DistTree>(running_example_e2().tree);
}

Point pt(std::initializer_list<int> s) { return Point::from_signs(s); }

}  // namespace

TEST(Point, SignsAndBits) {
  const Point x = pt({1, -1, 1});
  EXPECT_EQ(x.dim(), 3);
  EXPECT_EQ(x.bits(), 0b101u);
  EXPECT_EQ(x[0], 1);
  EXPECT_EQ(x[1], -1);
  EXPECT_EQ(x.flipped(1).bits(), 0b111u);
  EXPECT_EQ(x.with(0, -1).bits(), 0b100u);
  EXPECT_EQ(x.signs(), (std::vector<int>{1, -1, 1}));
  EXPECT_THROW(pt({1, 0}), ArgumentError);
  EXPECT_THROW(Point(2, 0b100), DimensionError);
}

TEST(Restriction, MasksAndConsistency) {
  const Restriction s{{2, 1}, {0, -1}};
  EXPECT_EQ(s.depth(), 2);
  EXPECT_EQ(s.mask(), 0b101u);
  EXPECT_EQ(s.values(), 0b100u);
  EXPECT_TRUE(s.fixes(0));
  EXPECT_FALSE(s.fixes(1));
  EXPECT_EQ(s.value(2), 1);
  EXPECT_TRUE(s.consistent(0b110u));
  EXPECT_FALSE(s.consistent(0b111u));
  EXPECT_EQ(s.pairs().front().coord, 2);  // insertion order kept
  EXPECT_EQ(s.to_string(), "{2:+1,0:-1}");
  EXPECT_EQ(s, (Restriction::from_masks(0b101, 0b100)));
  EXPECT_THROW(s.extended(0, 1), ArgumentError);
  EXPECT_THROW(s.check_within(2), DimensionError);
  EXPECT_EQ(s.apply(Point(3, 0b011)).bits(), 0b110u);
}

TEST(Restriction, ForEachConsistentVisitsSubcube) {
  Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + g.below(8);
    const Restriction s = testsupport::random_restriction(n, n, g);
    std::vector<std::uint64_t> seen;
    for_each_consistent(n, s.mask(), s.values(), [&](std::uint64_t x) { seen.push_back(x); });
    std::vector<std::uint64_t> expect;
    for (std::uint64_t x = 0; x < (1ULL << n); ++x) {
      if (s.consistent(x)) expect.push_back(x);
    }
    EXPECT_EQ(seen, expect);
  }
}

TEST(DecisionTree, BuildEvalLeaves) {
  DecisionTree::Builder b;
  const int a = b.leaf(1.0);
  const int c = b.leaf(2.0);
  const int d = b.leaf(3.0);
  const int inner = b.split(2, c, d);
  const int root = b.split(0, a, inner);
  const DecisionTree t = b.build(3, root);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.leaf_count(), 3u);
  EXPECT_DOUBLE_EQ(t.eval(0b000), 1.0);
  EXPECT_DOUBLE_EQ(t.eval(0b001), 2.0);
  EXPECT_DOUBLE_EQ(t.eval(0b101), 3.0);
  const auto leaves = t.leaves();
  ASSERT_EQ(leaves.size(), 3u);
  EXPECT_EQ(leaves[2].path, (Restriction{{0, 1}, {2, 1}}));
  EXPECT_DOUBLE_EQ(t.map_leaves([](double v) { return 2 * v; }).eval(0b101), 6.0);
}

TEST(DecisionTree, RejectsRepeatedVariableOnPath) {
  DecisionTree::Builder b;
  const int a = b.leaf(0.0);
  const int c = b.leaf(0.0);
  const int inner = b.split(0, a, c);
  const int root = b.split(0, inner, b.leaf(0.0));
  EXPECT_THROW(b.build(2, root), ArgumentError);
}

TEST(EvalPmf, UniformAndE2) {
  for (int n : {0, 3, 7}) {
    const DistTree u = DistTree::uniform(n);
    EXPECT_DOUBLE_EQ(eval_pmf(u, Point(n, 0)), std::ldexp(1.0, -n));
  }
  const auto t = e2_tree();
  EXPECT_NEAR(eval_pmf(*t, pt({1, 1})), 0.5, 1e-12);
  EXPECT_NEAR(eval_pmf(*t, pt({-1, -1})), 0.125, 1e-12);
  EXPECT_THROW(eval_pmf(*t, pt({1, 1, 1})), DimensionError);
}

TEST(Weighting, UniformAndE2) {
  const DistTree u = DistTree::uniform(5);
  EXPECT_DOUBLE_EQ(weighting(u, Point(5, 17)), 1.0);
  const auto t = e2_tree();
  EXPECT_NEAR(weighting(*t, pt({1, 1})), 2.0, 1e-12);
  EXPECT_NEAR(weighting(*t, pt({-1, 1})), 0.5, 1e-12);
}

TEST(Weighting, AveragesToOne) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Instance inst = gen_dt_dist(3 + static_cast<int>(seed % 6), static_cast<int>(seed % 4), seed);
    double mean = 0.0;
    for (std::uint64_t x = 0; x < inst.dense.size(); ++x) mean += weighting(inst.tree, Point(inst.n, x));
    EXPECT_NEAR(mean / static_cast<double>(inst.dense.size()), 1.0, 1e-9);
  }
}

TEST(DistTree, NormalizationInvariant) {
  DecisionTree::Builder b;
  const int root = b.split(0, b.leaf(0.1), b.leaf(0.3));
  EXPECT_THROW(DistTree(b.build(2, root)), ArgumentError);  // sums to 0.8
  const DistTree t = DistTree::normalized(b.build(2, root));
  EXPECT_NEAR(t.pmf(0b01) + t.pmf(0b11) + t.pmf(0b00) + t.pmf(0b10), 1.0, 1e-12);
  DecisionTree::Builder neg;
  const int r2 = neg.split(0, neg.leaf(-0.1), neg.leaf(0.6));
  EXPECT_THROW(DistTree(neg.build(2, r2)), ArgumentError);
}

TEST(DistTree, RestrictedMassMatchesEnumeration) {
  Gen g(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + g.below(7);
    const Instance inst = gen_dt_dist(n, std::min(n, g.below(4)), g.next());
    const Restriction s = testsupport::random_restriction(inst.n, inst.n, g);
    double brute = 0.0;
    for (std::uint64_t x = 0; x < inst.dense.size(); ++x) {
      if (s.consistent(x)) brute += inst.tree.pmf(x);
    }
    EXPECT_NEAR(inst.tree.restricted_mass(s), brute, 1e-12);
    EXPECT_NEAR(inst.dense.restricted_mass(s), brute, 1e-12);
  }
}

TEST(TvDistance, Examples) {
  const DensePmf e2 = testsupport::e2_dense();
  EXPECT_DOUBLE_EQ(tv_distance(e2, e2), 0.0);
  EXPECT_NEAR(tv_distance(e2, DensePmf::uniform(2)), 0.25, 1e-12);
  EXPECT_NEAR(tv_distance(DensePmf::point_mass(Point(2, 1)), DensePmf::uniform(2)), 0.75, 1e-12);
  EXPECT_THROW(tv_distance(e2, DensePmf::uniform(3)), DimensionError);
}

TEST(TvDistance, MatchesReferenceAndIsAMetric) {
  Gen g(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + g.below(6);
    const DensePmf a = testsupport::random_dense(n, g, 0.2);
    const DensePmf b = testsupport::random_dense(n, g, 0.2);
    const DensePmf c = testsupport::random_dense(n, g);
    const double ab = tv_distance(a, b);
    EXPECT_NEAR(ab, testsupport::reference_tv(a, b), 1e-12);
    EXPECT_NEAR(ab, tv_distance(b, a), 1e-15);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_LE(ab, tv_distance(a, c) + tv_distance(c, b) + 1e-12);
  }
}

TEST(RestrictDist, Examples) {
  const DensePmf e2 = testsupport::e2_dense();
  const auto hi = restrict_dist(e2, Restriction{{0, 1}});
  EXPECT_NEAR(hi.weight, 0.75, 1e-12);
  ASSERT_EQ(hi.pmf.dim(), 1);
  EXPECT_NEAR(hi.pmf.pmf(1), 2.0 / 3.0, 1e-12);  // x2 = +1
  EXPECT_NEAR(hi.pmf.pmf(0), 1.0 / 3.0, 1e-12);
  const auto lo = restrict_dist(e2, Restriction{{0, -1}});
  EXPECT_NEAR(lo.weight, 0.25, 1e-12);
  EXPECT_NEAR(lo.pmf.pmf(0), 0.5, 1e-12);
  EXPECT_NEAR(lo.pmf.pmf(1), 0.5, 1e-12);

  const auto u = restrict_dist(DensePmf::uniform(4), Restriction{{1, 1}, {3, -1}});
  EXPECT_NEAR(u.weight, 0.25, 1e-15);
  EXPECT_NEAR(tv_distance(u.pmf, DensePmf::uniform(2)), 0.0, 1e-15);

  const DensePmf pm = DensePmf::point_mass(Point(2, 3));
  EXPECT_THROW(restrict_dist(pm, Restriction{{0, -1}}), ZeroWeightError);
}

TEST(DenseTree, RoundTrip) {
  const DistTree u = dense_to_tree(DensePmf::uniform(4));
  EXPECT_EQ(u.tree().leaf_count(), 1u);

  const DensePmf e2 = testsupport::e2_dense();
  const DensePmf back = tree_to_dense(dense_to_tree(e2));
  for (std::uint64_t x = 0; x < 4; ++x) EXPECT_NEAR(back.pmf(x), e2.pmf(x), 1e-12);

  Gen g(3);
  for (int trial = 0; trial < 40; ++trial) {
    const DensePmf d = testsupport::random_dense(1 + g.below(6), g, 0.3);
    const DensePmf r = tree_to_dense(dense_to_tree(d));
    for (std::uint64_t x = 0; x < d.size(); ++x) EXPECT_NEAR(r.pmf(x), d.pmf(x), 1e-12);
  }
}

TEST(Oracle, ModesAreOrdered) {
  DistOracle s(e2_tree(), AccessMode::Sample, 1);
  EXPECT_NO_THROW(s.sample());
  EXPECT_THROW(s.subcube_sample({}), ModeError);
  EXPECT_THROW(s.pmf(pt({1, 1})), ModeError);
  DistOracle c(e2_tree(), AccessMode::SubcubeSample, 1);
  EXPECT_NO_THROW(c.sample());
  EXPECT_NO_THROW(c.subcube_sample({}));
  EXPECT_THROW(c.dense(), ModeError);
  DistOracle e(e2_tree(), AccessMode::ExactPmf, 1);
  EXPECT_NEAR(e.pmf(pt({1, 1})), 0.5, 1e-12);
  EXPECT_NEAR(e.subcube_weight(Restriction{{0, 1}}), 0.75, 1e-12);
  EXPECT_THROW(DistOracle(2, [](Rng&) { return Point(2, 0); }, AccessMode::ExactPmf, 1), ModeError);
}

TEST(Oracle, QueryCountsAreExact) {
  DistOracle o(e2_tree(), AccessMode::ExactPmf, 4);
  for (int k = 0; k < 7; ++k) o.sample();
  for (int k = 0; k < 5; ++k) o.subcube_sample(Restriction{{0, 1}});
  for (int k = 0; k < 3; ++k) o.pmf(pt({-1, 1}));
  EXPECT_EQ(o.counts().sample, 7u);
  EXPECT_EQ(o.counts().subcube, 5u);
  EXPECT_EQ(o.counts().exact, 3u);
  o.subcube_count_equal(Restriction{{0, 1}}, 100, pt({1, 1}));
  EXPECT_EQ(o.counts().subcube, 105u);
  EXPECT_EQ(o.counts().total(), 115u);
}

TEST(Oracle, PointMassAndFullySpecifiedSubcube) {
  auto pm = std::make_shared<const DensePmf>(DensePmf::point_mass(Point(3, 5)));
  DistOracle o(pm, AccessMode::SubcubeSample, 9);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(o.sample().bits(), 5u);
  const auto t = std::make_shared<const DistTree>(dense_to_tree(*pm));
  DistOracle ot(t, AccessMode::SubcubeSample, 9);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(ot.sample().bits(), 5u);
  DistOracle e(e2_tree(), AccessMode::SubcubeSample, 2);
  const Restriction full{{0, -1}, {1, 1}};
  for (int k = 0; k < 20; ++k) EXPECT_EQ(e.subcube_sample(full).bits(), 0b10u);
}

TEST(Oracle, DeterministicGivenSeedAndSplitStreamsDiffer) {
  DistOracle a(e2_tree(), AccessMode::SubcubeSample, 77);
  DistOracle b(e2_tree(), AccessMode::SubcubeSample, 77);
  for (int k = 0; k < 200; ++k) {
    EXPECT_EQ(a.sample_bits(), b.sample_bits());
    EXPECT_EQ(a.subcube_sample(Restriction{{1, -1}}), b.subcube_sample(Restriction{{1, -1}}));
  }
  DistOracle c0 = a.split(0), c1 = a.split(1);
  EXPECT_EQ(c0.counts().total(), 0u);
  int same = 0;
  for (int k = 0; k < 200; ++k) same += c0.sample_bits() == c1.sample_bits() ? 1 : 0;
  EXPECT_LT(same, 200);
}

TEST(Oracle, UniformCoordinateMeans) {
  DistOracle o(std::make_shared<const DistTree>(DistTree::uniform(6)), AccessMode::Sample, 3);
  std::vector<double> sum(6, 0.0);
  const int N = 100000;
  for (int k = 0; k < N; ++k) {
    const Point x = o.sample();
    for (int i = 0; i < 6; ++i) sum[static_cast<std::size_t>(i)] += x[i];
  }
  for (double s : sum) EXPECT_NEAR(s / N, 0.0, 0.02);
}

TEST(Oracle, E2SampleAndConditionalFrequencies) {
  DistOracle o(e2_tree(), AccessMode::SubcubeSample, 21);
  const int N = 100000;
  int top = 0, x2_plus = 0, x1_sum = 0;
  for (int k = 0; k < N; ++k) top += o.sample_bits() == 0b11u ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(top) / N, 0.5, 0.01);
  for (int k = 0; k < N; ++k) x2_plus += o.subcube_sample(Restriction{{0, 1}})[1] == 1 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(x2_plus) / N, 2.0 / 3.0, 0.01);
  for (int k = 0; k < N; ++k) x1_sum += o.subcube_sample(Restriction{{1, -1}})[0];
  EXPECT_NEAR(static_cast<double>(x1_sum) / N, 1.0 / 3.0, 0.01);
}

TEST(Oracle, SamplingMatchesPmfPointwise) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance inst = gen_dt_dist(6, 3, seed);
    DistOracle o(std::make_shared<const DistTree>(inst.tree), AccessMode::Sample, seed);
    std::vector<int> hist(inst.dense.size(), 0);
    const int N = 1000000;
    for (int k = 0; k < N; ++k) ++hist[o.sample_bits()];
    for (std::uint64_t x = 0; x < hist.size(); ++x) {
      EXPECT_NEAR(static_cast<double>(hist[x]) / N, inst.dense.pmf(x), 0.005);
    }
  }
}

TEST(Oracle, ConditionalSamplingMatchesRestrictDist) {
  Gen g(1234);
  int checked = 0;
  while (checked < 8) {
    const Instance inst = gen_dt_dist(5, 2, g.next());
    const Restriction s = testsupport::random_restriction(inst.n, 3, g);
    const auto r = restrict_dist(inst.dense, s);
    if (r.weight < 0.05) continue;
    ++checked;
    for (bool dense_backing : {false, true}) {
      DistOracle o = dense_backing
                         ? DistOracle(std::make_shared<const DensePmf>(inst.dense), AccessMode::SubcubeSample, 8)
                         : DistOracle(std::make_shared<const DistTree>(inst.tree), AccessMode::SubcubeSample, 8);
      std::vector<int> hist(inst.dense.size(), 0);
      const int N = 200000;
      for (int k = 0; k < N; ++k) {
        const Point x = o.subcube_sample(s);
        ASSERT_TRUE(s.consistent(x));
        ++hist[x.bits()];
      }
      for (std::uint64_t x = 0; x < hist.size(); ++x) {
        const double expect = s.consistent(x) ? inst.dense.pmf(x) / r.weight : 0.0;
        EXPECT_NEAR(static_cast<double>(hist[x]) / N, expect, 0.01);
      }
    }
  }
}

TEST(Oracle, CountEqualFollowsConditionalProbability) {
  DistOracle o(e2_tree(), AccessMode::SubcubeSample, 5);
  const Restriction pair{{1, 1}};  // {(-,+), (+,+)}: target (+,+) has p = 0.5/0.625
  std::uint64_t hits = 0;
  const std::uint64_t k = 200000;
  for (int r = 0; r < 10; ++r) hits += o.subcube_count_equal(pair, k / 10, pt({1, 1}));
  EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(k), 0.8, 0.01);
  EXPECT_EQ(o.subcube_count_equal(pair, 50, pt({1, -1})), 0u);  // target outside subcube
}

TEST(Oracle, StreamBackingUsesRejection) {
  auto src = std::make_shared<const DistTree>(running_example_e2().tree);
  DistOracle o(2, [src](Rng& rng) { return src->sample(rng); }, AccessMode::SubcubeSample, 6);
  int plus = 0;
  const int N = 50000;
  for (int k = 0; k < N; ++k) plus += o.subcube_sample(Restriction{{0, 1}})[1] == 1 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(plus) / N, 2.0 / 3.0, 0.01);
}

TEST(Oracle, ZeroWeightSubcubeIsReportedNotLooped) {
  auto pm = std::make_shared<const DensePmf>(DensePmf::point_mass(Point(3, 0)));
  DistOracle dense(pm, AccessMode::SubcubeSample, 1);
  EXPECT_THROW(dense.subcube_sample(Restriction{{0, 1}}), ZeroWeightError);
  DistOracle stream(3, [](Rng&) { return Point(3, 0); }, AccessMode::SubcubeSample, 1);
  EXPECT_THROW(stream.subcube_sample(Restriction{{0, 1}}), BudgetError);
  DistOracle plain(pm, AccessMode::Sample, 1);
  EXPECT_THROW(plain.sample_consistent(Restriction{{2, 1}}), BudgetError);
}
