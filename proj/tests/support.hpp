#pragma once

// Hand-rolled seeded generators and reference computations shared by the
// unit tests.  Nothing here calls into the library's own oracles.

#include <cmath>
#include <cstdint>
#include <vector>

#include "dtdist/dtdist.hpp"

namespace testsupport {

/// SplitMix64; independent of the library's mt19937-based streams.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int below(int k) { return static_cast<int>(next() % static_cast<std::uint64_t>(k)); }
  int sign() { return (next() & 1) ? 1 : -1; }

 private:
  std::uint64_t s_;
};

/// Arbitrary (not tree-structured) pmf; some entries may be zero.
inline dtdist::DensePmf random_dense(int n, Gen& g, double zero_prob = 0.0) {
  std::vector<double> t(std::size_t{1} << n);
  double total = 0.0;
  for (double& v : t) {
    v = g.unit() < zero_prob ? 0.0 : g.unit() + 0.01;
    total += v;
  }
  if (total == 0.0) t[0] = total = 1.0;
  for (double& v : t) v /= total;
  return dtdist::DensePmf(n, std::move(t));
}

inline dtdist::Restriction random_restriction(int n, int max_depth, Gen& g) {
  dtdist::Restriction s;
  const int depth = g.below(max_depth + 1);
  for (int k = 0; k < depth; ++k) {
    int i = g.below(n);
    while (s.fixes(i)) i = (i + 1) % n;
    s = s.extended(i, g.sign());
  }
  return s;
}

/// Inf_i((f_D)_s) straight from the rerandomization definition:
/// E_x |g(x) - g(x^{~i})| with g(x) = 2^n D(x_s).
inline double reference_influence(const dtdist::DensePmf& d, int i, const dtdist::Restriction& s) {
  const int n = d.dim();
  const double scale = std::ldexp(1.0, n);
  auto g = [&](std::uint64_t x) { return scale * d.pmf((x & ~s.mask()) | s.values()); };
  double acc = 0.0;
  for (std::uint64_t x = 0; x < d.size(); ++x) {
    const double here = g(x);
    const double a = g(x & ~(1ULL << i));
    const double b = g(x | (1ULL << i));
    acc += 0.5 * std::abs(here - a) + 0.5 * std::abs(here - b);
  }
  return acc / static_cast<double>(d.size());
}

inline double reference_tv(const dtdist::DensePmf& a, const dtdist::DensePmf& b) {
  double s = 0.0;
  for (std::uint64_t x = 0; x < a.size(); ++x) s += std::abs(a.pmf(x) - b.pmf(x));
  return s / 2.0;
}

/// E2 over n = 2 as a dense table (bit i set iff x_{i+1} = +1).
inline dtdist::DensePmf e2_dense() { return dtdist::DensePmf(2, {0.125, 0.25, 0.125, 0.5}); }

}  // namespace testsupport
