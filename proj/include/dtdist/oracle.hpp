#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>

#include "dtdist/dense_pmf.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/point.hpp"
#include "dtdist/random.hpp"

namespace dtdist {

/// Access modes, weakest first; each mode grants every weaker one.
enum class AccessMode : int { Sample = 0, SubcubeSample = 1, ExactPmf = 2 };

inline const char* to_string(AccessMode m) {
  switch (m) {
    case AccessMode::Sample: return "sample";
    case AccessMode::SubcubeSample: return "subcube";
    case AccessMode::ExactPmf: return "exact";
  }
  return "?";
}

struct QueryCounts {
  std::uint64_t sample = 0;
  std::uint64_t subcube = 0;
  std::uint64_t exact = 0;

  std::uint64_t total() const noexcept { return sample + subcube + exact; }
  QueryCounts& operator+=(const QueryCounts& o) noexcept {
    sample += o.sample;
    subcube += o.subcube;
    exact += o.exact;
    return *this;
  }
};

/// Black-box source of iid points (e.g. replayed from a file).
using SampleStream = std::function<Point(Rng&)>;

/// Attempts allowed before the first accepted rejection draw for a subcube.
inline constexpr std::uint64_t kRejectionWarmup = std::uint64_t{1} << 20;

/// Access to an unknown distribution D in one of three modes.  Not shareable
/// between threads: give each worker its own oracle via split().
class DistOracle {
 public:
  DistOracle(std::shared_ptr<const DistTree> tree, AccessMode mode, std::uint64_t seed)
      : n_(tree->dim()), backing_(std::move(tree)), mode_(mode), seed_(seed), rng_(seed) {}
  DistOracle(std::shared_ptr<const DensePmf> dense, AccessMode mode, std::uint64_t seed)
      : n_(dense->dim()), backing_(std::move(dense)), mode_(mode), seed_(seed), rng_(seed) {}
  /// External stream; only SAMPLE and SUBCUBE_SAMPLE (by rejection) are possible.
  DistOracle(int n, SampleStream stream, AccessMode mode, std::uint64_t seed)
      : n_(n), backing_(std::move(stream)), mode_(mode), seed_(seed), rng_(seed) {
    check_dim(n);
    if (mode == AccessMode::ExactPmf) throw ModeError("a sample stream cannot grant exact pmf access");
  }

  int dim() const noexcept { return n_; }
  AccessMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool grants(AccessMode m) const noexcept {
    return static_cast<int>(m) <= static_cast<int>(mode_);
  }
  const QueryCounts& counts() const noexcept { return counts_; }

  /// Independent oracle for worker `index`: same backing, derived seed, zero counts.
  DistOracle split(std::uint64_t index) const {
    DistOracle child = *this;
    child.seed_ = split_seed(seed_, index);
    child.rng_.seed(child.seed_);
    child.counts_ = {};
    child.rejection_.clear();
    child.cached_key_.reset();
    return child;
  }

  // -- SAMPLE -------------------------------------------------------------

  Point sample() { return Point(n_, sample_bits()); }

  std::uint64_t sample_bits() {
    require(AccessMode::Sample);
    ++counts_.sample;
    return draw_bits();
  }

  /// Plain samples filtered by rejection until one is consistent with s.
  /// Every draw counts as a SAMPLE query.
  Point sample_consistent(const Restriction& s) {
    require(AccessMode::Sample);
    s.check_within(n_);
    return Point(n_, reject(s, [&] {
                   ++counts_.sample;
                   return draw_bits();
                 }));
  }

  // -- SUBCUBE_SAMPLE -----------------------------------------------------

  /// A draw from D conditioned on consistency with s.
  Point subcube_sample(const Restriction& s) {
    require(AccessMode::SubcubeSample);
    s.check_within(n_);
    ++counts_.subcube;
    return Point(n_, conditional_bits(s));
  }

  /// Draws k subcube-conditional samples from s and returns how many equal
  /// `target`.  With an explicit backing the count is drawn from its exact
  /// Binomial law instead of materializing k points; k queries are charged.
  std::uint64_t subcube_count_equal(const Restriction& s, std::uint64_t k, const Point& target) {
    require(AccessMode::SubcubeSample);
    s.check_within(n_);
    if (target.dim() != n_) throw DimensionError("target point dimension mismatch");
    counts_.subcube += k;
    if (std::holds_alternative<SampleStream>(backing_)) {
      std::uint64_t hits = 0;
      for (std::uint64_t j = 0; j < k; ++j) hits += conditional_bits(s) == target.bits() ? 1 : 0;
      return hits;
    }
    const double w = exact_mass(s);
    if (!(w > 0.0)) throw ZeroWeightError("subcube " + s.to_string() + " has zero probability");
    if (!s.consistent(target)) return 0;
    const double p = std::min(1.0, exact_pmf(target.bits()) / w);
    if (p <= 0.0) return 0;
    if (p >= 1.0) return k;
    std::binomial_distribution<std::uint64_t> binom(k, p);
    return binom(rng_);
  }

  // -- EXACT_PMF ----------------------------------------------------------

  double pmf(const Point& x) {
    require(AccessMode::ExactPmf);
    if (x.dim() != n_) throw DimensionError("point dimension mismatch");
    ++counts_.exact;
    return exact_pmf(x.bits());
  }

  double subcube_weight(const Restriction& s) {
    require(AccessMode::ExactPmf);
    s.check_within(n_);
    ++counts_.exact;
    return exact_mass(s);
  }

  /// Full table of D (materialized once per oracle).
  const DensePmf& dense() {
    require(AccessMode::ExactPmf);
    ++counts_.exact;
    if (!dense_cache_) {
      if (auto* t = std::get_if<std::shared_ptr<const DistTree>>(&backing_)) {
        dense_cache_ = std::make_shared<const DensePmf>(tree_to_dense(**t));
      } else {
        dense_cache_ = std::get<std::shared_ptr<const DensePmf>>(backing_);
      }
    }
    return *dense_cache_;
  }

 private:
  void require(AccessMode m) const {
    if (!grants(m)) {
      throw ModeError(std::string("oracle granted '") + to_string(mode_) +
                      "' access was queried in mode '" + to_string(m) + "'");
    }
  }

  std::uint64_t draw_bits() {
    if (auto* t = std::get_if<std::shared_ptr<const DistTree>>(&backing_)) {
      return (*t)->sample_bits(rng_);
    }
    if (auto* d = std::get_if<std::shared_ptr<const DensePmf>>(&backing_)) {
      return (*d)->sample(rng_).bits();
    }
    const Point x = std::get<SampleStream>(backing_)(rng_);
    if (x.dim() != n_) throw DimensionError("sample stream produced a point of wrong dimension");
    return x.bits();
  }

  double exact_pmf(std::uint64_t bits) const {
    if (auto* t = std::get_if<std::shared_ptr<const DistTree>>(&backing_)) return (*t)->pmf(bits);
    return std::get<std::shared_ptr<const DensePmf>>(backing_)->pmf(bits);
  }

  double exact_mass(const Restriction& s) const {
    if (auto* t = std::get_if<std::shared_ptr<const DistTree>>(&backing_)) {
      return (*t)->restricted_mass(s);
    }
    return std::get<std::shared_ptr<const DensePmf>>(backing_)->restricted_mass(s);
  }

  std::uint64_t conditional_bits(const Restriction& s) {
    if (auto* t = std::get_if<std::shared_ptr<const DistTree>>(&backing_)) {
      if (!cached_key_ || *cached_key_ != s.key()) {
        cached_masses_ = (*t)->conditional_masses(s);
        cached_key_ = s.key();
      }
      if (!(cached_masses_[0] > 0.0)) {
        throw ZeroWeightError("subcube " + s.to_string() + " has zero probability");
      }
      return (*t)->sample_conditional_bits(s, cached_masses_, rng_);
    }
    if (auto* d = std::get_if<std::shared_ptr<const DensePmf>>(&backing_)) {
      return (*d)->sample_conditional(s, rng_).bits();
    }
    return reject(s, [&] { return draw_bits(); });
  }

  // Rejection with a cap of ceil(64 / w_hat) attempts per accepted point,
  // w_hat being the running acceptance rate for this subcube.
  template <class Draw>
  std::uint64_t reject(const Restriction& s, Draw&& draw) {
    auto& [accepted, attempts] = rejection_[s.key()];
    std::uint64_t cap = kRejectionWarmup;
    if (accepted > 0) {
      const double w_hat = static_cast<double>(accepted) / static_cast<double>(attempts);
      cap = static_cast<std::uint64_t>(std::ceil(64.0 / w_hat));
    }
    for (std::uint64_t a = 0; a < cap; ++a) {
      const std::uint64_t x = draw();
      ++attempts;
      if (s.consistent(x)) {
        ++accepted;
        return x;
      }
    }
    throw BudgetError("rejection cap of " + std::to_string(cap) + " attempts exceeded for subcube " +
                      s.to_string());
  }

  using Backing =
      std::variant<std::shared_ptr<const DistTree>, std::shared_ptr<const DensePmf>, SampleStream>;

  int n_;
  Backing backing_;
  AccessMode mode_;
  std::uint64_t seed_;
  Rng rng_;
  QueryCounts counts_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>,
                     RestrictionKeyHash>
      rejection_;
  std::shared_ptr<const DensePmf> dense_cache_;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> cached_key_;
  std::vector<double> cached_masses_;
};

}  // namespace dtdist
