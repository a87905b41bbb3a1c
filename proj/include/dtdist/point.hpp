#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtdist/errors.hpp"

namespace dtdist {

/// Largest ambient dimension a Point can carry (coordinates live in one word).
inline constexpr int kMaxDim = 63;

inline std::uint64_t low_mask(int n) {
  return n >= 64 ? ~0ULL : ((1ULL << n) - 1);
}

inline void check_dim(int n) {
  if (n < 0 || n > kMaxDim) {
    throw DimensionError("dimension " + std::to_string(n) + " outside [0, " +
                         std::to_string(kMaxDim) + "]");
  }
}

/// A vertex of {-1,+1}^n.  Bit i of `bits()` is set iff coordinate i equals +1,
/// which is also the index of the point in a dense 2^n table.
class Point {
 public:
  Point() = default;
  Point(int n, std::uint64_t bits) : n_(n), bits_(bits) {
    check_dim(n);
    if ((bits & ~low_mask(n)) != 0) throw DimensionError("point bits exceed dimension");
  }

  static Point from_signs(std::span<const int> signs) {
    const int n = static_cast<int>(signs.size());
    check_dim(n);
    std::uint64_t bits = 0;
    for (int i = 0; i < n; ++i) {
      if (signs[i] == 1) {
        bits |= 1ULL << i;
      } else if (signs[i] != -1) {
        throw ArgumentError("point coordinates must be -1 or +1");
      }
    }
    return Point(n, bits);
  }
  static Point from_signs(std::initializer_list<int> signs) {
    return from_signs(std::span<const int>(signs.begin(), signs.size()));
  }

  int dim() const noexcept { return n_; }
  std::uint64_t bits() const noexcept { return bits_; }

  /// Sign of coordinate i (-1 or +1).
  int operator[](int i) const noexcept { return ((bits_ >> i) & 1ULL) ? 1 : -1; }

  Point flipped(int i) const { return Point(n_, bits_ ^ (1ULL << i), Unchecked{}); }
  Point with(int i, int sign) const {
    const std::uint64_t b = 1ULL << i;
    return Point(n_, sign > 0 ? (bits_ | b) : (bits_ & ~b), Unchecked{});
  }

  std::vector<int> signs() const {
    std::vector<int> out(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = (*this)[i];
    return out;
  }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  struct Unchecked {};
  Point(int n, std::uint64_t bits, Unchecked) : n_(n), bits_(bits) {}

  int n_ = 0;
  std::uint64_t bits_ = 0;
};

/// One (coordinate, sign) pair of a restriction.
struct Literal {
  int coord = 0;
  int sign = 1;
  friend bool operator==(const Literal&, const Literal&) = default;
};

/// A partial assignment fixing a subcube of {-1,+1}^n.  Keeps the insertion
/// order of its pairs (the root-to-leaf order of a tree path) and a bitmask
/// form for fast consistency checks.
class Restriction {
 public:
  Restriction() = default;
  Restriction(std::initializer_list<Literal> pairs) {
    for (const auto& p : pairs) push(p.coord, p.sign);
  }
  explicit Restriction(std::span<const Literal> pairs) {
    for (const auto& p : pairs) push(p.coord, p.sign);
  }

  /// Restriction fixing every coordinate in `mask` to the value it has in `values`.
  static Restriction from_masks(std::uint64_t mask, std::uint64_t values) {
    Restriction r;
    for (std::uint64_t m = mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      r.push(i, ((values >> i) & 1ULL) ? 1 : -1);
    }
    return r;
  }

  Restriction extended(int coord, int sign) const {
    Restriction r = *this;
    r.push(coord, sign);
    return r;
  }

  int depth() const noexcept { return static_cast<int>(pairs_.size()); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<Literal>& pairs() const noexcept { return pairs_; }

  bool fixes(int i) const noexcept { return i >= 0 && i < 64 && ((mask_ >> i) & 1ULL); }
  /// Sign assigned to a fixed coordinate.
  int value(int i) const noexcept { return ((values_ >> i) & 1ULL) ? 1 : -1; }

  std::uint64_t mask() const noexcept { return mask_; }
  std::uint64_t values() const noexcept { return values_; }

  bool consistent(std::uint64_t bits) const noexcept { return (bits & mask_) == values_; }
  bool consistent(const Point& x) const noexcept { return consistent(x.bits()); }

  /// x with the restricted coordinates overwritten (x_pi).
  Point apply(const Point& x) const { return Point(x.dim(), (x.bits() & ~mask_) | values_); }

  /// Throws unless every fixed coordinate is below n.
  void check_within(int n) const {
    if ((mask_ & ~low_mask(n)) != 0) {
      throw DimensionError("restriction fixes a coordinate outside dimension " +
                           std::to_string(n));
    }
  }

  /// Canonical key: the restriction as an unordered set of literals.
  std::pair<std::uint64_t, std::uint64_t> key() const noexcept { return {mask_, values_}; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(pairs_[k].coord) + (pairs_[k].sign > 0 ? ":+1" : ":-1");
    }
    return s + "}";
  }

  friend bool operator==(const Restriction& a, const Restriction& b) noexcept {
    return a.key() == b.key();
  }

 private:
  void push(int coord, int sign) {
    if (coord < 0 || coord >= kMaxDim) throw ArgumentError("restriction coordinate out of range");
    if (sign != 1 && sign != -1) throw ArgumentError("restriction sign must be -1 or +1");
    const std::uint64_t b = 1ULL << coord;
    if (mask_ & b) {
      throw ArgumentError("coordinate " + std::to_string(coord) + " fixed twice");
    }
    mask_ |= b;
    if (sign > 0) values_ |= b;
    pairs_.push_back({coord, sign});
  }

  std::vector<Literal> pairs_;
  std::uint64_t mask_ = 0;
  std::uint64_t values_ = 0;
};

struct RestrictionKeyHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
    return static_cast<std::size_t>(k.first * 0x9e3779b97f4a7c15ULL ^ (k.second + 0x7f4a7c15ULL) *
                                                                         0xbf58476d1ce4e5b9ULL);
  }
};

/// Visits every point of {-1,1}^n consistent with the restriction (masks form),
/// in increasing index order of the free part.
template <class F>
void for_each_consistent(int n, std::uint64_t mask, std::uint64_t values, F&& f) {
  const std::uint64_t free = low_mask(n) & ~mask;
  std::uint64_t sub = 0;
  while (true) {
    f(sub | values);
    if (sub == free) break;
    sub = (sub - free) & free;  // next submask in increasing order
  }
}

}  // namespace dtdist
