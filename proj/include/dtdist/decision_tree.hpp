#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dtdist/errors.hpp"
#include "dtdist/point.hpp"

namespace dtdist {

/// Real-valued decision tree T : {-1,1}^n -> R.  Nodes are stored flat in
/// preorder with the root at index 0; `lo` is the branch taken when the
/// queried coordinate is -1.
class DecisionTree {
 public:
  struct Node {
    int var = -1;
    int lo = -1;
    int hi = -1;
    double value = 0.0;
    bool is_leaf() const noexcept { return var < 0; }
  };

  struct LeafInfo {
    int node = 0;
    Restriction path;
    double value = 0.0;
  };

  /// Incremental construction; children must be added before their parent.
  class Builder {
   public:
    int leaf(double value) {
      nodes_.push_back(Node{-1, -1, -1, value});
      return static_cast<int>(nodes_.size()) - 1;
    }
    int split(int var, int lo, int hi) {
      nodes_.push_back(Node{var, lo, hi, 0.0});
      return static_cast<int>(nodes_.size()) - 1;
    }
    /// Copies `sub` into this builder; returns the index of its root.
    int graft(const DecisionTree& sub) { return graft_node(sub, 0); }

    DecisionTree build(int n, int root) const {
      DecisionTree t;
      t.n_ = n;
      check_dim(n);
      if (root < 0 || root >= static_cast<int>(nodes_.size())) {
        throw ArgumentError("decision tree root index out of range");
      }
      t.nodes_.clear();
      t.nodes_.reserve(nodes_.size());
      t.copy_preorder(nodes_, root, 0, 0);
      return t;
    }

   private:
    int graft_node(const DecisionTree& sub, int idx) {
      const Node& nd = sub.nodes_[static_cast<std::size_t>(idx)];
      if (nd.is_leaf()) return leaf(nd.value);
      const int lo = graft_node(sub, nd.lo);
      const int hi = graft_node(sub, nd.hi);
      return split(nd.var, lo, hi);
    }
    std::vector<Node> nodes_;
  };

  DecisionTree() : nodes_{Node{}} {}

  static DecisionTree constant(int n, double value) {
    check_dim(n);
    DecisionTree t;
    t.n_ = n;
    t.nodes_[0].value = value;
    return t;
  }

  int dim() const noexcept { return n_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(int idx) const { return nodes_[static_cast<std::size_t>(idx)]; }

  /// Index of the leaf reached by the point with the given bits.
  int leaf_of(std::uint64_t bits) const noexcept {
    int idx = 0;
    while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
      const Node& nd = nodes_[static_cast<std::size_t>(idx)];
      idx = ((bits >> nd.var) & 1ULL) ? nd.hi : nd.lo;
    }
    return idx;
  }
  int leaf_of(const Point& x) const {
    check_point(x);
    return leaf_of(x.bits());
  }

  double eval(std::uint64_t bits) const noexcept {
    return nodes_[static_cast<std::size_t>(leaf_of(bits))].value;
  }
  double eval(const Point& x) const {
    check_point(x);
    return eval(x.bits());
  }

  int depth() const { return depth_from(0); }
  std::size_t leaf_count() const {
    std::size_t c = 0;
    for (const auto& nd : nodes_) c += nd.is_leaf() ? 1 : 0;
    return c;
  }

  /// Leaves in preorder together with their root-to-leaf restrictions.
  std::vector<LeafInfo> leaves() const {
    std::vector<LeafInfo> out;
    collect(0, Restriction{}, out);
    return out;
  }

  /// Same shape with every leaf value replaced by f(leaf).
  template <class F>
  DecisionTree map_leaves(F&& f) const {
    DecisionTree t = *this;
    for (auto& nd : t.nodes_) {
      if (nd.is_leaf()) nd.value = f(nd.value);
    }
    return t;
  }

  void check_point(const Point& x) const {
    if (x.dim() != n_) {
      throw DimensionError("point of dimension " + std::to_string(x.dim()) +
                           " given to tree of dimension " + std::to_string(n_));
    }
  }

 private:
  // Copies the subtree at src[idx] into nodes_ in preorder, validating as it goes.
  int copy_preorder(const std::vector<Node>& src, int idx, std::uint64_t path, int guard) {
    if (guard > n_ || guard > kMaxDim) throw ArgumentError("decision tree deeper than dimension");
    if (idx < 0 || idx >= static_cast<int>(src.size())) {
      throw ArgumentError("decision tree child index out of range");
    }
    const Node& nd = src[static_cast<std::size_t>(idx)];
    const int out = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{nd.var, -1, -1, nd.value});
    if (nd.is_leaf()) return out;
    if (nd.var >= n_) throw DimensionError("tree queries coordinate outside dimension");
    if ((path >> nd.var) & 1ULL) {
      throw ArgumentError("coordinate " + std::to_string(nd.var) + " repeats on a tree path");
    }
    const std::uint64_t p = path | (1ULL << nd.var);
    const int lo = copy_preorder(src, nd.lo, p, guard + 1);
    const int hi = copy_preorder(src, nd.hi, p, guard + 1);
    nodes_[static_cast<std::size_t>(out)].lo = lo;
    nodes_[static_cast<std::size_t>(out)].hi = hi;
    nodes_[static_cast<std::size_t>(out)].value = 0.0;
    return out;
  }

  int depth_from(int idx) const {
    const Node& nd = nodes_[static_cast<std::size_t>(idx)];
    if (nd.is_leaf()) return 0;
    return 1 + std::max(depth_from(nd.lo), depth_from(nd.hi));
  }

  void collect(int idx, const Restriction& path, std::vector<LeafInfo>& out) const {
    const Node& nd = nodes_[static_cast<std::size_t>(idx)];
    if (nd.is_leaf()) {
      out.push_back(LeafInfo{idx, path, nd.value});
      return;
    }
    collect(nd.lo, path.extended(nd.var, -1), out);
    collect(nd.hi, path.extended(nd.var, +1), out);
  }

  int n_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace dtdist
