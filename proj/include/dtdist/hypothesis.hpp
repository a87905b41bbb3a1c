#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dtdist/decision_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/point.hpp"

namespace dtdist {

/// Labeled examples (x, f*(x)) with x stored as point bits.
struct LabeledSample {
  int n = 0;
  std::vector<std::uint64_t> points;
  std::vector<std::uint8_t> labels;
  std::string source_tag;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void add(std::uint64_t bits, int label) {
    points.push_back(bits);
    labels.push_back(static_cast<std::uint8_t>(label != 0));
  }
  void add(const Point& x, int label) {
    if (x.dim() != n) throw DimensionError("labeled point dimension mismatch");
    add(x.bits(), label);
  }

  /// Copy of examples [begin, end).
  LabeledSample slice(std::size_t begin, std::size_t end) const {
    LabeledSample out{n, {}, {}, source_tag};
    out.points.assign(points.begin() + static_cast<std::ptrdiff_t>(begin),
                      points.begin() + static_cast<std::ptrdiff_t>(end));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
  }
};

/// Boolean predictor on {-1,1}^n.  Immutable once built.
class Hypothesis {
 public:
  struct Constant {
    int label = 0;
  };
  /// Decision tree whose leaf values are 0 or 1.
  struct Tree {
    DecisionTree tree;
  };
  /// Predicts 1 iff sum_S coeff_S chi_S(x) > 0.
  struct LowDegree {
    std::vector<std::pair<std::uint64_t, double>> terms;
  };
  /// Explicit truth table indexed by point bits.
  struct Table {
    std::vector<std::uint8_t> bits;
  };
  /// Skeleton leaves carry indices into `leaves`.
  struct Routed {
    DecisionTree skeleton;
    std::vector<std::shared_ptr<const Hypothesis>> leaves;
  };
  using Form = std::variant<Constant, Tree, LowDegree, Table, Routed>;

  Hypothesis() : Hypothesis(0, Constant{0}) {}
  Hypothesis(int n, Form form) : n_(n), form_(std::move(form)) {
    check_dim(n);
    if (const auto* t = std::get_if<Table>(&form_); t && t->bits.size() != (std::size_t{1} << n)) {
      throw DimensionError("truth table must have 2^n entries");
    }
  }

  static Hypothesis constant(int n, int label) { return Hypothesis(n, Constant{label != 0}); }

  int dim() const noexcept { return n_; }
  const Form& form() const noexcept { return form_; }

  int predict(std::uint64_t bits) const {
    return std::visit([&](const auto& f) { return eval(f, bits); }, form_);
  }
  int predict(const Point& x) const {
    if (x.dim() != n_) throw DimensionError("hypothesis evaluated on a point of wrong dimension");
    return predict(x.bits());
  }

  /// chi_S(x) = prod_{i in S} x_i; -1 exactly when an odd number of x_i in S are -1.
  static int character(std::uint64_t mask, std::uint64_t x) noexcept {
    return (std::popcount(~x & mask) & 1) ? -1 : 1;
  }

  /// Full truth table, indexed by point bits (n <= 20).
  std::vector<std::uint8_t> truth_table() const {
    if (n_ > 20) throw DimensionError("truth table too large");
    std::vector<std::uint8_t> t(std::size_t{1} << n_);
    for (std::uint64_t x = 0; x < t.size(); ++x) t[x] = static_cast<std::uint8_t>(predict(x));
    return t;
  }

 private:
  static int eval(const Constant& c, std::uint64_t) { return c.label; }
  static int eval(const Tree& t, std::uint64_t x) { return t.tree.eval(x) > 0.5 ? 1 : 0; }
  static int eval(const LowDegree& p, std::uint64_t x) {
    double s = 0.0;
    for (const auto& [mask, c] : p.terms) s += character(mask, x) * c;
    return s > 0.0 ? 1 : 0;
  }
  static int eval(const Table& t, std::uint64_t x) { return t.bits[x]; }
  static int eval(const Routed& r, std::uint64_t x) {
    const auto idx = static_cast<std::size_t>(r.skeleton.eval(x));
    return r.leaves[idx]->predict(x);
  }

  int n_;
  Form form_;
};

}  // namespace dtdist
