#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dtdist/decision_tree.hpp"
#include "dtdist/dense_pmf.hpp"
#include "dtdist/dist_tree.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/hypothesis.hpp"
#include "dtdist/influence.hpp"

namespace dtdist {

using json = nlohmann::json;

// Tree schema: {"n": n, "root": node}, node = {"var": i, "lo": node, "hi": node}
// or {"leaf": value}.

namespace detail {

template <class Leaf>
json node_to_json(const DecisionTree& t, int idx, Leaf&& leaf) {
  const auto& nd = t.node(idx);
  if (nd.is_leaf()) return leaf(idx, nd.value);
  return json{{"var", nd.var}, {"lo", node_to_json(t, nd.lo, leaf)}, {"hi", node_to_json(t, nd.hi, leaf)}};
}

template <class Leaf>
int node_from_json(const json& j, DecisionTree::Builder& b, Leaf&& leaf, int guard) {
  if (guard > kMaxDim) throw FormatError("tree JSON nested too deeply");
  if (!j.is_object()) throw FormatError("tree node must be an object");
  if (j.contains("var")) {
    if (!j["var"].is_number_integer() || !j.contains("lo") || !j.contains("hi")) {
      throw FormatError("internal node needs integer \"var\", \"lo\" and \"hi\"");
    }
    const int lo = node_from_json(j["lo"], b, leaf, guard + 1);
    const int hi = node_from_json(j["hi"], b, leaf, guard + 1);
    const int var = j["var"].get<int>();
    if (var < 0) throw FormatError("negative split variable");
    return b.split(var, lo, hi);
  }
  return leaf(j, b);
}

inline int read_dim(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer()) {
    throw FormatError("document needs an integer \"n\"");
  }
  const int n = j["n"].get<int>();
  if (n < 0 || n > kMaxDim) throw FormatError("dimension out of range");
  return n;
}

template <class Leaf>
DecisionTree tree_from_json_with(const json& j, Leaf&& leaf) {
  const int n = read_dim(j);
  if (!j.contains("root")) throw FormatError("tree document needs \"root\"");
  DecisionTree::Builder b;
  const int root = node_from_json(j["root"], b, leaf, 0);
  try {
    return b.build(n, root);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid tree: ") + e.what());
  }
}

}  // namespace detail

inline json tree_to_json(const DecisionTree& t) {
  return json{{"n", t.dim()},
              {"root", detail::node_to_json(t, 0, [](int, double v) { return json{{"leaf", v}}; })}};
}

inline DecisionTree tree_from_json(const json& j) {
  return detail::tree_from_json_with(j, [](const json& node, DecisionTree::Builder& b) {
    if (!node.contains("leaf") || !node["leaf"].is_number()) {
      throw FormatError("leaf node needs a numeric \"leaf\"");
    }
    return b.leaf(node["leaf"].get<double>());
  });
}

inline json dist_tree_to_json(const DistTree& t) { return tree_to_json(t.tree()); }

inline DistTree dist_tree_from_json(const json& j) {
  DecisionTree t = tree_from_json(j);
  try {
    return DistTree(std::move(t));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("tree is not a distribution: ") + e.what());
  }
}

inline json dense_to_json(const DensePmf& d) { return json{{"n", d.dim()}, {"table", d.table()}}; }

inline DensePmf dense_from_json(const json& j) {
  const int n = detail::read_dim(j);
  if (!j.contains("table") || !j["table"].is_array()) throw FormatError("dense pmf needs \"table\"");
  try {
    return DensePmf(n, j["table"].get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad dense table: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(std::string("invalid dense pmf: ") + e.what());
  }
}

// Boolean truth tables are stored as strings of '0'/'1' indexed by point bits.

inline std::string bits_to_string(const std::vector<std::uint8_t>& t) {
  std::string s(t.size(), '0');
  for (std::size_t k = 0; k < t.size(); ++k) s[k] = t[k] ? '1' : '0';
  return s;
}

inline std::vector<std::uint8_t> bits_from_string(const std::string& s) {
  std::vector<std::uint8_t> t(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '0' && s[k] != '1') throw FormatError("truth table must contain only '0' and '1'");
    t[k] = s[k] == '1';
  }
  return t;
}

inline json target_to_json(int n, const std::vector<std::uint8_t>& table) {
  return json{{"n", n}, {"table", bits_to_string(table)}};
}

inline std::vector<std::uint8_t> target_from_json(const json& j) {
  const int n = detail::read_dim(j);
  if (!j.contains("table") || !j["table"].is_string()) throw FormatError("target needs a string \"table\"");
  auto t = bits_from_string(j["table"].get<std::string>());
  if (n > 20 || t.size() != (std::size_t{1} << n)) throw FormatError("target table must have 2^n entries");
  return t;
}

// Hypothesis schema: {"n": n, "kind": ...}.  Leaf-routed hypotheses reuse the
// tree schema with {"hyp": sub} at leaves.  Flat predictors are written as a
// truth table when n <= 16.

inline json hypothesis_to_json(const Hypothesis& h);

namespace detail {

inline json hypothesis_body(const Hypothesis& h) {
  const int n = h.dim();
  if (const auto* r = std::get_if<Hypothesis::Routed>(&h.form())) {
    return json{{"kind", "routed"},
                {"root", node_to_json(r->skeleton, 0, [&](int, double slot) {
                   return json{{"hyp", hypothesis_body(*r->leaves[static_cast<std::size_t>(slot)])}};
                 })}};
  }
  if (const auto* c = std::get_if<Hypothesis::Constant>(&h.form())) {
    return json{{"kind", "const"}, {"label", c->label}};
  }
  if (n <= 16) return json{{"kind", "table"}, {"table", bits_to_string(h.truth_table())}};
  if (const auto* p = std::get_if<Hypothesis::LowDegree>(&h.form())) {
    json terms = json::array();
    for (const auto& [mask, c] : p->terms) terms.push_back(json::array({mask, c}));
    return json{{"kind", "lowdeg"}, {"terms", terms}};
  }
  if (const auto* t = std::get_if<Hypothesis::Tree>(&h.form())) {
    return json{{"kind", "tree"}, {"root", tree_to_json(t->tree)["root"]}};
  }
  throw FormatError("truth tables are only written for n <= 16");
}

inline Hypothesis hypothesis_from_body(const json& j, int n) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw FormatError("hypothesis needs a string \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "const") return Hypothesis::constant(n, j.at("label").get<int>());
  if (kind == "table") {
    auto t = bits_from_string(j.at("table").get<std::string>());
    if (n > 20 || t.size() != (std::size_t{1} << n)) throw FormatError("hypothesis table size mismatch");
    return Hypothesis(n, Hypothesis::Table{std::move(t)});
  }
  if (kind == "lowdeg") {
    Hypothesis::LowDegree p;
    for (const auto& term : j.at("terms")) {
      p.terms.emplace_back(term.at(0).get<std::uint64_t>(), term.at(1).get<double>());
    }
    return Hypothesis(n, std::move(p));
  }
  if (kind == "tree") return Hypothesis(n, Hypothesis::Tree{tree_from_json(json{{"n", n}, {"root", j.at("root")}})});
  if (kind == "routed") {
    Hypothesis::Routed r;
    r.skeleton = tree_from_json_with(json{{"n", n}, {"root", j.at("root")}},
                                     [&](const json& node, DecisionTree::Builder& b) {
                                       if (!node.contains("hyp")) throw FormatError("routed leaf needs \"hyp\"");
                                       r.leaves.push_back(std::make_shared<const Hypothesis>(
                                           hypothesis_from_body(node["hyp"], n)));
                                       return b.leaf(static_cast<double>(r.leaves.size() - 1));
                                     });
    return Hypothesis(n, std::move(r));
  }
  throw FormatError("unknown hypothesis kind '" + kind + "'");
}

}  // namespace detail

inline json hypothesis_to_json(const Hypothesis& h) {
  json j = detail::hypothesis_body(h);
  j["n"] = h.dim();
  return j;
}

inline Hypothesis hypothesis_from_json(const json& j) {
  const int n = detail::read_dim(j);
  try {
    return detail::hypothesis_from_body(j, n);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad hypothesis: ") + e.what());
  }
}

inline json estimate_to_json(const InfluenceEstimate& e) {
  return json{{"coord", e.coord},
              {"value", e.value},
              {"accuracy", e.accuracy},
              {"confidence", e.confidence},
              {"samples_used", e.samples_used}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FormatError("write to '" + path + "' failed");
}

}  // namespace dtdist
