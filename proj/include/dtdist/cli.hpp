#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "dtdist/builddt.hpp"
#include "dtdist/dense_pmf.hpp"
#include "dtdist/errors.hpp"
#include "dtdist/influence.hpp"
#include "dtdist/learners.hpp"
#include "dtdist/lift.hpp"
#include "dtdist/oracle.hpp"
#include "dtdist/serialize.hpp"
#include "dtdist/testbed.hpp"

namespace dtdist::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kUsage = 2, kOracle = 3 };

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
  std::string command;
  int n = 8;
  int depth = 2;
  double eps = 0.1;
  double delta = 0.1;
  double tau = 0.0;
  std::string oracle = "exact";
  std::string learner = "tree:2";
  std::string seed_text = std::to_string(kDefaultSeed);
  std::uint64_t seed = kDefaultSeed;
  int trials = 1;
  std::string out;
  std::string dist;
  std::string target;
  std::string target_class = "depth:2";
  bool monotone = false;
  int coord = 0;
  std::string restrict;
  std::string suite = "inequalities";
  std::string csv;
  int workers = 0;

  void validate() const {
    if (n < 1 || n > kMaxDenseDim) throw ArgumentError("--n must lie in [1, 20]");
    if (depth < 0 || depth > n) throw ArgumentError("--depth must lie in [0, n]");
    if (!(eps > 0.0) || eps >= 1.0) throw ArgumentError("--eps must lie in (0,1)");
    if (!(delta > 0.0) || delta >= 1.0) throw ArgumentError("--delta must lie in (0,1)");
    if (tau < 0.0) throw ArgumentError("--tau must be positive");
    if (trials < 1) throw ArgumentError("--trials must be >= 1");
  }
};

inline InfluenceKind parse_oracle(const std::string& s) {
  if (s == "exact") return InfluenceKind::Exact;
  if (s == "monotone") return InfluenceKind::MonotoneBias;
  if (s == "subcube") return InfluenceKind::SubcubeInfEst;
  throw ArgumentError("--oracle must be exact, monotone or subcube");
}

/// "2:+1,0:-1" -> {x2 = +1, x0 = -1}.
inline Restriction parse_restriction(const std::string& text) {
  Restriction s;
  if (text.empty()) return s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ArgumentError("restriction items look like i:+1 or i:-1");
    int coord = 0, sign = 0;
    try {
      coord = std::stoi(item.substr(0, colon));
      sign = std::stoi(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw ArgumentError("bad restriction item '" + item + "'");
    }
    if (sign != 1 && sign != -1) throw ArgumentError("restriction signs must be +1 or -1");
    s = s.extended(coord, sign);
  }
  return s;
}

inline int worker_count(int flag) {
  if (const char* env = std::getenv("DTDIST_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  if (flag >= 1) return flag;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(t) for t in [0, trials) on a worker pool; results keep trial order.
template <class T>
std::vector<T> run_trials(int trials, int workers, const std::function<T(int)>& body) {
  std::vector<std::optional<T>> slots(static_cast<std::size_t>(trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        slots[static_cast<std::size_t>(t)].emplace(body(t));
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  const int w = std::min(workers, trials);
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<T> out;
  for (int t = 0; t < trials; ++t) {
    if (errors[static_cast<std::size_t>(t)]) std::rethrow_exception(errors[static_cast<std::size_t>(t)]);
    out.push_back(std::move(*slots[static_cast<std::size_t>(t)]));
  }
  return out;
}

inline std::uint64_t trial_seed(const RunConfig& cfg, int t) {
  return split_seed(cfg.seed, static_cast<std::uint64_t>(t));
}

/// The distribution under study: read from --dist (tree or dense JSON) or generated.
inline Instance load_instance(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.dist.empty()) {
    const json j = read_json_file(cfg.dist);
    if (j.contains("table")) {
      DensePmf d = dense_from_json(j);
      DistTree t = dense_to_tree(d);
      const int n = d.dim();
      const int depth = t.depth();
      const bool mono = is_monotone(d);
      return Instance{std::move(t), std::move(d), std::nullopt, seed, n, depth, mono, "file"};
    }
    DistTree t = dist_tree_from_json(j);
    if (t.dim() > kMaxDenseDim) throw ArgumentError("distribution too wide for exact reference");
    DensePmf d = tree_to_dense(t);
    const int n = t.dim();
    const int depth = t.depth();
    const bool mono = is_monotone(d);
    return Instance{std::move(t), std::move(d), std::nullopt, seed, n, depth, mono, "file"};
  }
  const std::uint64_t s = stream_seed(seed, "instance");
  return cfg.monotone ? gen_monotone_dist(cfg.n, cfg.depth, s) : gen_dt_dist(cfg.n, cfg.depth, s);
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<json>& rows) {
  if (path.empty()) return;
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "");
      if (r.contains(columns[c])) {
        const auto& v = r[columns[c]];
        os << (v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    os << "\n";
  }
  write_text_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Commands.  Each returns an exit code and prints JSON lines to `out`.
// ---------------------------------------------------------------------------

inline int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  Instance inst = cfg.monotone ? gen_monotone_dist(cfg.n, cfg.depth, cfg.seed)
                               : gen_dt_dist(cfg.n, cfg.depth, cfg.seed);
  const std::string tree_text = dist_tree_to_json(inst.tree).dump();
  json record{{"command", "gen"},     {"n", cfg.n},
              {"depth", cfg.depth},   {"seed", cfg.seed},
              {"monotone", is_monotone(inst.dense)}, {"leaves", inst.tree.tree().leaf_count()}};
  if (cfg.out.empty()) {
    record["tree"] = json::parse(tree_text);
  } else {
    std::vector<std::string> files{cfg.out + ".tree.json", cfg.out + ".dense.json"};
    write_text_file(files[0], tree_text + "\n");
    write_text_file(files[1], dense_to_json(inst.dense).dump() + "\n");
    if (!cfg.target_class.empty() && cfg.target_class != "none") {
      const auto t = gen_target(cfg.n, cfg.target_class, stream_seed(cfg.seed, "target"));
      files.push_back(cfg.out + ".target.json");
      write_text_file(files.back(), target_to_json(cfg.n, t).dump() + "\n");
    }
    record["files"] = files;
  }
  out << record.dump() << "\n";
  return kPass;
}

inline json learn_dist_trial(const RunConfig& cfg, int t) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = trial_seed(cfg, t);
  Instance inst = load_instance(cfg, seed);
  const InfluenceKind kind = parse_oracle(cfg.oracle);
  auto tree = std::make_shared<const DistTree>(inst.tree);
  DistOracle oracle(tree, required_mode(kind), stream_seed(seed, "oracle"));
  LearnOptions opt;
  opt.tau_override = cfg.tau;
  const LearnResult r = learn_distribution(oracle, inst.n, cfg.depth, cfg.eps, cfg.delta, kind, opt);
  const double tv = tv_distance(tree_to_dense(r.tree), inst.dense);
  json rec{{"command", "learn-dist"},
           {"trial", t},
           {"seed", seed},
           {"oracle", cfg.oracle},
           {"n", inst.n},
           {"depth", cfg.depth},
           {"eps", cfg.eps},
           {"delta", cfg.delta},
           {"tau", r.tau},
           {"calls", r.stats.recursive_calls},
           {"call_bound", call_bound(cfg.depth, cfg.eps)},
           {"influence_queries", r.stats.influence_queries},
           {"leaf_estimates", r.stats.leaf_estimates},
           {"samples_used", r.queries.sample},
           {"subcube_queries", r.queries.subcube},
           {"exact_queries", r.queries.exact},
           {"pool_planned", r.pool_planned},
           {"pool_used", r.pool_used},
           {"influence_accuracy", r.influence_accuracy},
           {"achieved_accuracy", r.achieved_accuracy},
           {"leaves", r.tree.tree().leaf_count()},
           {"tv_exact", tv},
           {"pass", tv <= cfg.eps}};
  if (!cfg.out.empty()) {
    const std::string path = cfg.trials == 1 ? cfg.out : cfg.out + "." + std::to_string(t) + ".json";
    write_text_file(path, dist_tree_to_json(r.tree).dump() + "\n");
    rec["tree_file"] = path;
  }
  rec["wall_ms"] = elapsed_ms(t0);
  return rec;
}

inline int cmd_learn_dist(const RunConfig& cfg, std::ostream& out) {
  const auto rows = run_trials<json>(cfg.trials, worker_count(cfg.workers),
                                     [&](int t) { return learn_dist_trial(cfg, t); });
  int passed = 0;
  for (const auto& r : rows) {
    out << r.dump() << "\n";
    passed += r["pass"].get<bool>() ? 1 : 0;
  }
  write_csv(cfg.csv, {"trial", "seed", "oracle", "n", "depth", "eps", "tv_exact", "pass", "calls",
                      "influence_queries", "samples_used", "subcube_queries", "wall_ms"},
            rows);
  if (cfg.trials > 1) {
    out << json{{"command", "learn-dist"}, {"summary", true}, {"trials", cfg.trials}, {"passed", passed}}.dump()
        << "\n";
  }
  return passed == cfg.trials ? kPass : kCheckFailed;
}

inline int cmd_estimate_influence(const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = trial_seed(cfg, 0);
  Instance inst = load_instance(cfg, seed);
  const InfluenceKind kind = parse_oracle(cfg.oracle);
  const Restriction s = parse_restriction(cfg.restrict);
  s.check_within(inst.n);
  auto tree = std::make_shared<const DistTree>(inst.tree);
  DistOracle oracle(tree, required_mode(kind), stream_seed(seed, "oracle"));
  InfluenceOracle io(kind, oracle, cfg.eps, cfg.delta);
  const InfluenceEstimate e = io.estimate(cfg.coord, s);
  const double exact = exact_influence(inst.dense, cfg.coord, s);
  json rec = estimate_to_json(e);
  rec["command"] = "estimate-influence";
  rec["oracle"] = cfg.oracle;
  rec["restriction"] = s.to_string();
  rec["exact"] = exact;
  rec["abs_error"] = std::abs(e.value - exact);
  rec["pass"] = std::abs(e.value - exact) <= std::max(cfg.eps, e.accuracy);
  out << rec.dump() << "\n";
  return rec["pass"].get<bool>() ? kPass : kCheckFailed;
}

inline json lift_trial(const RunConfig& cfg, int t) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = trial_seed(cfg, t);
  Instance inst = load_instance(cfg, seed);
  std::vector<std::uint8_t> truth;
  if (!cfg.target.empty()) {
    truth = target_from_json(read_json_file(cfg.target));
    if (truth.size() != inst.dense.size()) throw ArgumentError("target dimension does not match the distribution");
  } else {
    truth = gen_target(inst.n, cfg.target_class, stream_seed(seed, "target"));
  }
  const InfluenceKind kind = parse_oracle(cfg.oracle);
  auto tree = std::make_shared<const DistTree>(inst.tree);
  DistOracle oracle(tree, required_mode(kind), stream_seed(seed, "oracle"));
  DistOracle labeled(tree, AccessMode::Sample, stream_seed(seed, "labeled"));
  const LabeledStream stream = [&] {
    const std::uint64_t x = labeled.sample_bits();
    return std::make_pair(x, static_cast<int>(truth[x]));
  };
  const UniformLearner learner = make_learner(cfg.learner, inst.n, cfg.eps);
  EndToEndOptions opt;
  opt.seed = stream_seed(seed, "lift");
  opt.kind = kind;
  const EndToEndResult r = end_to_end(oracle, stream, learner, inst.n, cfg.depth, cfg.eps, cfg.delta, opt);
  const double err = weighted_error(r.hypothesis, inst.dense, truth);
  json rec{{"command", "lift"},
           {"trial", t},
           {"seed", seed},
           {"oracle", cfg.oracle},
           {"learner", cfg.learner},
           {"n", inst.n},
           {"depth", cfg.depth},
           {"eps", cfg.eps},
           {"delta", cfg.delta},
           {"dist_eps", r.dist_eps},
           {"dist_tv_exact", tv_distance(tree_to_dense(r.distribution.tree), inst.dense)},
           {"calls", r.distribution.stats.recursive_calls},
           {"learner_m", learner.m},
           {"boosted_m", r.boosted.m},
           {"samples_planned", r.samples_planned},
           {"samples_used", r.samples_used},
           {"leaves", r.report.leaves.size()},
           {"leaves_skipped", r.report.skipped()},
           {"leaves_failed", r.report.failed()},
           {"error_exact", err},
           {"pass", err <= cfg.eps}};
  rec["wall_ms"] = elapsed_ms(t0);
  return rec;
}

inline int cmd_lift(const RunConfig& cfg, std::ostream& out) {
  const auto rows =
      run_trials<json>(cfg.trials, worker_count(cfg.workers), [&](int t) { return lift_trial(cfg, t); });
  int passed = 0;
  for (const auto& r : rows) {
    out << r.dump() << "\n";
    passed += r["pass"].get<bool>() ? 1 : 0;
  }
  write_csv(cfg.csv, {"trial", "seed", "oracle", "learner", "n", "depth", "eps", "error_exact", "pass",
                      "samples_used", "wall_ms"},
            rows);
  if (cfg.trials > 1) {
    out << json{{"command", "lift"}, {"summary", true}, {"trials", cfg.trials}, {"passed", passed}}.dump() << "\n";
  }
  return passed == cfg.trials ? kPass : kCheckFailed;
}

// -- verify suites ------------------------------------------------------------

inline std::vector<json> verify_inequalities(int t, std::uint64_t seed) {
  Rng rng(stream_seed(seed, "verify.shape"));
  const int n = 1 + static_cast<int>(rng() % 10);
  const int d = static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(3, n) + 1));
  const bool mono = t % 4 == 3;
  const Instance inst = mono ? gen_monotone_dist(n, d, stream_seed(seed, "instance"))
                             : gen_dt_dist(n, d, stream_seed(seed, "instance"));
  const InequalityReport rep = check_inequalities(inst, stream_seed(seed, "aux"));
  std::vector<json> rows;
  for (const auto& c : rep.checks) {
    rows.push_back(json{{"suite", "inequalities"}, {"trial", t}, {"n", n}, {"depth", d},
                        {"check", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.margin},
                        {"pass", c.pass}});
  }
  return rows;
}

inline std::vector<json> verify_builddt_optimal(int t, std::uint64_t seed) {
  Rng rng(stream_seed(seed, "verify.shape"));
  const int n = 1 + static_cast<int>(rng() % 5);
  const int d = static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(2, n) + 1));
  static constexpr double kTaus[] = {0.02, 0.1, 0.3};
  const double tau = kTaus[rng() % 3];
  const Instance inst = gen_dt_dist(n, d, stream_seed(seed, "instance"));
  auto tree = std::make_shared<const DistTree>(inst.tree);
  DistOracle oracle(tree, AccessMode::ExactPmf, stream_seed(seed, "oracle"));
  InfluenceOracle io(InfluenceKind::Exact, oracle, tau / 4.0, 0.5);
  BuildParams p;
  p.depth = d;
  p.tau = tau;
  p.eps = std::max(tau, 0.5);
  const BuildResult built = build_dt(oracle, io, {}, p);
  const BruteTree brute = brute_optimal_tree(inst.dense, d, tau);
  const double dev = std::abs(built.objective - brute.objective);
  return {json{{"suite", "builddt-optimal"}, {"trial", t}, {"n", n}, {"depth", d}, {"tau", tau},
               {"objective", built.objective}, {"brute_objective", brute.objective}, {"deviation", dev},
               {"pass", dev <= 1e-9}}};
}

inline std::vector<json> verify_estimators(int t, std::uint64_t seed, double eps, double delta) {
  Rng rng(stream_seed(seed, "verify.shape"));
  const bool e2 = t % 2 == 0;
  const int n = e2 ? 2 : 2 + static_cast<int>(rng() % 5);
  const int d = e2 ? 2 : static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(3, n) + 1));
  const bool subcube = (t / 2) % 2 == 0;
  const Instance inst = e2 ? running_example_e2()
                           : (subcube ? gen_dt_dist(n, d, stream_seed(seed, "instance"))
                                      : gen_monotone_dist(n, d, stream_seed(seed, "instance")));
  const int coord = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
  auto tree = std::make_shared<const DistTree>(inst.tree);
  const InfluenceKind kind = subcube ? InfluenceKind::SubcubeInfEst : InfluenceKind::MonotoneBias;
  DistOracle oracle(tree, required_mode(kind), stream_seed(seed, "oracle"));
  InfluenceOracle io(kind, oracle, eps, delta);
  const InfluenceEstimate e = io.estimate(coord, {});
  const double exact = exact_influence(inst.dense, coord);
  return {json{{"suite", "estimators"}, {"trial", t}, {"n", n}, {"oracle", to_string(kind)},
               {"coord", coord}, {"estimate", e.value}, {"exact", exact},
               {"abs_error", std::abs(e.value - exact)}, {"pass", std::abs(e.value - exact) <= eps}}};
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  std::function<std::vector<json>(int)> body;
  if (cfg.suite == "inequalities") {
    body = [&](int t) { return verify_inequalities(t, trial_seed(cfg, t)); };
  } else if (cfg.suite == "builddt-optimal") {
    body = [&](int t) { return verify_builddt_optimal(t, trial_seed(cfg, t)); };
  } else if (cfg.suite == "estimators") {
    body = [&](int t) { return verify_estimators(t, trial_seed(cfg, t), cfg.eps, cfg.delta); };
  } else {
    throw ArgumentError("--suite must be inequalities, builddt-optimal or estimators");
  }
  const auto groups = run_trials<std::vector<json>>(cfg.trials, worker_count(cfg.workers), body);
  std::vector<json> rows;
  std::size_t failures = 0, trials_ok = 0;
  for (const auto& g : groups) {
    bool ok = true;
    for (const auto& r : g) {
      out << r.dump() << "\n";
      if (!r["pass"].get<bool>()) {
        ++failures;
        ok = false;
      }
      rows.push_back(r);
    }
    trials_ok += ok ? 1 : 0;
  }
  // Estimators are Monte Carlo: at least 90% of trials within the band.
  const bool pass = cfg.suite == "estimators"
                        ? 10 * trials_ok >= 9 * static_cast<std::size_t>(cfg.trials)
                        : failures == 0;
  out << json{{"suite", cfg.suite}, {"summary", true}, {"trials", cfg.trials},
              {"failures", failures}, {"pass", pass}}.dump()
      << "\n";
  write_csv(cfg.csv, {"suite", "trial", "check", "lhs", "rhs", "margin", "pass"}, rows);
  return pass ? kPass : kCheckFailed;
}

// ---------------------------------------------------------------------------

inline int classify(const std::exception& e) {
  if (dynamic_cast<const StageError*>(&e) || dynamic_cast<const ModeError*>(&e) ||
      dynamic_cast<const BudgetError*>(&e) || dynamic_cast<const ZeroWeightError*>(&e)) {
    return kOracle;
  }
  return kUsage;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Learning decision tree distributions and lifting uniform learners"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "dimension");
    sub->add_option("--depth", cfg.depth, "depth budget d");
    sub->add_option("--eps", cfg.eps, "accuracy");
    sub->add_option("--delta", cfg.delta, "failure probability");
    sub->add_option("--tau", cfg.tau, "influence threshold (default eps/(8 d^2))");
    sub->add_option("--oracle", cfg.oracle, "exact | monotone | subcube");
    sub->add_option("--learner", cfg.learner, "lowdeg:k | tree:k | majority");
    sub->add_option("--seed", cfg.seed_text, "64-bit seed or 'random'");
    sub->add_option("--trials", cfg.trials, "number of trials");
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--dist", cfg.dist, "distribution JSON (tree or dense)");
    sub->add_option("--target", cfg.target, "target truth table JSON");
    sub->add_option("--target-class", cfg.target_class, "const | depth:k | junta:k | degree:k");
    sub->add_flag("--monotone", cfg.monotone, "generate monotone distributions");
    sub->add_option("--csv", cfg.csv, "summary CSV path");
    sub->add_option("--workers", cfg.workers, "worker threads (DTDIST_WORKERS overrides)");
  };
  CLI::App* gen = app.add_subcommand("gen", "generate an instance");
  CLI::App* learn = app.add_subcommand("learn-dist", "learn a distribution with BuildDT");
  CLI::App* est = app.add_subcommand("estimate-influence", "estimate one influence");
  CLI::App* lift = app.add_subcommand("lift", "end-to-end lifted learning");
  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  for (CLI::App* sub : {gen, learn, est, lift, verify}) common(sub);
  est->add_option("--coord", cfg.coord, "coordinate");
  est->add_option("--restrict", cfg.restrict, "restriction, e.g. 0:+1,2:-1");
  verify->add_option("--suite", cfg.suite, "inequalities | builddt-optimal | estimators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (cfg.seed_text == "random") {
      std::random_device rd;
      cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    } else {
      std::size_t used = 0;
      cfg.seed = std::stoull(cfg.seed_text, &used);
      if (used != cfg.seed_text.size()) throw std::invalid_argument("seed");
    }
  } catch (const std::exception&) {
    err << "error: --seed must be an unsigned integer or 'random'\n";
    return kUsage;
  }

  try {
    cfg.validate();
    if (*gen) return cmd_gen(cfg, out);
    if (*learn) return cmd_learn_dist(cfg, out);
    if (*est) return cmd_estimate_influence(cfg, out);
    if (*lift) return cmd_lift(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kUsage;
}

}  // namespace dtdist::cli
