#include "dynoprimal/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "dynoprimal/bmatch.hpp"
#include "dynoprimal/oracles.hpp"
#include "dynoprimal/partition.hpp"
#include "dynoprimal/setcover.hpp"

namespace dynoprimal {

namespace {

constexpr std::size_t kFailureCap = 50;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Reporter {
  RunResult& res;
  std::ostream* log;
  std::size_t dropped = 0;

  void add(int severity, std::size_t update, const std::string& msg) {
    res.exit_code = std::max(res.exit_code, severity);
    std::string line = "[update " + std::to_string(update) + "] " + msg;
    if (res.failures.size() < kFailureCap)
      res.failures.push_back(line);
    else
      ++dropped;
    if (log) *log << line << "\n";
  }
  void finish() {
    if (dropped > 0)
      res.failures.push_back("(" + std::to_string(dropped) +
                             " further failures suppressed)");
  }
};

struct CsvWriter {
  std::ostream* os = nullptr;

  void header() {
    if (os)
      *os << "update,op,level_changes,budget,dirty_iterations,primal,dual,"
             "solution,oracle,elapsed_ns\n";
  }
  void row(std::size_t idx, bool insert, const Metrics& m, double budget,
           double primal, double dual, double solution, bool has_oracle,
           double oracle, std::int64_t ns) {
    if (!os) return;
    *os << idx << "," << (insert ? "+" : "-") << "," << m.level_changes << ","
        << fmt_num(budget) << "," << m.dirty_iterations << ","
        << fmt_num(primal) << "," << fmt_num(dual) << ","
        << fmt_num(solution) << ",";
    if (has_oracle) *os << fmt_num(oracle);
    *os << "," << ns << "\n";
  }
};

// band, cache, budget, and (on full) structure/bank/duality checks shared by
// every mode
void engine_checks(const PartitionEngine& eng, double lambda, bool full,
                   std::size_t idx, Reporter& rep) {
  AuditReport inv = eng.verify_invariant();
  for (const std::string& s : inv.violations) rep.add(exit_invariant, idx, s);
  AuditReport mx = eng.verify_maximal(lambda);
  for (const std::string& s : mx.violations) rep.add(exit_validity, idx, s);
  const double budget = eng.level_change_budget();
  if (static_cast<double>(eng.metrics().level_changes) > budget)
    rep.add(exit_invariant, idx,
            "relabel count " + std::to_string(eng.metrics().level_changes) +
                " exceeds budget " + fmt_num(budget));
  if (!full) return;
  AuditReport st = eng.verify_structure();
  for (const std::string& s : st.violations) rep.add(exit_validity, idx, s);
  BankAudit bank = eng.compute_bank_balance();
  if (bank.balance < -1e-9)
    rep.add(exit_invariant, idx,
            "bank balance " + fmt_num(bank.balance) + " is negative");
  DualReport dual = dual_certificate(eng, lambda);
  for (const std::string& s : dual.violations) rep.add(exit_quality, idx, s);
  const double cap = (lambda * eng.config().frequency_cap + 1.0) * dual.primal;
  if (dual.dual > cap + 1e-9 * std::max(1.0, cap))
    rep.add(exit_quality, idx,
            "dual value " + fmt_num(dual.dual) + " exceeds (lambda*f+1)*primal = " +
                fmt_num(cap));
}

std::vector<NodeId> to_nodes(const std::vector<std::string>& args) {
  std::vector<NodeId> out;
  out.reserve(args.size());
  for (const std::string& a : args)
    out.push_back(static_cast<NodeId>(std::stoull(a)));
  return out;
}

RunResult run_hypergraph(const UpdateStream& s, const RunOptions& opt) {
  RunResult res;
  Reporter rep{res, opt.log};
  if (opt.oracle) {
    rep.add(exit_usage, 0, "no exact oracle is wired for hypergraph streams");
    rep.finish();
    return res;
  }
  Config cfg;
  cfg.frequency_cap = s.frequency_cap;
  cfg.max_live_edges = s.max_edges;
  cfg.multiplicity = s.multiplicity;
  cfg.epsilon = opt.override_epsilon ? opt.epsilon : s.epsilon;
  PartitionEngine eng(cfg, s.capacities);
  const double lambda = cfg.frequency_cap * eng.alpha() * eng.beta();
  std::unordered_map<std::string, EdgeId> ids;
  CsvWriter csv{opt.csv};
  csv.header();

  for (std::size_t i = 0; i < s.updates.size(); ++i) {
    const StreamUpdate& up = s.updates[i];
    const std::size_t idx = i + 1;
    auto t0 = std::chrono::steady_clock::now();
    try {
      if (up.insert) {
        ids[up.id] = eng.insert_edge(to_nodes(up.args));
      } else {
        eng.delete_edge(ids.at(up.id));
        ids.erase(up.id);
      }
    } catch (const std::logic_error& e) {
      rep.add(exit_invariant, idx, e.what());
      break;
    }
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    const bool checkpoint = opt.verify_every == 0
                                ? i + 1 == s.updates.size()
                                : (idx % opt.verify_every == 0 ||
                                   i + 1 == s.updates.size());
    if (opt.verify != RunOptions::Verify::none && checkpoint)
      engine_checks(eng, lambda, opt.verify == RunOptions::Verify::full, idx,
                    rep);
    if (opt.csv) {
      DualReport d = dual_certificate(eng, lambda);
      csv.row(idx, up.insert, eng.metrics(), eng.level_change_budget(),
              eng.solution_value(), d.dual, eng.solution_value(), false, 0.0,
              ns);
    }
  }
  res.updates = eng.metrics().updates;
  res.level_changes = eng.metrics().level_changes;
  res.dirty_iterations = eng.metrics().dirty_iterations;
  res.budget = eng.level_change_budget();
  res.primal = eng.solution_value();
  res.solution = eng.solution_value();
  res.dual = dual_certificate(eng, lambda).dual;
  rep.finish();
  return res;
}

RunResult run_setcover(const UpdateStream& s, const RunOptions& opt) {
  RunResult res;
  Reporter rep{res, opt.log};
  SetCoverConfig cfg;
  cfg.set_costs = s.set_costs;
  cfg.frequency_cap = s.frequency_cap;
  cfg.max_elements = s.max_edges;
  cfg.epsilon = opt.override_epsilon ? opt.epsilon : s.epsilon;
  if (opt.oracle && s.set_costs.size() > 20) {
    rep.add(exit_usage, 0, "exact cover oracle supports at most 20 sets");
    rep.finish();
    return res;
  }
  SetCoverState cover(cfg);
  const double lambda = cover.lambda();
  const double approx = lambda * cfg.frequency_cap;
  std::unordered_map<std::string, NodeId> set_of;
  for (std::size_t i = 0; i < s.set_names.size(); ++i)
    set_of[s.set_names[i]] = static_cast<NodeId>(i);
  std::unordered_map<std::string, std::uint64_t> element_of;
  std::uint64_t next_key = 0;
  CsvWriter csv{opt.csv};
  csv.header();

  auto oracle_cost = [&]() {
    std::vector<std::vector<std::uint32_t>> element_sets;
    for (std::uint64_t el : cover.live_elements()) {
      auto sp = cover.element_sets(el);
      element_sets.emplace_back(sp.begin(), sp.end());
    }
    return exact_setcover(s.set_costs, element_sets);
  };

  for (std::size_t i = 0; i < s.updates.size(); ++i) {
    const StreamUpdate& up = s.updates[i];
    const std::size_t idx = i + 1;
    auto t0 = std::chrono::steady_clock::now();
    try {
      if (up.insert) {
        std::vector<NodeId> sets;
        for (const std::string& a : up.args) sets.push_back(set_of.at(a));
        std::uint64_t key = next_key++;
        element_of[up.id] = key;
        cover.insert_element(key, std::move(sets));
      } else {
        cover.delete_element(element_of.at(up.id));
        element_of.erase(up.id);
      }
    } catch (const std::logic_error& e) {
      rep.add(exit_invariant, idx, e.what());
      break;
    }
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    const bool checkpoint =
        opt.verify_every == 0
            ? i + 1 == s.updates.size()
            : (idx % opt.verify_every == 0 || i + 1 == s.updates.size());
    bool has_oracle = false;
    double opt_cost = 0.0;
    if (checkpoint) {
      if (opt.verify != RunOptions::Verify::none) {
        engine_checks(cover.engine(), lambda,
                      opt.verify == RunOptions::Verify::full, idx, rep);
        AuditReport cv = cover.verify_cover();
        for (const std::string& m : cv.violations)
          rep.add(exit_validity, idx, m);
        if (opt.verify == RunOptions::Verify::full) {
          AuditReport th = cover.verify_thresholds();
          for (const std::string& m : th.violations)
            rep.add(exit_validity, idx, m);
        }
      }
      if (opt.oracle) {
        opt_cost = oracle_cost();
        has_oracle = true;
        if (cover.live_element_count() > 0 &&
            cover.cover_cost() > approx * opt_cost + 1e-9)
          rep.add(exit_quality, idx,
                  "cover cost " + fmt_num(cover.cover_cost()) +
                      " exceeds lambda*f*OPT = " + fmt_num(approx * opt_cost));
      }
    }
    if (opt.csv) {
      DualReport d = dual_certificate(cover.engine(), lambda);
      csv.row(idx, up.insert, cover.engine().metrics(),
              cover.engine().level_change_budget(),
              cover.engine().solution_value(), d.dual, cover.cover_cost(),
              has_oracle, opt_cost, ns);
    }
  }
  res.updates = cover.engine().metrics().updates;
  res.level_changes = cover.engine().metrics().level_changes;
  res.dirty_iterations = cover.engine().metrics().dirty_iterations;
  res.budget = cover.engine().level_change_budget();
  res.primal = cover.engine().solution_value();
  res.solution = cover.cover_cost();
  res.dual = dual_certificate(cover.engine(), lambda).dual;
  rep.finish();
  return res;
}

RunResult run_bmatching(const UpdateStream& s, const RunOptions& opt) {
  RunResult res;
  Reporter rep{res, opt.log};
  RoundingConfig rc;
  rc.epsilon = opt.override_epsilon ? opt.epsilon : s.epsilon;
  rc.sampling_c = s.sampling_c;
  rc.seed = opt.override_seed ? opt.seed : s.seed;
  rc.max_edges = s.max_edges;
  BMatchState bm(s.int_capacities, rc);
  const PartitionEngine& eng = bm.engine();
  const double lambda =
      eng.config().frequency_cap * eng.alpha() * eng.beta();
  std::unordered_map<std::string, std::pair<NodeId, NodeId>> pair_of;
  CsvWriter csv{opt.csv};
  csv.header();

  auto oracle_size = [&]() {
    auto pairs = bm.live_edge_pairs();
    return static_cast<double>(
        exact_bmatching(s.int_capacities.size(), pairs, s.int_capacities));
  };

  for (std::size_t i = 0; i < s.updates.size(); ++i) {
    const StreamUpdate& up = s.updates[i];
    const std::size_t idx = i + 1;
    auto t0 = std::chrono::steady_clock::now();
    try {
      if (up.insert) {
        NodeId u = static_cast<NodeId>(std::stoull(up.args[0]));
        NodeId v = static_cast<NodeId>(std::stoull(up.args[1]));
        pair_of[up.id] = {u, v};
        bm.insert_edge(u, v);
      } else {
        auto [u, v] = pair_of.at(up.id);
        bm.delete_edge(u, v);
        pair_of.erase(up.id);
      }
    } catch (const std::logic_error& e) {
      rep.add(exit_invariant, idx, e.what());
      break;
    }
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    const bool checkpoint =
        opt.verify_every == 0
            ? i + 1 == s.updates.size()
            : (idx % opt.verify_every == 0 || i + 1 == s.updates.size());
    bool has_oracle = false;
    double opt_size = 0.0;
    std::size_t matched = 0;
    if (checkpoint || opt.csv) matched = bm.current_matching().size();
    if (checkpoint) {
      if (opt.verify != RunOptions::Verify::none) {
        engine_checks(eng, lambda, opt.verify == RunOptions::Verify::full,
                      idx, rep);
        AuditReport rv = bm.verify_rounding();
        for (const std::string& m : rv.violations)
          rep.add(exit_validity, idx, m);
      }
      if (opt.oracle) {
        opt_size = oracle_size();
        has_oracle = true;
        if (static_cast<double>(matched) > opt_size + 1e-9)
          rep.add(exit_validity, idx,
                  "matching size " + std::to_string(matched) +
                      " exceeds the exact optimum " + fmt_num(opt_size));
      }
    }
    if (opt.csv) {
      DualReport d = dual_certificate(eng, lambda);
      csv.row(idx, up.insert, eng.metrics(), eng.level_change_budget(),
              eng.solution_value(), d.dual, static_cast<double>(matched),
              has_oracle, opt_size, ns);
    }
  }

  if (opt.trials > 0 && res.exit_code < exit_invariant) {
    // frequency audit: every membership probability is known in closed form
    struct Probe {
      NodeId u, v;
      double p;
      bool big_side; // true: big sample, false: small sample
      std::size_t hits = 0;
    };
    std::vector<Probe> probes;
    for (auto [u, v] : bm.live_edge_pairs()) {
      const bool ub = bm.is_big(u), vb = bm.is_big(v);
      const double w = bm.edge_weight(u, v);
      if (ub || vb) probes.push_back({u, v, w, true, 0});
      if (!ub || !vb)
        probes.push_back({u, v, bm.sample_probability(u, v), false, 0});
    }
    const std::uint64_t base = (opt.override_seed ? opt.seed : s.seed) + 1;
    for (std::size_t t = 0; t < opt.trials; ++t) {
      bm.resample(base + t);
      for (Probe& p : probes) {
        const bool in = p.big_side ? bm.in_big_sample(p.u, p.v)
                                   : bm.in_small_sample(p.u, p.v);
        if (in) ++p.hits;
      }
    }
    std::size_t exceed = 0;
    const double nt = static_cast<double>(opt.trials);
    for (const Probe& p : probes) {
      const double emp = static_cast<double>(p.hits) / nt;
      if (p.p <= 0.0 || p.p >= 1.0) {
        if (emp != p.p) ++exceed;
      } else {
        const double sigma = std::sqrt(p.p * (1.0 - p.p) / nt);
        if (std::abs(emp - p.p) > 3.0 * sigma) ++exceed;
      }
    }
    if (!probes.empty()) {
      const double frac =
          static_cast<double>(exceed) / static_cast<double>(probes.size());
      if (frac > 0.02)
        rep.add(exit_statistics, s.updates.size(),
                fmt_num(100.0 * frac) +
                    "% of membership frequencies fall outside 3 sigma");
      if (opt.log)
        *opt.log << "trials=" << opt.trials << " probes=" << probes.size()
                 << " outside=" << exceed << "\n";
    }
  }

  res.updates = eng.metrics().updates;
  res.level_changes = eng.metrics().level_changes;
  res.dirty_iterations = eng.metrics().dirty_iterations;
  res.budget = eng.level_change_budget();
  res.primal = eng.solution_value();
  res.solution = static_cast<double>(bm.current_matching().size());
  res.dual = dual_certificate(eng, lambda).dual;
  rep.finish();
  return res;
}

} // namespace

RunResult run_stream(const UpdateStream& stream, const RunOptions& opt) {
  if (opt.trials > 0 && stream.mode != StreamMode::bmatching) {
    RunResult res;
    Reporter rep{res, opt.log};
    rep.add(exit_usage, 0, "--trials applies to bmatching streams only");
    rep.finish();
    return res;
  }
  switch (stream.mode) {
    case StreamMode::hypergraph: return run_hypergraph(stream, opt);
    case StreamMode::setcover: return run_setcover(stream, opt);
    case StreamMode::bmatching: return run_bmatching(stream, opt);
  }
  RunResult res;
  res.exit_code = exit_usage;
  return res;
}

} // namespace dynoprimal
