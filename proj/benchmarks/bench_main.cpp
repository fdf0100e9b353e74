#include <benchmark/benchmark.h>

#include <random>
#include <utility>
#include <vector>

#include "dynoprimal/bmatch.hpp"
#include "dynoprimal/oracles.hpp"
#include "dynoprimal/partition.hpp"
#include "dynoprimal/sampler_tree.hpp"

using namespace dynoprimal;

namespace {

Config engine_cfg(int f, std::size_t m, double eps) {
  Config cfg;
  cfg.frequency_cap = f;
  cfg.max_live_edges = m;
  cfg.multiplicity = 1.0;
  cfg.epsilon = eps;
  return cfg;
}

// mixed insert/delete churn at a steady live count
void BM_engine_churn(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 4 * n;
  PartitionEngine eng(engine_cfg(2, m, 0.25), std::vector<double>(n, 1.5));
  std::mt19937_64 rng(1);
  std::vector<EdgeId> live;
  auto step = [&] {
    if (!live.empty() && (live.size() >= m || rng() % 2 == 0)) {
      std::size_t k = rng() % live.size();
      eng.delete_edge(live[k]);
      live[k] = live.back();
      live.pop_back();
    } else {
      NodeId u = NodeId(rng() % n), v = NodeId(rng() % n);
      if (u == v) v = NodeId((v + 1) % n);
      live.push_back(eng.insert_edge({u, v}));
    }
  };
  for (std::size_t i = 0; i < m / 2; ++i) step(); // warm start
  for (auto _ : state) step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_engine_churn)->Arg(1000)->Arg(10000)->Arg(100000);

// repeated insert/delete of one edge into a dense neighborhood, the pattern
// that triggers the deepest settle cascades
void BM_engine_cascade(benchmark::State& state) {
  const std::size_t n = 64;
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  PartitionEngine eng(engine_cfg(2, m + 1, 0.25), std::vector<double>(n, 1.0));
  std::mt19937_64 rng(2);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    NodeId u = NodeId(rng() % n), v = NodeId(rng() % n);
    if (u == v) v = NodeId((v + 1) % n);
    eng.insert_edge({u, v});
  }
  for (auto _ : state) {
    EdgeId e = eng.insert_edge({0, 1});
    eng.delete_edge(e);
  }
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_engine_cascade)->Arg(256)->Arg(1024)->Arg(4096);

// full audit pass over a settled state
void BM_engine_audit(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 4 * n;
  PartitionEngine eng(engine_cfg(2, m, 0.25), std::vector<double>(n, 1.5));
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < m; ++i) {
    NodeId u = NodeId(rng() % n), v = NodeId(rng() % n);
    if (u == v) v = NodeId((v + 1) % n);
    eng.insert_edge({u, v});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eng.verify_invariant());
    benchmark::DoNotOptimize(eng.verify_maximal(2.0 * eng.alpha() * eng.beta()));
  }
}
BENCHMARK(BM_engine_audit)->Arg(1000)->Arg(10000);

// rounding layer churn including sample maintenance
void BM_rounding_churn(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::vector<int> caps;
  for (std::size_t v = 0; v < n; ++v) caps.push_back(1 + int(rng() % 3));
  RoundingConfig rc;
  rc.epsilon = 0.1;
  rc.sampling_c = 1.5;
  rc.seed = 5;
  rc.max_edges = 4 * n;
  BMatchState bm(caps, rc);
  std::vector<std::pair<NodeId, NodeId>> live;
  auto step = [&] {
    if (!live.empty() && (live.size() >= 4 * n || rng() % 2 == 0)) {
      std::size_t k = rng() % live.size();
      bm.delete_edge(live[k].first, live[k].second);
      live[k] = live.back();
      live.pop_back();
    } else {
      for (;;) {
        NodeId u = NodeId(rng() % n), v = NodeId(rng() % n);
        if (u == v) v = NodeId((v + 1) % n);
        if (bm.edge_live(u, v)) continue;
        bm.insert_edge(u, v);
        live.emplace_back(u, v);
        break;
      }
    }
  };
  for (std::size_t i = 0; i < 2 * n; ++i) step();
  for (auto _ : state) step();
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_rounding_churn)->Arg(500)->Arg(5000);

// prefix queries against a loaded tree
void BM_sampler_query(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  SamplerTree tree(k);
  std::mt19937_64 rng(6);
  auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t i = 0; i < k; ++i) tree.set_leaf(i, u01());
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.return_index(u01() * tree.total()));
  }
}
BENCHMARK(BM_sampler_query)->Arg(64)->Arg(512)->Arg(4096);

// offline freezing oracle end to end
void BM_static_oracle(benchmark::State& state) {
  const std::size_t n = 50;
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  StaticGraph g;
  g.cfg = engine_cfg(2, m, 0.25);
  for (std::size_t v = 0; v < n; ++v)
    g.capacities.push_back(1.0 + double(rng() % 200) / 100.0);
  for (std::size_t e = 0; e < m; ++e) {
    NodeId u = NodeId(rng() % n), v = NodeId(rng() % n);
    if (u == v) v = NodeId((v + 1) % n);
    g.edges.push_back({u, v});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(static_primal_dual(g));
  }
}
BENCHMARK(BM_static_oracle)->Arg(100)->Arg(400);

} // namespace

BENCHMARK_MAIN();
