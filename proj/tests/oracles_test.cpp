#include <algorithm>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "dynoprimal/oracles.hpp"

using namespace dynoprimal;

namespace {

StaticGraph single_edge_graph() {
  StaticGraph g;
  g.cfg.frequency_cap = 2;
  g.cfg.max_live_edges = 4;
  g.cfg.multiplicity = 1.0;
  g.cfg.epsilon = 0.25;
  g.capacities = {1.0, 1.0};
  g.edges = {{0, 1}};
  return g;
}

// every b-matching of <= 10 edges by exhaustive subset search
std::size_t brute_bmatching(std::size_t n,
                            const std::vector<std::pair<NodeId, NodeId>>& edges,
                            const std::vector<int>& caps) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    std::vector<int> deg(n, 0);
    bool ok = true;
    std::size_t size = 0;
    for (std::size_t e = 0; e < edges.size() && ok; ++e) {
      if (!(mask >> e & 1)) continue;
      ++size;
      ok = ++deg[edges[e].first] <= caps[edges[e].first] &&
           ++deg[edges[e].second] <= caps[edges[e].second];
    }
    if (ok) best = std::max(best, size);
  }
  return best;
}

} // namespace

TEST_CASE("single edge freezes at level 7") {
  StaticSolution s = static_primal_dual(single_edge_graph());
  CHECK(s.levels == 10);
  REQUIRE(s.edge_level.size() == 1);
  CHECK(s.edge_level[0] == 7); // first level with 1.25^-i >= 1/5.625
  CHECK(s.weights[0] == doctest::Approx(0.2097152).epsilon(1e-12));
  CHECK(s.freeze_level == std::vector<int>{7, 7});
}

TEST_CASE("parallel edges share the freeze level") {
  StaticGraph g = single_edge_graph();
  g.edges = {{0, 1}, {0, 1}};
  StaticSolution s = static_primal_dual(g);
  // two edges double each weight; 2*1.25^-i first reaches 1/5.625 at i = 10
  // already (0.215), so both freeze in the opening round
  CHECK(s.edge_level == std::vector<int>{10, 10});
  CHECK(s.freeze_level == std::vector<int>{10, 10});
}

TEST_CASE("static solution stays inside the frozen band") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 30; ++round) {
    StaticGraph g;
    g.cfg.frequency_cap = 2 + int(rng() % 2);
    g.cfg.multiplicity = 1.0;
    g.cfg.epsilon = (rng() % 2) ? 0.25 : 0.1;
    const std::size_t n = 4 + rng() % 12;
    const std::size_t m = 1 + rng() % 30;
    g.cfg.max_live_edges = m;
    for (std::size_t v = 0; v < n; ++v)
      g.capacities.push_back(1.0 + double(rng() % 3));
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<NodeId> ends;
      while (ends.size() < 2) {
        NodeId v = NodeId(rng() % n);
        if (std::find(ends.begin(), ends.end(), v) == ends.end())
          ends.push_back(v);
      }
      g.edges.push_back(ends);
    }
    StaticSolution s = static_primal_dual(g);

    const double beta = g.cfg.beta();
    const double lambda = g.cfg.frequency_cap * g.cfg.alpha() * beta;
    std::vector<double> w(n, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      CHECK(s.edge_level[e] >= 0);
      CHECK(s.edge_level[e] <= s.levels);
      w[g.edges[e][0]] += s.weights[e];
      w[g.edges[e][1]] += s.weights[e];
    }
    for (std::size_t v = 0; v < n; ++v) {
      const double cstar = g.capacities[v] / lambda;
      if (s.freeze_level[v] > 0) CHECK(w[v] >= cstar * (1.0 - 1e-9));
      if (s.freeze_level[v] > 0 && s.freeze_level[v] < s.levels) {
        // frozen after a raise: the pre-raise weight sat below c*
        CHECK(w[v] <= beta * cstar * (1.0 + 1e-9));
      } else {
        // opening round or never frozen: bounded by m*mu*beta^-L <= c/alpha
        CHECK(w[v] <= g.capacities[v] / g.cfg.alpha() * (1.0 + 1e-9));
      }
    }

    DualReport d = dual_certificate(g.capacities, g.edges, s.weights,
                                    g.cfg.multiplicity, lambda);
    CHECK(d.feasible());
    CHECK(d.dual <=
          (lambda * g.cfg.frequency_cap + 1.0) * d.primal * (1.0 + 1e-9));
  }
}

TEST_CASE("static oracle rejects malformed graphs") {
  StaticGraph g = single_edge_graph();
  g.capacities.clear();
  CHECK_THROWS_AS(static_primal_dual(g), std::invalid_argument);
  g = single_edge_graph();
  g.edges = {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}};
  CHECK_THROWS_AS(static_primal_dual(g), std::invalid_argument); // m = 4
  g = single_edge_graph();
  g.edges = {{0, 5}};
  CHECK_THROWS_AS(static_primal_dual(g), std::out_of_range);
  g = single_edge_graph();
  g.edges = {{0, 1, 0}};
  CHECK_THROWS_AS(static_primal_dual(g), std::invalid_argument);
}

TEST_CASE("dual certificate on the settled two-edge state") {
  std::vector<double> caps{1.0, 1.0};
  std::vector<std::vector<NodeId>> edges{{0, 1}, {0, 1}};
  std::vector<double> weights{0.4096, 0.4096};
  DualReport d = dual_certificate(caps, edges, weights, 1.0, 5.625);
  CHECK(d.feasible());
  CHECK(d.node_tight == std::vector<char>{1, 1});
  CHECK(d.edge_full == std::vector<char>{0, 0});
  CHECK(d.primal == doctest::Approx(0.8192).epsilon(1e-12));
  CHECK(d.dual == 2.0);
  CHECK(d.dual <= (5.625 * 2 + 1) * d.primal);
}

TEST_CASE("dual certificate flags an uncovered edge") {
  std::vector<double> caps{1.0, 1.0};
  std::vector<std::vector<NodeId>> edges{{0, 1}};
  std::vector<double> weights{0.05}; // below every threshold
  DualReport d = dual_certificate(caps, edges, weights, 1.0, 5.625);
  CHECK_FALSE(d.feasible());
  CHECK(d.dual == 0.0);
}

TEST_CASE("exact b-matching on known graphs") {
  using E = std::pair<NodeId, NodeId>;
  SUBCASE("triangle with unit capacities") {
    std::vector<E> edges{{0, 1}, {1, 2}, {0, 2}};
    std::vector<int> caps{1, 1, 1};
    CHECK(exact_bmatching(3, edges, caps) == 1);
  }
  SUBCASE("star with a capacity-2 center") {
    std::vector<E> edges{{0, 1}, {0, 2}, {0, 3}};
    std::vector<int> caps{2, 1, 1, 1};
    CHECK(exact_bmatching(4, edges, caps) == 2);
  }
  SUBCASE("path on four nodes") {
    std::vector<E> edges{{0, 1}, {1, 2}, {2, 3}};
    std::vector<int> caps{1, 1, 1, 1};
    CHECK(exact_bmatching(4, edges, caps) == 2);
  }
  SUBCASE("parallel pair under capacity 2") {
    std::vector<E> edges{{0, 1}, {0, 1}};
    std::vector<int> caps{2, 2};
    CHECK(exact_bmatching(2, edges, caps) == 2);
  }
  SUBCASE("five cycle needs a blossom") {
    std::vector<E> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
    std::vector<int> caps{1, 1, 1, 1, 1};
    CHECK(exact_bmatching(5, edges, caps) == 2);
  }
  SUBCASE("petersen graph has a perfect matching") {
    std::vector<E> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                         {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                         {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}};
    std::vector<int> caps(10, 1);
    CHECK(exact_bmatching(10, edges, caps) == 5);
  }
  SUBCASE("empty graph") {
    CHECK(exact_bmatching(3, std::vector<E>{}, std::vector<int>{1, 1, 1}) == 0);
  }
}

TEST_CASE("blossom solver agrees with subset enumeration") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 60; ++round) {
    const std::size_t n = 3 + rng() % 5;
    const std::size_t m = 1 + rng() % 10;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t e = 0; e < m; ++e) {
      NodeId u = NodeId(rng() % n);
      NodeId v = NodeId(rng() % n);
      if (u == v) v = NodeId((v + 1) % n);
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::vector<int> caps;
    for (std::size_t v = 0; v < n; ++v) caps.push_back(1 + int(rng() % 2));
    CHECK(exact_bmatching(n, edges, caps) == brute_bmatching(n, edges, caps));
  }
}

TEST_CASE("exact set cover on known instances") {
  SUBCASE("one set dominates") {
    std::vector<double> costs{1.0, 1.0, 1.0};
    std::vector<std::vector<std::uint32_t>> elems{{0, 1}, {1, 2}};
    CHECK(exact_setcover(costs, elems) == doctest::Approx(1.0));
  }
  SUBCASE("disjoint elements need two sets") {
    std::vector<double> costs{1.0, 1.0};
    std::vector<std::vector<std::uint32_t>> elems{{0}, {1}};
    CHECK(exact_setcover(costs, elems) == doctest::Approx(2.0));
  }
  SUBCASE("two cheap sets beat one expensive") {
    std::vector<double> costs{3.0, 1.0, 1.0};
    std::vector<std::vector<std::uint32_t>> elems{{0, 1}, {0, 2}};
    CHECK(exact_setcover(costs, elems) == doctest::Approx(2.0));
  }
  SUBCASE("no elements cost nothing") {
    std::vector<double> costs{4.0};
    CHECK(exact_setcover(costs, {}) == 0.0);
  }
  SUBCASE("uncoverable element") {
    std::vector<double> costs{1.0};
    std::vector<std::vector<std::uint32_t>> elems{{}};
    CHECK_THROWS_AS(exact_setcover(costs, elems), std::invalid_argument);
  }
  SUBCASE("set list too large for enumeration") {
    std::vector<double> costs(21, 1.0);
    CHECK_THROWS_AS(exact_setcover(costs, {}), std::invalid_argument);
  }
}

TEST_CASE("maximality checker") {
  using E = std::pair<NodeId, NodeId>;
  std::vector<E> edges{{0, 1}, {1, 2}, {2, 3}};
  std::vector<int> caps{1, 1, 1, 1};

  SUBCASE("valid maximal matching passes") {
    std::vector<char> in{1, 0, 1};
    CHECK(check_maximal(4, edges, in, caps).ok());
  }
  SUBCASE("capacity breach is flagged") {
    std::vector<char> in{1, 1, 0};
    CHECK_FALSE(check_maximal(4, edges, in, caps).ok());
  }
  SUBCASE("blocked edge with two free endpoints is flagged") {
    std::vector<char> in{0, 0, 1};
    CHECK_FALSE(check_maximal(4, edges, in, caps).ok());
  }
  SUBCASE("empty matching over an empty graph passes") {
    CHECK(check_maximal(2, std::vector<E>{}, std::vector<char>{},
                        std::vector<int>{1, 1})
              .ok());
  }
}
