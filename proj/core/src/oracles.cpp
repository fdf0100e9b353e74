#include "dynoprimal/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace dynoprimal {

StaticSolution static_primal_dual(const StaticGraph& g) {
  const std::size_t n = g.capacities.size();
  const std::size_t m = g.edges.size();
  if (n == 0) throw std::invalid_argument("capacity list is empty");
  if (m > g.cfg.max_live_edges)
    throw std::invalid_argument("more edges than the budget m");
  double cmin = g.capacities[0];
  for (double c : g.capacities) {
    if (!(c > 0.0)) throw std::invalid_argument("capacities must be positive");
    cmin = std::min(cmin, c);
  }
  for (const auto& e : g.edges) {
    if (e.empty() || e.size() > static_cast<std::size_t>(g.cfg.frequency_cap))
      throw std::invalid_argument("edge endpoint count out of range");
    for (NodeId v : e)
      if (v >= n) throw std::out_of_range("edge endpoint out of range");
  }

  const int L = compute_levels(g.cfg, cmin);
  const double beta = g.cfg.beta();
  std::vector<double> lw(L + 1);
  long double p = 1.0L;
  for (int i = 0; i <= L; ++i) {
    lw[i] = static_cast<double>(g.cfg.multiplicity / p);
    p *= beta;
  }
  // lw[i] = mu * beta^-i

  StaticSolution s;
  s.levels = L;
  s.edge_level.assign(m, L);
  s.freeze_level.assign(n, 0);
  std::vector<char> node_frozen(n, 0), edge_frozen(m, 0);
  const double scale = g.cfg.frequency_cap * g.cfg.alpha() * beta;

  auto recompute = [&]() {
    std::vector<double> w(n, 0.0);
    for (std::size_t e = 0; e < m; ++e)
      for (NodeId v : g.edges[e]) w[v] += lw[s.edge_level[e]];
    return w;
  };

  auto freeze_round = [&](int round) {
    std::vector<double> w = recompute();
    for (NodeId v = 0; v < n; ++v) {
      if (node_frozen[v]) continue;
      if (w[v] >= g.capacities[v] / scale) {
        node_frozen[v] = 1;
        s.freeze_level[v] = round;
      }
    }
    for (std::size_t e = 0; e < m; ++e) {
      if (edge_frozen[e]) continue;
      for (NodeId v : g.edges[e]) {
        if (node_frozen[v]) {
          edge_frozen[e] = 1;
          break;
        }
      }
    }
  };

  freeze_round(L);
  for (int i = L - 1; i >= 1; --i) {
    for (std::size_t e = 0; e < m; ++e)
      if (!edge_frozen[e]) s.edge_level[e] = i;
    freeze_round(i);
  }
  for (std::size_t e = 0; e < m; ++e)
    if (!edge_frozen[e]) s.edge_level[e] = 0;

  s.weights.resize(m);
  for (std::size_t e = 0; e < m; ++e) s.weights[e] = lw[s.edge_level[e]];
  return s;
}

DualReport dual_certificate(std::span<const double> capacities,
                            const std::vector<std::vector<NodeId>>& edges,
                            std::span<const double> weights, double mu,
                            double lambda) {
  if (weights.size() != edges.size())
    throw std::invalid_argument("one weight per edge required");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const std::size_t n = capacities.size();
  DualReport r;
  r.node_tight.assign(n, 0);
  r.edge_full.assign(edges.size(), 0);

  std::vector<double> w(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (NodeId v : edges[e]) {
      if (v >= n) throw std::out_of_range("edge endpoint out of range");
      w[v] += weights[e];
    }
    r.primal += weights[e];
  }
  for (NodeId v = 0; v < n; ++v) {
    const double thr = capacities[v] / lambda;
    if (w[v] >= thr - 1e-9 * std::max(1.0, thr)) {
      r.node_tight[v] = 1;
      r.dual += capacities[v];
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weights[e] >= mu * (1.0 - 1e-9)) {
      r.edge_full[e] = 1;
      r.dual += mu;
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (r.edge_full[e]) continue;
    bool covered = false;
    for (NodeId v : edges[e])
      if (r.node_tight[v]) {
        covered = true;
        break;
      }
    if (!covered) {
      std::ostringstream os;
      os << "edge " << e << " uncovered: weight " << weights[e]
         << " below cap and every endpoint below c/" << lambda;
      r.violations.push_back(os.str());
    }
  }
  return r;
}

DualReport dual_certificate(const PartitionEngine& eng, double lambda) {
  std::vector<std::vector<NodeId>> edges;
  std::vector<double> weights;
  std::vector<double> caps(eng.node_count());
  for (NodeId v = 0; v < eng.node_count(); ++v) caps[v] = eng.capacity(v);
  for (EdgeId e : eng.live_edges()) {
    auto sp = eng.edge_endpoints(e);
    edges.emplace_back(sp.begin(), sp.end());
    weights.push_back(eng.edge_weight(e));
  }
  return dual_certificate(caps, edges, weights, eng.config().multiplicity,
                          lambda);
}

namespace {

// Blossom search for maximum matching in a general graph.
class MatchingSolver {
public:
  explicit MatchingSolver(std::size_t n)
      : n_(n), adj_(n), match_(n, -1), parent_(n, -1), base_(n),
        used_(n, 0), blossom_(n, 0) {}

  void add_edge(int a, int b) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }

  std::size_t solve() {
    // greedy warm start
    for (int v = 0; v < static_cast<int>(n_); ++v) {
      if (match_[v] != -1) continue;
      for (int u : adj_[v]) {
        if (match_[u] == -1) {
          match_[v] = u;
          match_[u] = v;
          break;
        }
      }
    }
    for (int v = 0; v < static_cast<int>(n_); ++v)
      if (match_[v] == -1) find_path(v);
    std::size_t matched = 0;
    for (int v = 0; v < static_cast<int>(n_); ++v)
      if (match_[v] != -1) ++matched;
    return matched / 2;
  }

private:
  int lca(int a, int b) {
    std::vector<char> mark(n_, 0);
    while (true) {
      a = base_[a];
      mark[a] = 1;
      if (match_[a] == -1) break;
      a = parent_[match_[a]];
    }
    while (true) {
      b = base_[b];
      if (mark[b]) return b;
      b = parent_[match_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      blossom_[base_[v]] = 1;
      blossom_[base_[match_[v]]] = 1;
      parent_[v] = child;
      child = match_[v];
      v = parent_[match_[v]];
    }
  }

  bool find_path(int root) {
    std::fill(used_.begin(), used_.end(), 0);
    std::fill(parent_.begin(), parent_.end(), -1);
    for (std::size_t i = 0; i < n_; ++i) base_[i] = static_cast<int>(i);
    used_[root] = 1;
    std::vector<int> queue{root};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int v = queue[qi];
      for (int to : adj_[v]) {
        if (base_[v] == base_[to] || match_[v] == to) continue;
        if (to == root || (match_[to] != -1 && parent_[match_[to]] != -1)) {
          int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), 0);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (std::size_t i = 0; i < n_; ++i) {
            if (blossom_[base_[i]]) {
              base_[i] = cur;
              if (!used_[i]) {
                used_[i] = 1;
                queue.push_back(static_cast<int>(i));
              }
            }
          }
        } else if (parent_[to] == -1) {
          parent_[to] = v;
          if (match_[to] == -1) {
            augment(to);
            return true;
          }
          used_[match_[to]] = 1;
          queue.push_back(match_[to]);
        }
      }
    }
    return false;
  }

  void augment(int v) {
    while (v != -1) {
      int pv = parent_[v];
      int ppv = match_[pv];
      match_[v] = pv;
      match_[pv] = v;
      v = ppv;
    }
  }

  std::size_t n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_, parent_, base_;
  std::vector<char> used_, blossom_;
};

} // namespace

std::size_t exact_bmatching(std::size_t n,
                            std::span<const std::pair<NodeId, NodeId>> edges,
                            std::span<const int> capacities) {
  if (capacities.size() != n)
    throw std::invalid_argument("one capacity per node required");
  for (int c : capacities)
    if (c < 0) throw std::invalid_argument("capacities must be >= 0");
  std::vector<int> deg(n, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::out_of_range("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    ++deg[u];
    ++deg[v];
  }
  if (edges.empty()) return 0;

  std::vector<int> copies(n), offset(n);
  int total = 0;
  for (std::size_t v = 0; v < n; ++v) {
    copies[v] = std::min(capacities[v], deg[v]);
    offset[v] = total;
    total += copies[v];
  }
  const int gadget_base = total;
  MatchingSolver solver(static_cast<std::size_t>(total) + 2 * edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int eu = gadget_base + 2 * static_cast<int>(e);
    const int ev = eu + 1;
    solver.add_edge(eu, ev);
    auto [u, v] = edges[e];
    for (int i = 0; i < copies[u]; ++i) solver.add_edge(eu, offset[u] + i);
    for (int i = 0; i < copies[v]; ++i) solver.add_edge(ev, offset[v] + i);
  }
  return solver.solve() - edges.size();
}

double exact_setcover(std::span<const double> set_costs,
                      const std::vector<std::vector<std::uint32_t>>& element_sets) {
  const std::size_t s = set_costs.size();
  if (s > 20) throw std::invalid_argument("at most 20 sets supported");
  if (element_sets.size() > 64)
    throw std::invalid_argument("at most 64 live elements supported");
  for (double c : set_costs)
    if (!(c > 0.0)) throw std::invalid_argument("set costs must be positive");

  std::vector<std::uint64_t> covers(s, 0);
  for (std::size_t i = 0; i < element_sets.size(); ++i) {
    if (element_sets[i].empty())
      throw std::invalid_argument("element " + std::to_string(i) +
                                  " belongs to no set");
    for (std::uint32_t j : element_sets[i]) {
      if (j >= s) throw std::out_of_range("set index out of range");
      covers[j] |= std::uint64_t{1} << i;
    }
  }
  const std::uint64_t want =
      element_sets.empty()
          ? 0
          : (element_sets.size() == 64
                 ? ~std::uint64_t{0}
                 : (std::uint64_t{1} << element_sets.size()) - 1);
  double best = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s); ++mask) {
    std::uint64_t got = 0;
    double cost = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (mask & (std::uint64_t{1} << j)) {
        got |= covers[j];
        cost += set_costs[j];
      }
    }
    if ((got & want) == want && (best < 0.0 || cost < best)) best = cost;
  }
  return best < 0.0 ? 0.0 : best;
}

MaximalReport check_maximal(std::size_t n,
                            std::span<const std::pair<NodeId, NodeId>> edges,
                            std::span<const char> in_matching,
                            std::span<const int> capacities) {
  if (in_matching.size() != edges.size())
    throw std::invalid_argument("one flag per edge required");
  if (capacities.size() != n)
    throw std::invalid_argument("one capacity per node required");
  MaximalReport r;
  std::vector<int> deg(n, 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!in_matching[e]) continue;
    ++deg[edges[e].first];
    ++deg[edges[e].second];
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (deg[v] > capacities[v]) {
      std::ostringstream os;
      os << "node " << v << " matched degree " << deg[v] << " exceeds capacity "
         << capacities[v];
      r.violations.push_back(os.str());
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (in_matching[e]) continue;
    auto [u, v] = edges[e];
    if (deg[u] < capacities[u] && deg[v] < capacities[v]) {
      std::ostringstream os;
      os << "edge " << e << " (" << u << "," << v
         << ") is blocked by neither endpoint";
      r.violations.push_back(os.str());
    }
  }
  return r;
}

} // namespace dynoprimal
