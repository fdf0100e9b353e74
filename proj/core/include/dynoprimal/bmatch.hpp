#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynoprimal/partition.hpp"
#include "dynoprimal/sampler_tree.hpp"

namespace dynoprimal {

struct RoundingConfig {
  double epsilon = 0.1;      // in (0, 1/4)
  double sampling_c = 4.0;   // oversampling factor, > 1
  std::uint64_t seed = 0;
  std::size_t max_edges = 0; // engine edge budget; 0 means n*n

  static constexpr double lambda = 4.0;
  double gamma() const { return 1.0 + 4.0 * epsilon; }
};

struct WeightEvent {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 0.0; // 0 drops the edge from every sample set
};

// Randomized rounding of a dynamic fractional matching on simple graphs.
// An embedded engine (f=2, mu=1, capacities c_v/gamma) maintains edge
// weights; this layer keeps sampled subgraphs in sync with them:
//   big_sample   H_B: edges with a big endpoint, kept w.p. w(e); a small
//                endpoint draws via its sampler tree so deg(v) <= c_v holds
//   small_sample H_S: edges with a small endpoint, kept w.p.
//                min(1, w * c*lambda*log2(n)/eps)
//   greedy_matching M_S: maximal b-matching inside H_S under greedy repair
//   full_weight  E*: edges at weight exactly 1
// Nodes are big when their degree reaches tau = max(1, c*log2 n) and small
// again only at tau/2 (hysteresis).
class BMatchState {
public:
  BMatchState(std::vector<int> capacities, RoundingConfig rc);

  void insert_edge(NodeId u, NodeId v);
  void delete_edge(NodeId u, NodeId v);
  // Direct weight feed, same routine the engine events run through.
  void apply_weight_events(std::span<const WeightEvent> events);
  // Redraws every random choice (offsets, memberships, greedy matching)
  // from a fresh generator without touching the fractional state.
  void resample(std::uint64_t seed);

  std::size_t node_count() const { return rnodes_.size(); }
  std::size_t live_edge_count() const { return live_edges_; }
  bool edge_live(NodeId u, NodeId v) const;
  bool is_big(NodeId v) const;
  double threshold() const { return tau_; }
  int capacity(NodeId v) const;
  double edge_weight(NodeId u, NodeId v) const;
  double sample_probability(NodeId u, NodeId v) const; // p_e, needs a small endpoint
  double small_sample_weight(NodeId u, NodeId v) const; // w^S for H_S members
  bool in_big_sample(NodeId u, NodeId v) const;
  bool in_small_sample(NodeId u, NodeId v) const;
  bool in_greedy_matching(NodeId u, NodeId v) const;
  bool in_full_weight_set(NodeId u, NodeId v) const;
  bool nearly_tight(NodeId v) const; // W_v >= c_v/lambda, original capacity

  std::vector<std::pair<NodeId, NodeId>> live_edge_pairs() const;
  std::vector<std::pair<NodeId, NodeId>> big_sample() const;
  std::vector<std::pair<NodeId, NodeId>> small_sample() const;
  std::vector<std::pair<NodeId, NodeId>> greedy_matching() const;
  std::vector<std::pair<NodeId, NodeId>> full_weight_edges() const;
  // Largest valid candidate among full_weight_edges, a degree-repaired
  // big_sample, and greedy_matching.
  std::vector<std::pair<NodeId, NodeId>> current_matching() const;

  AuditReport verify_rounding() const;
  const PartitionEngine& engine() const { return engine_; }
  const SamplerTree* sampler(NodeId v) const;

private:
  struct REdge {
    NodeId u = 0, v = 0; // u < v
    double w = 0.0;
    bool live = false;
    bool in_hb = false, in_hs = false, in_ms = false, in_star = false;
    std::uint32_t pos_adj_u = 0, pos_adj_v = 0;
    std::uint32_t pos_hs_u = 0, pos_hs_v = 0;
  };
  struct RNode {
    int cap = 0;
    double eta = 0.0;
    bool big = false;
    int big_slot = -1;
    std::uint32_t degree = 0;
    int ms_degree = 0;
    int hb_degree = 0;
    SamplerTree tree;
    std::vector<std::uint32_t> adj;
    std::vector<std::uint32_t> hs_adj;
    std::vector<std::size_t> picks; // selected big slots, ascending
  };

  static std::uint64_t pair_key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }
  double uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  bool draw(double p) { return uniform01() < p; }
  NodeId other(const REdge& e, NodeId v) const { return e.u == v ? e.v : e.u; }
  std::uint32_t lookup(NodeId u, NodeId v) const;
  void process_engine_events();
  void apply_edge_weight(std::uint32_t id, double w);
  void remove_record(std::uint32_t id);
  void reclassify(NodeId v);
  void promote(NodeId v);
  void demote(NodeId v);
  void refresh_selection(NodeId v);
  void set_hb(std::uint32_t id, bool member);
  void set_hs(std::uint32_t id, bool member);
  void set_hs_raw(std::uint32_t id, bool member); // no matching repair
  void ms_add(std::uint32_t id);
  void ms_remove(std::uint32_t id);
  void rematch(NodeId v);
  void adj_erase(std::vector<std::uint32_t>& lst, std::uint32_t pos, bool hs,
                 NodeId owner);
  std::vector<std::size_t> scan_selection(NodeId v) const;

  PartitionEngine engine_;
  RoundingConfig cfg_;
  std::vector<int> caps_;
  std::vector<RNode> rnodes_;
  std::vector<REdge> redges_; // indexed by engine edge id
  std::unordered_map<std::uint64_t, std::uint32_t> by_pair_;
  std::vector<NodeId> big_order_; // slot -> owner
  std::vector<int> free_slots_;
  std::size_t live_edges_ = 0;
  double tau_ = 1.0;
  double hs_scale_ = 1.0; // c*lambda*log2(n)/eps
  std::mt19937_64 rng_;
  std::vector<NodeId> dirty_small_;
};

} // namespace dynoprimal
