#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

namespace dynoprimal {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

// Fractional matching engine parameters. A node's capacity c_v bounds the
// total weight of incident edges; an edge carries at most `multiplicity`.
// `frequency_cap` bounds how many endpoints one edge may touch.
struct Config {
  int frequency_cap = 1;          // f >= 1
  std::size_t max_live_edges = 1; // m >= 1
  double multiplicity = 1.0;      // mu > 0
  double epsilon = 0.25;          // in (0,1)

  double alpha() const { return 1.0 + 1.0 / frequency_cap + 3.0 * epsilon; }
  double beta() const { return 1.0 + epsilon; }
};

// Smallest k >= 1 with beta^k >= m*mu*alpha/min_capacity, via the same
// multiplicative loop that builds the weight tables.
int compute_levels(const Config& cfg, double min_capacity);

struct Metrics {
  std::uint64_t updates = 0;          // insert/delete calls
  std::uint64_t level_changes = 0;    // cumulative edge relabels
  std::uint64_t dirty_iterations = 0; // cumulative node level moves
  std::uint64_t last_level_changes = 0;
  std::uint64_t last_dirty_iterations = 0;
};

// Weight transition of one edge: old_weight 0 means the edge was inserted,
// new_weight 0 means it was removed, anything else is a relabel.
struct EdgeEvent {
  EdgeId edge = 0;
  double old_weight = 0.0;
  double new_weight = 0.0;
  std::vector<NodeId> endpoints;
};

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

struct BankAudit {
  double edge_potential = 0.0;
  double node_potential = 0.0;
  double balance = 0.0; // (edge_potential + node_potential) / epsilon
};

// Dynamic fractional hypergraph b-matching under edge inserts and deletes.
// Nodes sit on levels 0..L; an edge lives on the max level of its endpoints
// and weighs mu * beta^-level. After every update the engine rebalances so
// that each node's incident weight W_v stays inside its band:
//   level > 0  ->  c_v/(f*alpha*beta) <= W_v <= c_v
//   level == 0 ->  W_v <= c_v
class PartitionEngine {
public:
  PartitionEngine(Config cfg, std::vector<double> capacities);

  EdgeId insert_edge(std::vector<NodeId> endpoints);
  void delete_edge(EdgeId e);
  void settle(); // no-op when already balanced

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t live_edge_count() const { return live_edges_; }
  bool edge_live(EdgeId e) const { return e < edges_.size() && edges_[e].live; }
  int levels() const { return levels_; }
  double alpha() const { return cfg_.alpha(); }
  double beta() const { return cfg_.beta(); }
  const Config& config() const { return cfg_; }

  int node_level(NodeId v) const;
  int edge_level(EdgeId e) const;
  double edge_weight(EdgeId e) const;
  double weight_at_level(int level) const; // mu * beta^-level
  double node_weight(NodeId v) const;      // cached W_v
  double node_weight_at(NodeId v, int i) const;
  double capacity(NodeId v) const;
  double lower_threshold(NodeId v) const; // c_v / (f*alpha*beta)
  std::uint64_t insertion_count(NodeId v) const;
  bool node_active(NodeId v) const; // mu * insertions >= c_v
  std::uint32_t node_degree(NodeId v) const;
  std::span<const NodeId> edge_endpoints(EdgeId e) const;
  std::vector<EdgeId> live_edges() const;

  double solution_value() const { return primal_; }
  const Metrics& metrics() const { return metrics_; }
  double level_change_budget() const; // 3*t*L/epsilon

  AuditReport verify_invariant() const;
  AuditReport verify_maximal(double lambda) const;
  AuditReport verify_structure() const;
  BankAudit compute_bank_balance() const;

  void set_event_recording(bool on) { record_events_ = on; }
  std::vector<EdgeEvent> drain_events();

  // Breaks the structure on purpose so audits have something to report.
  void corrupt_node_level_for_test(NodeId v, int level);

private:
  struct Node {
    double capacity = 0.0;
    double lower = 0.0;  // capacity / (f*alpha*beta)
    double weight = 0.0; // cached W_v
    std::uint64_t insertions = 0;
    std::uint32_t degree = 0;
    int level = 0;
    bool queued = false;
    // lists[i]: incident edges currently on level i (empty for i < level)
    std::vector<std::vector<std::uint32_t>> lists;
  };

  struct Edge {
    std::vector<NodeId> endpoints;       // sorted ascending
    std::vector<std::uint32_t> positions; // index in endpoint's level list
    int level = 0;
    bool live = false;
  };

  bool is_dirty(const Node& nd) const {
    return nd.weight > nd.capacity ||
           (nd.level > 0 && nd.weight < nd.lower);
  }
  void enqueue_if_dirty(NodeId v);
  void list_erase(NodeId v, int level, std::uint32_t pos);
  std::uint32_t list_push(NodeId v, int level, std::uint32_t e);
  void fix_position(std::uint32_t e, NodeId v, std::uint32_t pos);
  void raise_node(NodeId v);
  void lower_node(NodeId v);
  void recompute_weight(NodeId v);
  void flush_scratch_dirty();
  void check_budget() const;
  const Edge& checked_edge(EdgeId e) const;
  const Node& checked_node(NodeId v) const;

  Config cfg_;
  int levels_ = 1;                  // L
  std::vector<double> level_weight_; // mu * beta^-i, i in 0..L
  std::vector<double> beta_pow_;     // beta^i, i in 0..L+1
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::deque<NodeId> dirty_;
  std::vector<NodeId> scratch_;
  std::size_t live_edges_ = 0;
  double primal_ = 0.0;
  Metrics metrics_;
  bool record_events_ = false;
  std::vector<EdgeEvent> events_;
};

} // namespace dynoprimal
