#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dynoprimal/partition.hpp"

namespace dynoprimal {

struct StaticGraph {
  Config cfg;
  std::vector<double> capacities;
  std::vector<std::vector<NodeId>> edges;
};

struct StaticSolution {
  std::vector<double> weights;    // mu * beta^-edge_level
  std::vector<int> edge_level;
  std::vector<int> freeze_level;  // 0 for nodes that never became tight
  int levels = 1;
};

// Offline freezing procedure: all edges start at the bottom weight, rise by
// beta per round, and stop the first time an endpoint's incident weight
// reaches its lower threshold c_v/(f*alpha*beta).
StaticSolution static_primal_dual(const StaticGraph& g);

struct DualReport {
  std::vector<char> node_tight; // y*: W_v >= c_v/lambda
  std::vector<char> edge_full;  // z*: x(e) = mu
  double primal = 0.0;          // sum of weights
  double dual = 0.0;            // sum c_v y* + mu * sum z*
  std::vector<std::string> violations;
  bool feasible() const { return violations.empty(); }
};

// Rounds the fractional solution's tight nodes and full edges into a dual
// vector and checks every edge constraint z*_e + sum y*_v >= 1.
DualReport dual_certificate(std::span<const double> capacities,
                            const std::vector<std::vector<NodeId>>& edges,
                            std::span<const double> weights, double mu,
                            double lambda);
DualReport dual_certificate(const PartitionEngine& eng, double lambda);

// Maximum integral b-matching by reduction to maximum matching: each edge
// becomes a two-vertex gadget wired to min(c_v, deg_v) copies of each
// endpoint, solved with a blossom search.
std::size_t exact_bmatching(std::size_t n,
                            std::span<const std::pair<NodeId, NodeId>> edges,
                            std::span<const int> capacities);

// Minimum-cost cover by exhaustive enumeration; element_sets[i] lists the
// sets containing element i. At most 20 sets and 64 elements.
double exact_setcover(std::span<const double> set_costs,
                      const std::vector<std::vector<std::uint32_t>>& element_sets);

struct MaximalReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Validates an integral b-matching: degree caps respected and no edge
// outside it has both endpoints unsaturated.
MaximalReport check_maximal(std::size_t n,
                            std::span<const std::pair<NodeId, NodeId>> edges,
                            std::span<const char> in_matching,
                            std::span<const int> capacities);

} // namespace dynoprimal
