#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynoprimal/partition.hpp"

namespace dynoprimal {

struct SetCoverConfig {
  std::vector<double> set_costs; // positive
  int frequency_cap = 1;         // max sets per element
  std::size_t max_elements = 1;
  double epsilon = 0.25;
};

// Dynamic weighted set cover: sets are nodes with capacity = cost, elements
// are edges over their member sets, and the maintained cover S* collects
// every set whose incident weight reaches cost/lambda with lambda =
// f*alpha*beta. Elements carry opaque uint64 keys.
class SetCoverState {
public:
  explicit SetCoverState(SetCoverConfig cfg);

  void insert_element(std::uint64_t element, std::vector<NodeId> sets);
  void delete_element(std::uint64_t element);

  double lambda() const { return lambda_; }
  double cover_cost() const { return cover_cost_; }
  std::size_t set_count() const { return engine_.node_count(); }
  std::size_t live_element_count() const { return elements_.size(); }
  bool element_live(std::uint64_t element) const {
    return elements_.count(element) != 0;
  }
  bool in_cover(NodeId set) const;
  std::vector<NodeId> current_cover() const; // ascending set ids
  std::vector<std::uint64_t> live_elements() const; // ascending keys
  std::span<const NodeId> element_sets(std::uint64_t element) const;

  AuditReport verify_cover() const; // every live element hits S*
  AuditReport verify_cover(std::span<const NodeId> candidate) const;
  AuditReport verify_thresholds() const; // S* flags match exact weights

  const PartitionEngine& engine() const { return engine_; }
  PartitionEngine& engine() { return engine_; }

  // Clears one membership flag so audits have something to report.
  void corrupt_cover_for_test(NodeId set);

private:
  void refresh_set(NodeId v);
  void refresh_from_events();

  PartitionEngine engine_;
  double lambda_ = 1.0;
  std::vector<char> in_cover_;
  double cover_cost_ = 0.0;
  std::unordered_map<std::uint64_t, EdgeId> elements_;
};

} // namespace dynoprimal
