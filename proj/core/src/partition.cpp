#include "dynoprimal/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace dynoprimal {

namespace {

std::string node_tag(NodeId v) {
  return "node " + std::to_string(v);
}

std::string edge_tag(EdgeId e) {
  return "edge " + std::to_string(e);
}

} // namespace

int compute_levels(const Config& cfg, double min_capacity) {
  const double beta = cfg.beta();
  const double target = static_cast<double>(cfg.max_live_edges) *
                        cfg.multiplicity * cfg.alpha() / min_capacity;
  long double pw = 1.0L;
  int k = 0;
  while (pw < target) {
    pw *= beta;
    ++k;
    if (k > 2000000)
      throw std::invalid_argument("level count overflow; check config");
  }
  return std::max(k, 1);
}

PartitionEngine::PartitionEngine(Config cfg, std::vector<double> capacities)
    : cfg_(cfg) {
  if (cfg_.frequency_cap < 1)
    throw std::invalid_argument("frequency cap must be >= 1");
  if (cfg_.max_live_edges < 1)
    throw std::invalid_argument("edge budget must be >= 1");
  if (!(cfg_.multiplicity > 0.0))
    throw std::invalid_argument("multiplicity must be positive");
  if (!(cfg_.epsilon > 0.0) || !(cfg_.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1)");
  if (capacities.empty())
    throw std::invalid_argument("capacity list is empty");
  double cmin = capacities[0];
  for (double c : capacities) {
    if (!(c > 0.0))
      throw std::invalid_argument("capacities must be positive");
    cmin = std::min(cmin, c);
  }

  const double beta = cfg_.beta();
  levels_ = compute_levels(cfg_, cmin);

  beta_pow_.resize(levels_ + 2);
  level_weight_.resize(levels_ + 1);
  long double p = 1.0L;
  for (int i = 0; i <= levels_ + 1; ++i) {
    beta_pow_[i] = static_cast<double>(p);
    p *= beta;
  }
  for (int i = 0; i <= levels_; ++i)
    level_weight_[i] = static_cast<double>(cfg_.multiplicity / beta_pow_[i]);

  const double scale = cfg_.frequency_cap * cfg_.alpha() * beta;
  nodes_.resize(capacities.size());
  for (std::size_t v = 0; v < capacities.size(); ++v) {
    nodes_[v].capacity = capacities[v];
    nodes_[v].lower = capacities[v] / scale;
    nodes_[v].lists.resize(levels_ + 1);
  }
}

const PartitionEngine::Edge& PartitionEngine::checked_edge(EdgeId e) const {
  if (e >= edges_.size() || !edges_[e].live)
    throw std::out_of_range(edge_tag(e) + " is not live");
  return edges_[e];
}

const PartitionEngine::Node& PartitionEngine::checked_node(NodeId v) const {
  if (v >= nodes_.size())
    throw std::out_of_range(node_tag(v) + " is out of range");
  return nodes_[v];
}

int PartitionEngine::node_level(NodeId v) const { return checked_node(v).level; }
int PartitionEngine::edge_level(EdgeId e) const { return checked_edge(e).level; }

double PartitionEngine::edge_weight(EdgeId e) const {
  return level_weight_[checked_edge(e).level];
}

double PartitionEngine::weight_at_level(int level) const {
  if (level < 0 || level > levels_)
    throw std::out_of_range("level out of range");
  return level_weight_[level];
}

double PartitionEngine::node_weight(NodeId v) const { return checked_node(v).weight; }

double PartitionEngine::node_weight_at(NodeId v, int i) const {
  const Node& nd = checked_node(v);
  if (i < 0 || i > levels_)
    throw std::out_of_range("level out of range");
  double w = 0.0;
  for (int j = 0; j <= levels_; ++j) {
    if (nd.lists[j].empty()) continue;
    w += static_cast<double>(nd.lists[j].size()) * level_weight_[std::max(j, i)];
  }
  return w;
}

double PartitionEngine::capacity(NodeId v) const { return checked_node(v).capacity; }
double PartitionEngine::lower_threshold(NodeId v) const { return checked_node(v).lower; }
std::uint64_t PartitionEngine::insertion_count(NodeId v) const {
  return checked_node(v).insertions;
}

bool PartitionEngine::node_active(NodeId v) const {
  const Node& nd = checked_node(v);
  return cfg_.multiplicity * static_cast<double>(nd.insertions) >= nd.capacity;
}

std::uint32_t PartitionEngine::node_degree(NodeId v) const {
  return checked_node(v).degree;
}

std::span<const NodeId> PartitionEngine::edge_endpoints(EdgeId e) const {
  return checked_edge(e).endpoints;
}

std::vector<EdgeId> PartitionEngine::live_edges() const {
  std::vector<EdgeId> out;
  out.reserve(live_edges_);
  for (EdgeId e = 0; e < edges_.size(); ++e)
    if (edges_[e].live) out.push_back(e);
  return out;
}

double PartitionEngine::level_change_budget() const {
  return 3.0 * static_cast<double>(metrics_.updates) * levels_ / cfg_.epsilon;
}

void PartitionEngine::enqueue_if_dirty(NodeId v) {
  Node& nd = nodes_[v];
  if (!nd.queued && is_dirty(nd)) {
    nd.queued = true;
    dirty_.push_back(v);
  }
}

void PartitionEngine::list_erase(NodeId v, int level, std::uint32_t pos) {
  auto& lst = nodes_[v].lists[level];
  std::uint32_t moved = lst.back();
  lst[pos] = moved;
  lst.pop_back();
  if (pos < lst.size()) fix_position(moved, v, pos);
}

std::uint32_t PartitionEngine::list_push(NodeId v, int level, std::uint32_t e) {
  auto& lst = nodes_[v].lists[level];
  lst.push_back(e);
  return static_cast<std::uint32_t>(lst.size() - 1);
}

void PartitionEngine::fix_position(std::uint32_t e, NodeId v, std::uint32_t pos) {
  Edge& ed = edges_[e];
  for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
    if (ed.endpoints[i] == v) {
      ed.positions[i] = pos;
      return;
    }
  }
}

void PartitionEngine::recompute_weight(NodeId v) {
  Node& nd = nodes_[v];
  double w = 0.0;
  for (int i = nd.level; i <= levels_; ++i)
    if (!nd.lists[i].empty())
      w += static_cast<double>(nd.lists[i].size()) * level_weight_[i];
  nd.weight = w;
}

void PartitionEngine::check_budget() const {
  if (static_cast<double>(metrics_.level_changes) > level_change_budget()) {
    std::ostringstream os;
    os << "relabel count " << metrics_.level_changes
       << " exceeded budget 3*t*L/eps = " << level_change_budget()
       << " (t=" << metrics_.updates << ", L=" << levels_ << ")";
    throw std::logic_error(os.str());
  }
}

void PartitionEngine::raise_node(NodeId v) {
  Node& nd = nodes_[v];
  const int k = nd.level;
  if (k >= levels_)
    throw std::logic_error(node_tag(v) + " cannot rise above level L");
  auto& lst = nd.lists[k];
  const double wk = level_weight_[k];
  const double wk1 = level_weight_[k + 1];
  const double dw = wk1 - wk;
  scratch_.clear();
  for (std::uint32_t e : lst) {
    Edge& ed = edges_[e];
    ed.level = k + 1;
    ++metrics_.level_changes;
    ++metrics_.last_level_changes;
    primal_ += dw;
    if (record_events_) events_.push_back({e, wk, wk1, ed.endpoints});
    for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
      NodeId u = ed.endpoints[i];
      if (u == v) continue;
      list_erase(u, k, ed.positions[i]);
      ed.positions[i] = list_push(u, k + 1, e);
      nodes_[u].weight += dw;
      scratch_.push_back(u);
    }
  }
  auto& dst = nd.lists[k + 1];
  for (std::uint32_t e : lst) {
    Edge& ed = edges_[e];
    for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
      if (ed.endpoints[i] == v) {
        ed.positions[i] = static_cast<std::uint32_t>(dst.size());
        break;
      }
    }
    dst.push_back(e);
  }
  lst.clear();
  nd.level = k + 1;
  recompute_weight(v);
  flush_scratch_dirty();
}

void PartitionEngine::lower_node(NodeId v) {
  Node& nd = nodes_[v];
  const int k = nd.level;
  auto& lst = nd.lists[k];
  const double wk = level_weight_[k];
  const double wk1 = level_weight_[k - 1];
  const double dw = wk1 - wk;
  scratch_.clear();
  std::size_t i = 0;
  while (i < lst.size()) {
    std::uint32_t e = lst[i];
    Edge& ed = edges_[e];
    int other_max = 0;
    for (NodeId u : ed.endpoints)
      if (u != v) other_max = std::max(other_max, nodes_[u].level);
    if (other_max >= k) {
      ++i;
      continue;
    }
    ed.level = k - 1;
    ++metrics_.level_changes;
    ++metrics_.last_level_changes;
    primal_ += dw;
    if (record_events_) events_.push_back({e, wk, wk1, ed.endpoints});
    std::size_t own = 0;
    for (std::size_t j = 0; j < ed.endpoints.size(); ++j) {
      NodeId u = ed.endpoints[j];
      if (u == v) {
        own = j;
        continue;
      }
      list_erase(u, k, ed.positions[j]);
      ed.positions[j] = list_push(u, k - 1, e);
      nodes_[u].weight += dw;
      scratch_.push_back(u);
    }
    list_erase(v, k, static_cast<std::uint32_t>(i));
    ed.positions[own] = list_push(v, k - 1, e);
  }
  nd.level = k - 1;
  recompute_weight(v);
  flush_scratch_dirty();
}

void PartitionEngine::flush_scratch_dirty() {
  std::sort(scratch_.begin(), scratch_.end());
  scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());
  for (NodeId u : scratch_) enqueue_if_dirty(u);
}

void PartitionEngine::settle() {
  while (!dirty_.empty()) {
    NodeId v = dirty_.front();
    dirty_.pop_front();
    nodes_[v].queued = false;
    while (true) {
      Node& nd = nodes_[v];
      if (nd.weight > nd.capacity) {
        raise_node(v);
      } else if (nd.level > 0 && nd.weight < nd.lower) {
        lower_node(v);
      } else {
        break;
      }
      ++metrics_.dirty_iterations;
      ++metrics_.last_dirty_iterations;
      check_budget();
    }
  }
}

EdgeId PartitionEngine::insert_edge(std::vector<NodeId> endpoints) {
  if (endpoints.empty())
    throw std::invalid_argument("edge needs at least one endpoint");
  if (endpoints.size() > static_cast<std::size_t>(cfg_.frequency_cap))
    throw std::invalid_argument("edge exceeds frequency cap f");
  std::sort(endpoints.begin(), endpoints.end());
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (endpoints[i] >= nodes_.size())
      throw std::out_of_range(node_tag(endpoints[i]) + " is out of range");
    if (i > 0 && endpoints[i] == endpoints[i - 1])
      throw std::invalid_argument("duplicate endpoint in edge");
  }
  if (live_edges_ >= cfg_.max_live_edges)
    throw std::invalid_argument("live edge budget m exhausted");

  ++metrics_.updates;
  metrics_.last_level_changes = 0;
  metrics_.last_dirty_iterations = 0;

  int lvl = 0;
  for (NodeId u : endpoints) lvl = std::max(lvl, nodes_[u].level);
  const double w = level_weight_[lvl];

  EdgeId id = static_cast<EdgeId>(edges_.size());
  edges_.push_back({});
  Edge& ed = edges_.back();
  ed.endpoints = std::move(endpoints);
  ed.positions.resize(ed.endpoints.size());
  ed.level = lvl;
  ed.live = true;
  for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
    NodeId u = ed.endpoints[i];
    ed.positions[i] = list_push(u, lvl, id);
    Node& un = nodes_[u];
    un.weight += w;
    un.insertions += 1;
    un.degree += 1;
  }
  primal_ += w;
  ++live_edges_;
  if (record_events_) events_.push_back({id, 0.0, w, ed.endpoints});
  for (NodeId u : ed.endpoints) enqueue_if_dirty(u);
  settle();
  return id;
}

void PartitionEngine::delete_edge(EdgeId e) {
  if (e >= edges_.size() || !edges_[e].live)
    throw std::out_of_range(edge_tag(e) + " is not live");
  ++metrics_.updates;
  metrics_.last_level_changes = 0;
  metrics_.last_dirty_iterations = 0;

  Edge& ed = edges_[e];
  const double w = level_weight_[ed.level];
  if (record_events_) events_.push_back({e, w, 0.0, ed.endpoints});
  for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
    NodeId u = ed.endpoints[i];
    list_erase(u, ed.level, ed.positions[i]);
    Node& un = nodes_[u];
    un.weight -= w;
    un.degree -= 1;
    if (un.degree == 0) un.weight = 0.0;
  }
  primal_ -= w;
  --live_edges_;
  ed.live = false;
  for (NodeId u : ed.endpoints) enqueue_if_dirty(u);
  ed.endpoints.clear();
  ed.endpoints.shrink_to_fit();
  ed.positions.clear();
  ed.positions.shrink_to_fit();
  if (live_edges_ == 0) primal_ = 0.0;
  settle();
}

std::vector<EdgeEvent> PartitionEngine::drain_events() {
  std::vector<EdgeEvent> out;
  out.swap(events_);
  return out;
}

AuditReport PartitionEngine::verify_invariant() const {
  AuditReport r;
  std::vector<double> exact(nodes_.size(), 0.0);
  for (const Edge& ed : edges_) {
    if (!ed.live) continue;
    const double w = level_weight_[ed.level];
    for (NodeId u : ed.endpoints) exact[u] += w;
  }
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    const Node& nd = nodes_[v];
    const double tol = 1e-9 * std::max(1.0, std::abs(exact[v]));
    std::ostringstream os;
    if (std::abs(nd.weight - exact[v]) > tol) {
      os << node_tag(v) << " cached weight drift: cached=" << nd.weight
         << " exact=" << exact[v];
      r.violations.push_back(os.str());
      continue;
    }
    if (nd.level > 0 && exact[v] < nd.lower - tol) {
      os << node_tag(v) << " below band at level " << nd.level
         << ": W=" << exact[v] << " < " << nd.lower;
      r.violations.push_back(os.str());
    } else if (exact[v] > nd.capacity + tol) {
      os << node_tag(v) << " above band at level " << nd.level
         << ": W=" << exact[v] << " > " << nd.capacity;
      r.violations.push_back(os.str());
    }
  }
  return r;
}

AuditReport PartitionEngine::verify_maximal(double lambda) const {
  AuditReport r;
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (!ed.live || ed.level == 0) continue;
    bool covered = false;
    for (NodeId u : ed.endpoints) {
      const Node& nd = nodes_[u];
      const double thr = nd.capacity / lambda;
      if (nd.weight >= thr - 1e-9 * std::max(1.0, thr)) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      std::ostringstream os;
      os << edge_tag(e) << " has weight below cap but no endpoint with W >= c/"
         << lambda;
      r.violations.push_back(os.str());
    }
  }
  return r;
}

AuditReport PartitionEngine::verify_structure() const {
  AuditReport r;
  auto fail = [&r](const std::string& s) { r.violations.push_back(s); };

  std::size_t live_seen = 0;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (!ed.live) continue;
    ++live_seen;
    int maxlvl = 0;
    for (NodeId u : ed.endpoints) maxlvl = std::max(maxlvl, nodes_[u].level);
    if (ed.level != maxlvl)
      fail(edge_tag(e) + " level " + std::to_string(ed.level) +
           " != max endpoint level " + std::to_string(maxlvl));
    for (std::size_t i = 0; i < ed.endpoints.size(); ++i) {
      NodeId u = ed.endpoints[i];
      const auto& lst = nodes_[u].lists[ed.level];
      if (ed.positions[i] >= lst.size() || lst[ed.positions[i]] != e)
        fail(edge_tag(e) + " has a stale position handle at " + node_tag(u));
    }
  }
  if (live_seen != live_edges_)
    fail("live edge count mismatch: " + std::to_string(live_seen) + " vs " +
         std::to_string(live_edges_));

  double primal = 0.0;
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    const Node& nd = nodes_[v];
    std::size_t deg = 0;
    for (int i = 0; i <= levels_; ++i) {
      for (std::uint32_t e : nd.lists[i]) {
        if (e >= edges_.size() || !edges_[e].live)
          fail(node_tag(v) + " lists a dead edge " + std::to_string(e));
        else if (edges_[e].level != i)
          fail(node_tag(v) + " lists " + edge_tag(e) + " under level " +
               std::to_string(i) + " but the edge sits on " +
               std::to_string(edges_[e].level));
      }
      if (i < nd.level && !nd.lists[i].empty())
        fail(node_tag(v) + " has edges below its own level");
      deg += nd.lists[i].size();
    }
    if (deg != nd.degree)
      fail(node_tag(v) + " degree counter mismatch");
    if (nd.insertions < nd.degree)
      fail(node_tag(v) + " has more live edges than insertions");
    if (!node_active(v) && nd.level != 0)
      fail(node_tag(v) + " is passive but sits above level 0");
    if (nd.queued)
      fail(node_tag(v) + " still queued after settle");
  }
  for (const Edge& ed : edges_)
    if (ed.live) primal += level_weight_[ed.level];
  if (std::abs(primal - primal_) > 1e-9 * std::max(1.0, primal))
    fail("primal accumulator drift");
  if (!dirty_.empty()) fail("dirty queue is not empty");
  return r;
}

BankAudit PartitionEngine::compute_bank_balance() const {
  BankAudit a;
  const double eps = cfg_.epsilon;
  const double beta = cfg_.beta();
  const double f = cfg_.frequency_cap;
  for (const Edge& ed : edges_) {
    if (!ed.live) continue;
    a.edge_potential += (1.0 + eps) * static_cast<double>(levels_ - ed.level);
  }
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    const Node& nd = nodes_[v];
    if (node_active(v)) {
      const double target = f * cfg_.alpha() * nd.lower; // = c_v / beta
      const double deficit = std::max(0.0, target - nd.weight);
      a.node_potential +=
          beta_pow_[nd.level + 1] * deficit / (f * cfg_.multiplicity * (beta - 1.0));
    } else {
      a.node_potential +=
          beta / (f * (beta - 1.0)) * static_cast<double>(nd.insertions);
    }
  }
  a.balance = (a.edge_potential + a.node_potential) / eps;
  return a;
}

void PartitionEngine::corrupt_node_level_for_test(NodeId v, int level) {
  if (v >= nodes_.size()) throw std::out_of_range(node_tag(v) + " is out of range");
  if (level < 0 || level > levels_) throw std::out_of_range("level out of range");
  nodes_[v].level = level;
}

} // namespace dynoprimal
