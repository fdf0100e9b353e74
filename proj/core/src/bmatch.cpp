#include "dynoprimal/bmatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dynoprimal {

namespace {

PartitionEngine build_engine(const std::vector<int>& caps,
                             const RoundingConfig& rc) {
  const std::size_t n = caps.size();
  if (n == 0) throw std::invalid_argument("capacity list is empty");
  if (!(rc.epsilon > 0.0) || !(rc.epsilon < 0.25))
    throw std::invalid_argument("epsilon must lie in (0, 1/4)");
  if (!(rc.sampling_c > 1.0))
    throw std::invalid_argument("sampling factor c must exceed 1");
  for (int c : caps)
    if (c < 1 || static_cast<std::size_t>(c) > n)
      throw std::invalid_argument("capacities must lie in 1..n");
  Config ec;
  ec.frequency_cap = 2;
  ec.max_live_edges = rc.max_edges ? rc.max_edges : n * n;
  ec.multiplicity = 1.0;
  ec.epsilon = rc.epsilon;
  std::vector<double> scaled(n);
  for (std::size_t v = 0; v < n; ++v) scaled[v] = caps[v] / rc.gamma();
  return PartitionEngine(ec, std::move(scaled));
}

} // namespace

BMatchState::BMatchState(std::vector<int> capacities, RoundingConfig rc)
    : engine_(build_engine(capacities, rc)), cfg_(rc),
      caps_(std::move(capacities)), rng_(rc.seed) {
  const std::size_t n = caps_.size();
  tau_ = std::max(1.0, cfg_.sampling_c * std::log2(static_cast<double>(n)));
  hs_scale_ = n > 1 ? cfg_.sampling_c * RoundingConfig::lambda *
                          std::log2(static_cast<double>(n)) / cfg_.epsilon
                    : 1.0;
  rnodes_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    rnodes_[v].cap = caps_[v];
    rnodes_[v].eta = uniform01();
  }
  engine_.set_event_recording(true);
}

std::uint32_t BMatchState::lookup(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  auto it = by_pair_.find(pair_key(u, v));
  if (it == by_pair_.end())
    throw std::out_of_range("edge (" + std::to_string(u) + "," +
                            std::to_string(v) + ") is not live");
  return it->second;
}

bool BMatchState::edge_live(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  return by_pair_.count(pair_key(u, v)) != 0;
}

bool BMatchState::is_big(NodeId v) const {
  if (v >= rnodes_.size()) throw std::out_of_range("node out of range");
  return rnodes_[v].big;
}

int BMatchState::capacity(NodeId v) const {
  if (v >= rnodes_.size()) throw std::out_of_range("node out of range");
  return rnodes_[v].cap;
}

double BMatchState::edge_weight(NodeId u, NodeId v) const {
  return redges_[lookup(u, v)].w;
}

double BMatchState::sample_probability(NodeId u, NodeId v) const {
  const REdge& e = redges_[lookup(u, v)];
  if (rnodes_[e.u].big && rnodes_[e.v].big)
    throw std::invalid_argument("edge has no small endpoint");
  return std::min(1.0, e.w * hs_scale_);
}

double BMatchState::small_sample_weight(NodeId u, NodeId v) const {
  const REdge& e = redges_[lookup(u, v)];
  if (!e.in_hs)
    throw std::invalid_argument("edge is not in the small sample");
  return e.w * hs_scale_ >= 1.0 ? e.w : 1.0 / hs_scale_;
}

bool BMatchState::in_big_sample(NodeId u, NodeId v) const {
  return redges_[lookup(u, v)].in_hb;
}
bool BMatchState::in_small_sample(NodeId u, NodeId v) const {
  return redges_[lookup(u, v)].in_hs;
}
bool BMatchState::in_greedy_matching(NodeId u, NodeId v) const {
  return redges_[lookup(u, v)].in_ms;
}
bool BMatchState::in_full_weight_set(NodeId u, NodeId v) const {
  return redges_[lookup(u, v)].in_star;
}

bool BMatchState::nearly_tight(NodeId v) const {
  if (v >= rnodes_.size()) throw std::out_of_range("node out of range");
  return engine_.node_weight(v) >= caps_[v] / RoundingConfig::lambda;
}

const SamplerTree* BMatchState::sampler(NodeId v) const {
  if (v >= rnodes_.size()) throw std::out_of_range("node out of range");
  return rnodes_[v].big ? nullptr : &rnodes_[v].tree;
}

void BMatchState::insert_edge(NodeId u, NodeId v) {
  if (u >= rnodes_.size() || v >= rnodes_.size())
    throw std::out_of_range("node out of range");
  if (u == v) throw std::invalid_argument("self loops are not allowed");
  if (u > v) std::swap(u, v);
  if (by_pair_.count(pair_key(u, v)))
    throw std::invalid_argument("edge is already live");

  EdgeId id = engine_.insert_edge({u, v});
  if (redges_.size() <= id) redges_.resize(id + 1);
  REdge& e = redges_[id];
  e = REdge{};
  e.u = u;
  e.v = v;
  e.live = true;
  e.pos_adj_u = static_cast<std::uint32_t>(rnodes_[u].adj.size());
  rnodes_[u].adj.push_back(id);
  e.pos_adj_v = static_cast<std::uint32_t>(rnodes_[v].adj.size());
  rnodes_[v].adj.push_back(id);
  rnodes_[u].degree += 1;
  rnodes_[v].degree += 1;
  by_pair_.emplace(pair_key(u, v), id);
  ++live_edges_;

  reclassify(u);
  reclassify(v);
  process_engine_events();
}

void BMatchState::delete_edge(NodeId u, NodeId v) {
  std::uint32_t id = lookup(u, v);
  engine_.delete_edge(id);
  process_engine_events(); // removal event drops the record
  reclassify(std::min(u, v));
  reclassify(std::max(u, v));
}

void BMatchState::process_engine_events() {
  for (const EdgeEvent& ev : engine_.drain_events())
    apply_edge_weight(ev.edge, ev.new_weight);
}

void BMatchState::apply_weight_events(std::span<const WeightEvent> events) {
  for (const WeightEvent& ev : events)
    apply_edge_weight(lookup(ev.u, ev.v), ev.weight);
}

void BMatchState::apply_edge_weight(std::uint32_t id, double w) {
  REdge& e = redges_[id];
  if (!e.live) throw std::logic_error("weight event for a dead edge");
  const bool ubig = rnodes_[e.u].big;
  const bool vbig = rnodes_[e.v].big;
  e.w = w;
  e.in_star = (w == 1.0);
  if (ubig && vbig) {
    set_hb(id, draw(w));
  } else if (ubig || vbig) {
    const NodeId s = ubig ? e.v : e.u;
    const NodeId b = ubig ? e.u : e.v;
    RNode& sn = rnodes_[s];
    sn.tree.ensure(big_order_.size());
    sn.tree.set_leaf(static_cast<std::size_t>(rnodes_[b].big_slot), w);
    refresh_selection(s);
  }
  if (!ubig || !vbig) set_hs(id, draw(std::min(1.0, w * hs_scale_)));
  if (w == 0.0) remove_record(id);
}

void BMatchState::adj_erase(std::vector<std::uint32_t>& lst, std::uint32_t pos,
                            bool hs, NodeId owner) {
  std::uint32_t moved = lst.back();
  lst[pos] = moved;
  lst.pop_back();
  if (pos >= lst.size()) return;
  REdge& m = redges_[moved];
  if (hs) {
    if (m.u == owner) m.pos_hs_u = pos;
    else m.pos_hs_v = pos;
  } else {
    if (m.u == owner) m.pos_adj_u = pos;
    else m.pos_adj_v = pos;
  }
}

void BMatchState::remove_record(std::uint32_t id) {
  REdge& e = redges_[id];
  if (e.in_hb) set_hb(id, false);
  if (e.in_hs) set_hs(id, false);
  adj_erase(rnodes_[e.u].adj, e.pos_adj_u, false, e.u);
  adj_erase(rnodes_[e.v].adj, e.pos_adj_v, false, e.v);
  rnodes_[e.u].degree -= 1;
  rnodes_[e.v].degree -= 1;
  by_pair_.erase(pair_key(e.u, e.v));
  e.live = false;
  --live_edges_;
}

void BMatchState::reclassify(NodeId v) {
  RNode& nd = rnodes_[v];
  if (nd.big) {
    if (static_cast<double>(nd.degree) <= tau_ / 2.0) demote(v);
  } else {
    if (static_cast<double>(nd.degree) >= tau_) promote(v);
  }
}

void BMatchState::promote(NodeId v) {
  RNode& nd = rnodes_[v];
  nd.big = true;
  if (!free_slots_.empty()) {
    nd.big_slot = free_slots_.back();
    free_slots_.pop_back();
    big_order_[nd.big_slot] = v;
  } else {
    nd.big_slot = static_cast<int>(big_order_.size());
    big_order_.push_back(v);
  }
  nd.tree = SamplerTree();
  nd.picks.clear();
  dirty_small_.clear();
  std::vector<std::uint32_t> incident = nd.adj;
  for (std::uint32_t id : incident) {
    REdge& e = redges_[id];
    const NodeId x = other(e, v);
    RNode& xn = rnodes_[x];
    if (xn.big) {
      // big-small via v's tree becomes big-big: independent redraw, and the
      // pair leaves the small-sample universe
      set_hs(id, false);
      set_hb(id, draw(e.w));
    } else {
      // small-small becomes big(v)-small(x): x's tree gains the edge
      xn.tree.ensure(big_order_.size());
      xn.tree.set_leaf(static_cast<std::size_t>(nd.big_slot), e.w);
      dirty_small_.push_back(x);
    }
  }
  std::sort(dirty_small_.begin(), dirty_small_.end());
  dirty_small_.erase(std::unique(dirty_small_.begin(), dirty_small_.end()),
                     dirty_small_.end());
  for (NodeId x : dirty_small_) refresh_selection(x);
}

void BMatchState::demote(NodeId v) {
  RNode& nd = rnodes_[v];
  nd.big = false;
  const int slot = nd.big_slot;
  nd.big_slot = -1;
  free_slots_.push_back(slot);
  nd.tree = SamplerTree();
  nd.tree.ensure(big_order_.size());
  nd.picks.clear();
  dirty_small_.clear();
  std::vector<std::uint32_t> incident = nd.adj;
  for (std::uint32_t id : incident) {
    REdge& e = redges_[id];
    const NodeId x = other(e, v);
    RNode& xn = rnodes_[x];
    if (xn.big) {
      // big-big becomes big(x)-small(v): selection owns membership now
      if (e.in_hb) set_hb(id, false);
      nd.tree.set_leaf(static_cast<std::size_t>(xn.big_slot), e.w);
      // the pair enters the small-sample universe
      set_hs(id, draw(std::min(1.0, e.w * hs_scale_)));
    } else {
      // big(v)-small(x) becomes small-small: x's tree drops the edge
      xn.tree.set_leaf(static_cast<std::size_t>(slot), 0.0);
      dirty_small_.push_back(x);
    }
  }
  std::sort(dirty_small_.begin(), dirty_small_.end());
  dirty_small_.erase(std::unique(dirty_small_.begin(), dirty_small_.end()),
                     dirty_small_.end());
  refresh_selection(v);
  for (NodeId x : dirty_small_) refresh_selection(x);
}

std::vector<std::size_t> BMatchState::scan_selection(NodeId v) const {
  // Interval rule over the tree's current leaves: slot i is picked when
  // some integer k in [0, c_v) lands in [A_{i-1}, A_i).
  const RNode& nd = rnodes_[v];
  std::vector<std::size_t> picks;
  for (int k = 0; k < nd.cap; ++k) {
    const double y = static_cast<double>(k) + nd.eta;
    auto idx = nd.tree.return_index(y);
    if (!idx) break;
    if (picks.empty() || picks.back() != *idx) picks.push_back(*idx);
  }
  return picks;
}

void BMatchState::refresh_selection(NodeId v) {
  RNode& nd = rnodes_[v];
  std::vector<std::size_t> next = scan_selection(v);
  // diff against the previous picks; both ascending
  std::size_t i = 0, j = 0;
  std::vector<std::pair<std::size_t, bool>> flips;
  while (i < nd.picks.size() || j < next.size()) {
    if (j == next.size() ||
        (i < nd.picks.size() && nd.picks[i] < next[j])) {
      flips.emplace_back(nd.picks[i], false);
      ++i;
    } else if (i == nd.picks.size() || next[j] < nd.picks[i]) {
      flips.emplace_back(next[j], true);
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  nd.picks = std::move(next);
  for (auto [slot, member] : flips) {
    const NodeId b = big_order_[slot];
    auto it = by_pair_.find(pair_key(std::min(v, b), std::max(v, b)));
    if (it == by_pair_.end())
      throw std::logic_error("sampler picked a slot without a live edge");
    set_hb(it->second, member);
  }
}

void BMatchState::set_hb(std::uint32_t id, bool member) {
  REdge& e = redges_[id];
  if (e.in_hb == member) return;
  e.in_hb = member;
  const int d = member ? 1 : -1;
  rnodes_[e.u].hb_degree += d;
  rnodes_[e.v].hb_degree += d;
}

void BMatchState::set_hs_raw(std::uint32_t id, bool member) {
  REdge& e = redges_[id];
  if (e.in_hs == member) return;
  if (member) {
    e.in_hs = true;
    e.pos_hs_u = static_cast<std::uint32_t>(rnodes_[e.u].hs_adj.size());
    rnodes_[e.u].hs_adj.push_back(id);
    e.pos_hs_v = static_cast<std::uint32_t>(rnodes_[e.v].hs_adj.size());
    rnodes_[e.v].hs_adj.push_back(id);
  } else {
    e.in_hs = false;
    adj_erase(rnodes_[e.u].hs_adj, e.pos_hs_u, true, e.u);
    adj_erase(rnodes_[e.v].hs_adj, e.pos_hs_v, true, e.v);
  }
}

void BMatchState::set_hs(std::uint32_t id, bool member) {
  REdge& e = redges_[id];
  if (e.in_hs == member) return;
  if (member) {
    set_hs_raw(id, true);
    RNode& un = rnodes_[e.u];
    RNode& vn = rnodes_[e.v];
    if (un.ms_degree < un.cap && vn.ms_degree < vn.cap) ms_add(id);
  } else {
    const bool was_matched = e.in_ms;
    const NodeId u = e.u, v = e.v;
    if (was_matched) ms_remove(id);
    set_hs_raw(id, false);
    if (was_matched) {
      rematch(u);
      rematch(v);
    }
  }
}

void BMatchState::ms_add(std::uint32_t id) {
  REdge& e = redges_[id];
  e.in_ms = true;
  rnodes_[e.u].ms_degree += 1;
  rnodes_[e.v].ms_degree += 1;
}

void BMatchState::ms_remove(std::uint32_t id) {
  REdge& e = redges_[id];
  e.in_ms = false;
  rnodes_[e.u].ms_degree -= 1;
  rnodes_[e.v].ms_degree -= 1;
}

void BMatchState::rematch(NodeId v) {
  RNode& nd = rnodes_[v];
  for (std::uint32_t id : nd.hs_adj) {
    if (nd.ms_degree >= nd.cap) break;
    REdge& e = redges_[id];
    if (e.in_ms) continue;
    const NodeId x = other(e, v);
    if (rnodes_[x].ms_degree < rnodes_[x].cap) ms_add(id);
  }
}

void BMatchState::resample(std::uint64_t seed) {
  rng_.seed(seed);
  for (RNode& nd : rnodes_) nd.eta = uniform01();
  for (std::uint32_t id = 0; id < redges_.size(); ++id)
    if (redges_[id].live && redges_[id].in_ms) ms_remove(id);
  for (NodeId v = 0; v < rnodes_.size(); ++v)
    if (!rnodes_[v].big && rnodes_[v].tree.leaf_count() > 0)
      refresh_selection(v);
  for (std::uint32_t id = 0; id < redges_.size(); ++id) {
    REdge& e = redges_[id];
    if (!e.live) continue;
    const bool ubig = rnodes_[e.u].big;
    const bool vbig = rnodes_[e.v].big;
    if (ubig && vbig) set_hb(id, draw(e.w));
    if (!ubig || !vbig) set_hs_raw(id, draw(std::min(1.0, e.w * hs_scale_)));
  }
  for (std::uint32_t id = 0; id < redges_.size(); ++id) {
    REdge& e = redges_[id];
    if (!e.live || !e.in_hs) continue;
    if (rnodes_[e.u].ms_degree < rnodes_[e.u].cap &&
        rnodes_[e.v].ms_degree < rnodes_[e.v].cap)
      ms_add(id);
  }
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::live_edge_pairs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const REdge& e : redges_)
    if (e.live) out.emplace_back(e.u, e.v);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::big_sample() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const REdge& e : redges_)
    if (e.live && e.in_hb) out.emplace_back(e.u, e.v);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::small_sample() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const REdge& e : redges_)
    if (e.live && e.in_hs) out.emplace_back(e.u, e.v);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::greedy_matching() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const REdge& e : redges_)
    if (e.live && e.in_ms) out.emplace_back(e.u, e.v);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::full_weight_edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const REdge& e : redges_)
    if (e.live && e.in_star) out.emplace_back(e.u, e.v);
  return out;
}

std::vector<std::pair<NodeId, NodeId>> BMatchState::current_matching() const {
  std::vector<std::pair<NodeId, NodeId>> star = full_weight_edges();
  std::vector<std::pair<NodeId, NodeId>> ms = greedy_matching();
  // repair the big sample into a valid b-matching by dropping excess edges
  std::vector<std::pair<NodeId, NodeId>> hb;
  std::vector<int> used(rnodes_.size(), 0);
  for (const REdge& e : redges_) {
    if (!e.live || !e.in_hb) continue;
    if (used[e.u] < rnodes_[e.u].cap && used[e.v] < rnodes_[e.v].cap) {
      ++used[e.u];
      ++used[e.v];
      hb.emplace_back(e.u, e.v);
    }
  }
  if (star.size() >= hb.size() && star.size() >= ms.size()) return star;
  if (hb.size() >= ms.size()) return hb;
  return ms;
}

AuditReport BMatchState::verify_rounding() const {
  AuditReport r;
  auto fail = [&r](const std::string& s) { r.violations.push_back(s); };
  const std::size_t n = rnodes_.size();

  std::vector<int> deg(n, 0), hb(n, 0), hs(n, 0), ms(n, 0);
  std::size_t live_seen = 0;
  for (std::uint32_t id = 0; id < redges_.size(); ++id) {
    const REdge& e = redges_[id];
    if (!e.live) continue;
    ++live_seen;
    const std::string tag =
        "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
    if (!engine_.edge_live(id)) {
      fail(tag + " is dead in the fractional layer");
      continue;
    }
    if (e.w != engine_.edge_weight(id))
      fail(tag + " weight is out of sync with the fractional layer");
    if (e.in_star != (engine_.edge_level(id) == 0))
      fail(tag + " full-weight flag disagrees with its level");
    const bool ubig = rnodes_[e.u].big;
    const bool vbig = rnodes_[e.v].big;
    if (e.in_hb && !(ubig || vbig))
      fail(tag + " sits in the big sample without a big endpoint");
    if (e.in_hs && ubig && vbig)
      fail(tag + " sits in the small sample without a small endpoint");
    if (e.in_ms && !e.in_hs)
      fail(tag + " is matched outside the small sample");
    ++deg[e.u];
    ++deg[e.v];
    if (e.in_hb) {
      ++hb[e.u];
      ++hb[e.v];
    }
    if (e.in_hs) {
      ++hs[e.u];
      ++hs[e.v];
    }
    if (e.in_ms) {
      ++ms[e.u];
      ++ms[e.v];
    }
  }
  if (live_seen != live_edges_) fail("live edge counter mismatch");

  for (NodeId v = 0; v < n; ++v) {
    const RNode& nd = rnodes_[v];
    const std::string tag = "node " + std::to_string(v);
    if (static_cast<int>(deg[v]) != static_cast<int>(nd.degree))
      fail(tag + " degree counter mismatch");
    if (hb[v] != nd.hb_degree) fail(tag + " big-sample degree counter mismatch");
    if (ms[v] != nd.ms_degree) fail(tag + " matched degree counter mismatch");
    if (static_cast<int>(nd.hs_adj.size()) != hs[v])
      fail(tag + " small-sample adjacency mismatch");
    if (!nd.big && hb[v] > nd.cap)
      fail(tag + " is small with big-sample degree above capacity");
    if (ms[v] > nd.cap) fail(tag + " matched degree exceeds capacity");
    if (nd.big && static_cast<double>(nd.degree) <= tau_ / 2.0)
      fail(tag + " is big below the demotion threshold");
    if (!nd.big && static_cast<double>(nd.degree) >= tau_)
      fail(tag + " is small at or above the promotion threshold");
    if (nd.big && nd.big_slot >= 0 &&
        big_order_[static_cast<std::size_t>(nd.big_slot)] != v)
      fail(tag + " slot table entry is stale");
    if (nd.big != (nd.big_slot >= 0)) fail(tag + " slot flag mismatch");
  }

  // greedy matching is maximal inside the small sample
  for (const REdge& e : redges_) {
    if (!e.live || !e.in_hs || e.in_ms) continue;
    if (rnodes_[e.u].ms_degree < rnodes_[e.u].cap &&
        rnodes_[e.v].ms_degree < rnodes_[e.v].cap)
      fail("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
           ") is free but both endpoints have matching capacity left");
  }

  // sampler trees carry exactly the live big-small weights
  for (NodeId v = 0; v < n; ++v) {
    const RNode& nd = rnodes_[v];
    if (nd.big) continue;
    const std::string tag = "node " + std::to_string(v);
    if (!nd.tree.check_consistency())
      fail(tag + " sampler tree sums are inconsistent");
    for (std::size_t slot = 0; slot < nd.tree.leaf_count(); ++slot) {
      double want = 0.0;
      const NodeId b = slot < big_order_.size() ? big_order_[slot] : v;
      if (b != v && rnodes_[b].big &&
          rnodes_[b].big_slot == static_cast<int>(slot)) {
        auto it = by_pair_.find(pair_key(std::min(v, b), std::max(v, b)));
        if (it != by_pair_.end()) want = redges_[it->second].w;
      }
      if (std::abs(nd.tree.leaf(slot) - want) > 1e-9)
        fail(tag + " sampler leaf " + std::to_string(slot) +
             " drifted from its edge weight");
    }
    // interval rule agrees with a fresh scan
    std::vector<std::size_t> fresh = scan_selection(v);
    if (fresh != nd.picks) {
      fail(tag + " cached selection disagrees with the interval rule");
      continue;
    }
    for (std::size_t slot : fresh) {
      const NodeId b = big_order_[slot];
      auto it = by_pair_.find(pair_key(std::min(v, b), std::max(v, b)));
      if (it == by_pair_.end() || !redges_[it->second].in_hb)
        fail(tag + " selected slot " + std::to_string(slot) +
             " is not reflected in the big sample");
    }
  }
  return r;
}

} // namespace dynoprimal
