#include "dynoprimal/setcover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dynoprimal {

namespace {

PartitionEngine build_engine(const SetCoverConfig& cfg) {
  if (cfg.set_costs.empty())
    throw std::invalid_argument("set cover needs at least one set");
  double cmax = 0.0;
  for (double c : cfg.set_costs) {
    if (!(c > 0.0)) throw std::invalid_argument("set costs must be positive");
    cmax = std::max(cmax, c);
  }
  Config ec;
  ec.frequency_cap = cfg.frequency_cap;
  ec.max_live_edges = cfg.max_elements;
  ec.multiplicity = cmax + 1.0; // forces every element above level 0
  ec.epsilon = cfg.epsilon;
  return PartitionEngine(ec, cfg.set_costs);
}

} // namespace

SetCoverState::SetCoverState(SetCoverConfig cfg) : engine_(build_engine(cfg)) {
  lambda_ = engine_.config().frequency_cap * engine_.alpha() * engine_.beta();
  in_cover_.assign(engine_.node_count(), 0);
  engine_.set_event_recording(true);
}

bool SetCoverState::in_cover(NodeId set) const {
  if (set >= in_cover_.size()) throw std::out_of_range("set index out of range");
  return in_cover_[set] != 0;
}

std::vector<NodeId> SetCoverState::current_cover() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < in_cover_.size(); ++v)
    if (in_cover_[v]) out.push_back(v);
  return out;
}

std::vector<std::uint64_t> SetCoverState::live_elements() const {
  std::vector<std::uint64_t> out;
  out.reserve(elements_.size());
  for (const auto& [element, edge] : elements_) out.push_back(element);
  std::sort(out.begin(), out.end());
  return out;
}

std::span<const NodeId> SetCoverState::element_sets(std::uint64_t element) const {
  auto it = elements_.find(element);
  if (it == elements_.end())
    throw std::out_of_range("element is not live");
  return engine_.edge_endpoints(it->second);
}

void SetCoverState::refresh_set(NodeId v) {
  const bool want = engine_.node_weight(v) >= engine_.capacity(v) / lambda_;
  if (want == static_cast<bool>(in_cover_[v])) return;
  in_cover_[v] = want ? 1 : 0;
  cover_cost_ += want ? engine_.capacity(v) : -engine_.capacity(v);
}

void SetCoverState::refresh_from_events() {
  auto events = engine_.drain_events();
  std::vector<NodeId> touched;
  for (const EdgeEvent& ev : events)
    touched.insert(touched.end(), ev.endpoints.begin(), ev.endpoints.end());
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (NodeId v : touched) refresh_set(v);
}

void SetCoverState::insert_element(std::uint64_t element,
                                   std::vector<NodeId> sets) {
  if (elements_.count(element))
    throw std::invalid_argument("element is already live");
  EdgeId id = engine_.insert_edge(std::move(sets));
  elements_.emplace(element, id);
  refresh_from_events();
}

void SetCoverState::delete_element(std::uint64_t element) {
  auto it = elements_.find(element);
  if (it == elements_.end())
    throw std::out_of_range("element is not live");
  engine_.delete_edge(it->second);
  elements_.erase(it);
  refresh_from_events();
}

AuditReport SetCoverState::verify_cover() const {
  std::vector<char> flag(in_cover_.begin(), in_cover_.end());
  std::vector<NodeId> cover;
  for (NodeId v = 0; v < flag.size(); ++v)
    if (flag[v]) cover.push_back(v);
  return verify_cover(cover);
}

AuditReport SetCoverState::verify_cover(std::span<const NodeId> candidate) const {
  std::vector<char> flag(engine_.node_count(), 0);
  for (NodeId v : candidate) {
    if (v >= flag.size()) throw std::out_of_range("set index out of range");
    flag[v] = 1;
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(elements_.size());
  for (const auto& [element, edge] : elements_) keys.push_back(element);
  std::sort(keys.begin(), keys.end());

  AuditReport r;
  for (std::uint64_t element : keys) {
    bool covered = false;
    for (NodeId v : engine_.edge_endpoints(elements_.at(element)))
      if (flag[v]) {
        covered = true;
        break;
      }
    if (!covered) {
      std::ostringstream os;
      os << "element " << element << " has no member set in the cover";
      r.violations.push_back(os.str());
    }
  }
  return r;
}

AuditReport SetCoverState::verify_thresholds() const {
  AuditReport r;
  std::vector<double> exact(engine_.node_count(), 0.0);
  for (EdgeId e : engine_.live_edges()) {
    const double w = engine_.edge_weight(e);
    for (NodeId v : engine_.edge_endpoints(e)) exact[v] += w;
  }
  for (NodeId v = 0; v < engine_.node_count(); ++v) {
    const double thr = engine_.capacity(v) / lambda_;
    const double tol = 1e-9 * std::max(1.0, thr);
    if (std::abs(exact[v] - thr) <= tol) continue; // boundary, either way
    const bool want = exact[v] >= thr;
    if (want != static_cast<bool>(in_cover_[v])) {
      std::ostringstream os;
      os << "set " << v << " flag " << (in_cover_[v] ? 1 : 0)
         << " disagrees with weight " << exact[v] << " vs threshold " << thr;
      r.violations.push_back(os.str());
    }
  }
  return r;
}

void SetCoverState::corrupt_cover_for_test(NodeId set) {
  if (set >= in_cover_.size()) throw std::out_of_range("set index out of range");
  if (in_cover_[set]) {
    in_cover_[set] = 0;
    cover_cost_ -= engine_.capacity(set);
  }
}

} // namespace dynoprimal
