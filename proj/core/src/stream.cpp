#include "dynoprimal/stream.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dynoprimal {

std::string to_string(StreamMode mode) {
  switch (mode) {
    case StreamMode::hypergraph: return "hypergraph";
    case StreamMode::setcover: return "setcover";
    case StreamMode::bmatching: return "bmatching";
  }
  return "?";
}

StreamMode stream_mode_from(const std::string& name) {
  if (name == "hypergraph") return StreamMode::hypergraph;
  if (name == "setcover") return StreamMode::setcover;
  if (name == "bmatching") return StreamMode::bmatching;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw StreamParseError(line, "expected a number, got '" + tok + "'");
  }
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw StreamParseError(line, "expected a nonnegative integer, got '" + tok + "'");
  return v;
}

struct ParamBag {
  std::unordered_map<std::string, std::string> kv;
  std::size_t line = 0;

  bool has(const std::string& k) const { return kv.count(k) != 0; }
  double num(const std::string& k, double fallback) const {
    auto it = kv.find(k);
    return it == kv.end() ? fallback : parse_double(it->second, line);
  }
  std::uint64_t uint(const std::string& k, std::uint64_t fallback) const {
    auto it = kv.find(k);
    return it == kv.end() ? fallback : parse_u64(it->second, line);
  }
};

// replay bookkeeping that mirrors what the engines will enforce
void validate_updates(UpdateStream& s) {
  std::unordered_map<std::string, std::size_t> set_index;
  for (std::size_t i = 0; i < s.set_names.size(); ++i)
    set_index[s.set_names[i]] = i;

  std::unordered_set<std::string> live;        // edge / element ids
  std::unordered_set<std::uint64_t> live_pairs; // bmatching
  std::unordered_map<std::string, std::uint64_t> pair_of;
  std::size_t budget = s.max_edges;
  if (s.mode == StreamMode::bmatching && budget == 0)
    budget = s.node_count * s.node_count;

  for (StreamUpdate& up : s.updates) {
    if (!up.insert) {
      if (!live.erase(up.id))
        throw StreamParseError(up.line, "'" + up.id + "' is not live");
      if (s.mode == StreamMode::bmatching) {
        live_pairs.erase(pair_of[up.id]);
        pair_of.erase(up.id);
      }
      continue;
    }
    if (live.count(up.id))
      throw StreamParseError(up.line, "'" + up.id + "' is already live");
    if (live.size() >= budget)
      throw StreamParseError(up.line, "live count would exceed the edge budget");
    switch (s.mode) {
      case StreamMode::hypergraph: {
        if (up.args.empty())
          throw StreamParseError(up.line, "edge needs at least one endpoint");
        if (up.args.size() > static_cast<std::size_t>(s.frequency_cap))
          throw StreamParseError(up.line, "edge exceeds frequency cap f");
        std::set<std::uint64_t> seen;
        for (const std::string& a : up.args) {
          std::uint64_t v = parse_u64(a, up.line);
          if (v >= s.node_count)
            throw StreamParseError(up.line, "node " + a + " is out of range");
          if (!seen.insert(v).second)
            throw StreamParseError(up.line, "duplicate endpoint " + a);
        }
        break;
      }
      case StreamMode::setcover: {
        if (up.args.empty())
          throw StreamParseError(up.line, "element needs at least one set");
        if (up.args.size() > static_cast<std::size_t>(s.frequency_cap))
          throw StreamParseError(up.line, "element exceeds frequency cap f");
        std::set<std::string> seen;
        for (const std::string& a : up.args) {
          if (!set_index.count(a))
            throw StreamParseError(up.line, "unknown set '" + a + "'");
          if (!seen.insert(a).second)
            throw StreamParseError(up.line, "duplicate set '" + a + "'");
        }
        break;
      }
      case StreamMode::bmatching: {
        if (up.args.size() != 2)
          throw StreamParseError(up.line, "edge needs exactly two endpoints");
        std::uint64_t u = parse_u64(up.args[0], up.line);
        std::uint64_t v = parse_u64(up.args[1], up.line);
        if (u >= s.node_count || v >= s.node_count)
          throw StreamParseError(up.line, "node out of range");
        if (u == v) throw StreamParseError(up.line, "self loops are not allowed");
        std::uint64_t key = (std::min(u, v) << 32) | std::max(u, v);
        if (!live_pairs.insert(key).second)
          throw StreamParseError(up.line, "pair is already live");
        pair_of[up.id] = key;
        break;
      }
    }
    live.insert(up.id);
  }
}

} // namespace

UpdateStream parse_stream(std::string_view text) {
  UpdateStream s;
  bool mode_seen = false, n_seen = false;
  ParamBag params;
  std::vector<std::pair<std::uint64_t, double>> caps; // node, value
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    auto tok = tokenize(raw);
    if (tok.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const std::string& head = tok[0];
    if (head == "+" || head == "-") {
      if (!mode_seen) throw StreamParseError(line_no, "updates before 'mode'");
      if (tok.size() < 2)
        throw StreamParseError(line_no, "update line needs an id");
      StreamUpdate up;
      up.insert = (head == "+");
      up.id = tok[1];
      up.args.assign(tok.begin() + 2, tok.end());
      up.line = line_no;
      if (!up.insert && !up.args.empty())
        throw StreamParseError(line_no, "delete takes only an id");
      s.updates.push_back(std::move(up));
    } else if (head == "mode") {
      if (tok.size() != 2) throw StreamParseError(line_no, "mode needs a value");
      if (mode_seen) throw StreamParseError(line_no, "duplicate mode line");
      try {
        s.mode = stream_mode_from(tok[1]);
      } catch (const std::invalid_argument& e) {
        throw StreamParseError(line_no, e.what());
      }
      mode_seen = true;
    } else if (head == "n") {
      if (tok.size() != 2) throw StreamParseError(line_no, "n needs a value");
      s.node_count = parse_u64(tok[1], line_no);
      n_seen = true;
    } else if (head == "cap") {
      if (tok.size() != 3)
        throw StreamParseError(line_no, "cap needs a node and a value");
      caps.emplace_back(parse_u64(tok[1], line_no), parse_double(tok[2], line_no));
    } else if (head == "set") {
      if (tok.size() != 3)
        throw StreamParseError(line_no, "set needs a name and a cost");
      for (const std::string& nm : s.set_names)
        if (nm == tok[1])
          throw StreamParseError(line_no, "duplicate set '" + tok[1] + "'");
      s.set_names.push_back(tok[1]);
      s.set_costs.push_back(parse_double(tok[2], line_no));
    } else if (head == "params") {
      params.line = line_no;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        std::size_t eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0)
          throw StreamParseError(line_no, "params entries look like key=value");
        params.kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
      }
    } else {
      throw StreamParseError(line_no, "unknown directive '" + head + "'");
    }
    if (pos > text.size()) break;
  }

  if (!mode_seen) throw StreamParseError(line_no, "missing 'mode' line");

  s.epsilon = params.num(
      "eps", s.mode == StreamMode::bmatching ? 0.2 : 0.25);
  s.frequency_cap = static_cast<int>(params.uint("f", 1));
  s.multiplicity = params.num("mu", 1.0);
  s.max_edges = params.uint("m", 0);
  s.sampling_c = params.num("c", 4.0);
  s.seed = params.uint("seed", 0);

  switch (s.mode) {
    case StreamMode::hypergraph: {
      if (!n_seen) throw StreamParseError(params.line, "hypergraph needs 'n'");
      if (s.node_count == 0)
        throw StreamParseError(params.line, "n must be positive");
      s.capacities.assign(s.node_count, 1.0);
      for (auto [v, c] : caps) {
        if (v >= s.node_count)
          throw StreamParseError(params.line, "cap node out of range");
        s.capacities[v] = c;
      }
      if (s.max_edges == 0) s.max_edges = std::max<std::size_t>(s.updates.size(), 1);
      break;
    }
    case StreamMode::setcover: {
      if (s.set_names.empty())
        throw StreamParseError(params.line, "setcover needs 'set' lines");
      if (s.max_edges == 0) s.max_edges = std::max<std::size_t>(s.updates.size(), 1);
      break;
    }
    case StreamMode::bmatching: {
      if (!n_seen) throw StreamParseError(params.line, "bmatching needs 'n'");
      if (s.node_count == 0)
        throw StreamParseError(params.line, "n must be positive");
      s.int_capacities.assign(s.node_count, 1);
      for (auto [v, c] : caps) {
        if (v >= s.node_count)
          throw StreamParseError(params.line, "cap node out of range");
        double ip = 0.0;
        if (std::modf(c, &ip) != 0.0)
          throw StreamParseError(params.line, "bmatching capacities are integers");
        s.int_capacities[v] = static_cast<int>(c);
      }
      if (s.epsilon <= 0.0 || s.epsilon >= 0.25)
        throw StreamParseError(params.line, "bmatching needs eps in (0, 1/4)");
      s.frequency_cap = 2;
      s.multiplicity = 1.0;
      break;
    }
  }
  validate_updates(s);
  return s;
}

UpdateStream load_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stream(buf.str());
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string format_stream(const UpdateStream& s) {
  std::ostringstream os;
  os << "mode " << to_string(s.mode) << "\n";
  switch (s.mode) {
    case StreamMode::hypergraph:
      os << "n " << s.node_count << "\n";
      for (std::size_t v = 0; v < s.capacities.size(); ++v)
        os << "cap " << v << " " << fmt_num(s.capacities[v]) << "\n";
      os << "params f=" << s.frequency_cap << " m=" << s.max_edges
         << " mu=" << fmt_num(s.multiplicity) << " eps=" << fmt_num(s.epsilon)
         << "\n";
      break;
    case StreamMode::setcover:
      for (std::size_t i = 0; i < s.set_names.size(); ++i)
        os << "set " << s.set_names[i] << " " << fmt_num(s.set_costs[i]) << "\n";
      os << "params f=" << s.frequency_cap << " m=" << s.max_edges
         << " eps=" << fmt_num(s.epsilon) << "\n";
      break;
    case StreamMode::bmatching:
      os << "n " << s.node_count << "\n";
      for (std::size_t v = 0; v < s.int_capacities.size(); ++v)
        os << "cap " << v << " " << s.int_capacities[v] << "\n";
      os << "params eps=" << fmt_num(s.epsilon) << " c=" << fmt_num(s.sampling_c)
         << " seed=" << s.seed;
      if (s.max_edges) os << " m=" << s.max_edges;
      os << "\n";
      break;
  }
  for (const StreamUpdate& up : s.updates) {
    os << (up.insert ? "+" : "-") << " " << up.id;
    for (const std::string& a : up.args) os << " " << a;
    os << "\n";
  }
  return os.str();
}

UpdateStream generate_stream(const GenParams& p) {
  if (p.node_count == 0) throw std::invalid_argument("node count must be positive");
  if (p.cap_min < 1 || p.cap_max < p.cap_min)
    throw std::invalid_argument("capacity range is empty");
  if (!(p.delete_ratio >= 0.0) || p.delete_ratio > 1.0)
    throw std::invalid_argument("delete ratio must lie in [0,1]");
  if (p.mode == StreamMode::bmatching &&
      (p.epsilon <= 0.0 || p.epsilon >= 0.25))
    throw std::invalid_argument("bmatching needs epsilon in (0, 1/4)");

  std::mt19937_64 rng(p.seed);
  auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto below = [&rng](std::uint64_t n) { return rng() % n; };

  UpdateStream s;
  s.mode = p.mode;
  s.frequency_cap = p.frequency_cap;
  s.multiplicity = p.multiplicity;
  s.epsilon = p.epsilon;
  s.sampling_c = p.sampling_c;
  s.seed = p.seed;
  s.max_edges = p.max_edges ? p.max_edges : p.update_count + 1;

  if (p.mode == StreamMode::setcover) {
    for (std::size_t i = 0; i < p.node_count; ++i) {
      s.set_names.push_back("S" + std::to_string(i));
      s.set_costs.push_back(static_cast<double>(
          p.cap_min + static_cast<int>(below(p.cap_max - p.cap_min + 1))));
    }
  } else {
    s.node_count = p.node_count;
    for (std::size_t v = 0; v < p.node_count; ++v) {
      int c = p.cap_min + static_cast<int>(below(p.cap_max - p.cap_min + 1));
      s.capacities.push_back(static_cast<double>(c));
      s.int_capacities.push_back(c);
    }
  }

  std::vector<std::string> live;           // ids, insertion order
  std::unordered_set<std::uint64_t> pairs; // bmatching
  std::unordered_map<std::string, std::uint64_t> pair_of;
  std::size_t next_id = 0;

  for (std::size_t step = 0; step < p.update_count; ++step) {
    bool del = false;
    if (!live.empty()) {
      if (p.window > 0)
        del = live.size() >= p.window;
      else
        del = u01() < p.delete_ratio;
      if (live.size() >= s.max_edges) del = true;
    }
    StreamUpdate up;
    up.line = 0;
    if (del) {
      std::size_t pick = p.window > 0 ? 0 : below(live.size());
      up.insert = false;
      up.id = live[pick];
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
      if (p.mode == StreamMode::bmatching) {
        pairs.erase(pair_of[up.id]);
        pair_of.erase(up.id);
      }
    } else {
      up.insert = true;
      up.id = "e" + std::to_string(next_id++);
      switch (p.mode) {
        case StreamMode::hypergraph: {
          std::size_t k =
              1 + below(static_cast<std::uint64_t>(p.frequency_cap));
          k = std::min(k, p.node_count);
          std::set<std::uint64_t> chosen;
          while (chosen.size() < k) chosen.insert(below(p.node_count));
          for (std::uint64_t v : chosen) up.args.push_back(std::to_string(v));
          break;
        }
        case StreamMode::setcover: {
          std::size_t k =
              1 + below(static_cast<std::uint64_t>(p.frequency_cap));
          k = std::min(k, p.node_count);
          std::set<std::uint64_t> chosen;
          while (chosen.size() < k) chosen.insert(below(p.node_count));
          for (std::uint64_t i : chosen) up.args.push_back(s.set_names[i]);
          break;
        }
        case StreamMode::bmatching: {
          if (pairs.size() >= p.node_count * (p.node_count - 1) / 2) {
            up.insert = false; // graph is complete; fall back to a delete
            up.id = live[below(live.size())];
            break;
          }
          std::uint64_t u = 0, v = 0, key = 0;
          do {
            u = below(p.node_count);
            v = below(p.node_count);
            key = (std::min(u, v) << 32) | std::max(u, v);
          } while (u == v || pairs.count(key));
          pairs.insert(key);
          pair_of[up.id] = key;
          up.args.push_back(std::to_string(std::min(u, v)));
          up.args.push_back(std::to_string(std::max(u, v)));
          break;
        }
      }
      if (up.insert) live.push_back(up.id);
      else {
        auto it = std::find(live.begin(), live.end(), up.id);
        if (it != live.end()) live.erase(it);
        if (p.mode == StreamMode::bmatching) {
          pairs.erase(pair_of[up.id]);
          pair_of.erase(up.id);
        }
      }
    }
    s.updates.push_back(std::move(up));
  }
  // assign real line numbers as they would parse back
  std::size_t header_lines = 2; // mode + params
  if (p.mode == StreamMode::setcover)
    header_lines += s.set_names.size();
  else
    header_lines += 1 + s.capacities.size(); // n + caps
  for (std::size_t i = 0; i < s.updates.size(); ++i)
    s.updates[i].line = header_lines + 1 + i;
  return s;
}

} // namespace dynoprimal
