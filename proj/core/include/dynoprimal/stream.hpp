#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dynoprimal {

enum class StreamMode { hypergraph, setcover, bmatching };

std::string to_string(StreamMode mode);
StreamMode stream_mode_from(const std::string& name);

struct StreamParseError : std::runtime_error {
  StreamParseError(std::size_t line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
  std::size_t line;
};

// One `+`/`-` line. For hypergraph and bmatching `id` names the edge and
// args hold node indices; for setcover `id` names the element and args hold
// set names.
struct StreamUpdate {
  bool insert = false;
  std::string id;
  std::vector<std::string> args;
  std::size_t line = 0;
};

struct UpdateStream {
  StreamMode mode = StreamMode::hypergraph;
  std::size_t node_count = 0;            // hypergraph, bmatching
  std::vector<double> capacities;        // hypergraph
  std::vector<int> int_capacities;       // bmatching
  std::vector<std::string> set_names;    // setcover, declaration order
  std::vector<double> set_costs;         // setcover
  int frequency_cap = 1;                 // hypergraph, setcover
  std::size_t max_edges = 0;             // m; bmatching 0 means n*n
  double multiplicity = 1.0;             // hypergraph
  double epsilon = 0.25;
  double sampling_c = 4.0;               // bmatching
  std::uint64_t seed = 0;                // bmatching
  std::vector<StreamUpdate> updates;
};

// Text layout: header lines (`mode`, `n`, `cap`, `set`, `params`), then one
// update per line. `#` starts a comment. Every malformed line, unknown id,
// duplicate insert, or budget breach raises StreamParseError with its line.
UpdateStream parse_stream(std::string_view text);
UpdateStream load_stream(const std::string& path);
std::string format_stream(const UpdateStream& s);

struct GenParams {
  StreamMode mode = StreamMode::hypergraph;
  std::size_t node_count = 100;  // sets for setcover
  std::size_t update_count = 1000;
  int frequency_cap = 2;
  double multiplicity = 1.0;
  double epsilon = 0.2; // bmatching requires < 1/4
  double sampling_c = 4.0;
  double delete_ratio = 0.5;   // chance an update deletes, given any live
  std::size_t window = 0;      // >0: delete oldest once this many are live
  int cap_min = 1;
  int cap_max = 1;
  std::size_t max_edges = 0;   // 0: derived
  std::uint64_t seed = 0;
};

UpdateStream generate_stream(const GenParams& p);

} // namespace dynoprimal
