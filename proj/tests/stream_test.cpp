#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "dynoprimal/runner.hpp"
#include "dynoprimal/stream.hpp"

using namespace dynoprimal;

namespace {

const char* kParallelPair =
    "mode hypergraph\n"
    "n 2\n"
    "params f=2 m=4 mu=1 eps=0.25\n"
    "+ e1 0 1\n"
    "+ e2 0 1\n"
    "- e2\n";

std::size_t error_line(const char* text) {
  try {
    parse_stream(text);
  } catch (const StreamParseError& e) {
    return e.line;
  }
  return 0;
}

// strips the elapsed_ns column so replay output can be compared byte for byte
std::string stable_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t cut = line.rfind(',');
    out << line.substr(0, cut) << "\n";
  }
  return out.str();
}

} // namespace

TEST_CASE("parses a parallel pair stream") {
  UpdateStream s = parse_stream(kParallelPair);
  CHECK(s.mode == StreamMode::hypergraph);
  CHECK(s.node_count == 2);
  CHECK(s.capacities == std::vector<double>{1.0, 1.0}); // default 1
  CHECK(s.frequency_cap == 2);
  CHECK(s.max_edges == 4);
  CHECK(s.multiplicity == 1.0);
  CHECK(s.epsilon == 0.25);
  REQUIRE(s.updates.size() == 3);
  CHECK(s.updates[0].insert);
  CHECK(s.updates[0].id == "e1");
  CHECK(s.updates[0].args == std::vector<std::string>{"0", "1"});
  CHECK(s.updates[0].line == 4);
  CHECK_FALSE(s.updates[2].insert);
  CHECK(s.updates[2].args.empty());
}

TEST_CASE("defaults fill in for sparse headers") {
  UpdateStream s = parse_stream("mode hypergraph\nn 3\ncap 1 2.5\n+ a 1\n");
  CHECK(s.capacities == std::vector<double>{1.0, 2.5, 1.0});
  CHECK(s.frequency_cap == 1);
  CHECK(s.epsilon == 0.25);
  CHECK(s.max_edges == 1); // defaults to the update count
}

TEST_CASE("bmatching headers force pairwise unit weights") {
  UpdateStream s = parse_stream(
      "mode bmatching\nn 3\ncap 0 2\nparams f=3 mu=7 eps=0.2 c=2.5 seed=9\n"
      "+ a 0 1\n");
  CHECK(s.frequency_cap == 2);
  CHECK(s.multiplicity == 1.0);
  CHECK(s.int_capacities == std::vector<int>{2, 1, 1});
  CHECK(s.sampling_c == 2.5);
  CHECK(s.seed == 9);

  // the mode needs eps < 1/4, so its header default is lower
  UpdateStream d = parse_stream("mode bmatching\nn 2\n+ a 0 1\n");
  CHECK(d.epsilon == 0.2);
  CHECK_THROWS_AS(parse_stream("mode bmatching\nn 2\nparams eps=0.25\n"),
                  StreamParseError);
  CHECK_THROWS_AS(parse_stream("mode bmatching\nn 2\nparams eps=0.3\n"),
                  StreamParseError);
}

TEST_CASE("every malformed line reports its number") {
  CHECK(error_line("+ e1 0 1\n") == 1); // updates before mode
  CHECK(error_line("mode nonsense\n") == 1);
  CHECK(error_line("mode hypergraph\nfrob 3\n") == 2);
  CHECK(error_line("mode hypergraph\nn 2\nmode hypergraph\n") == 3);
  CHECK(error_line("mode hypergraph\nn x\n") == 2);
  CHECK(error_line("mode hypergraph\nn 2\ncap 0\n") == 3);
  CHECK(error_line("mode hypergraph\nn 2\nparams f\n") == 3);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n+ e1\n") == 4);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n+ e1 0 1\n+ e1 0 1\n") ==
        5);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n- e9\n") == 4);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n+ e1 0 1\n- e1 3\n") ==
        5);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n+ e1 0 0\n") == 4);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2\n+ e1 0 5\n") == 4);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=1\n+ e1 0 1\n") == 4);
  CHECK(error_line("mode hypergraph\nn 2\nparams f=2 m=1\n+ a 0 1\n+ b 0 1\n") ==
        5);
  CHECK(error_line("mode setcover\nset A 1\n+ x B\n") == 3);
  CHECK(error_line("mode setcover\nset A 1\nset A 2\n") == 3);
  CHECK(error_line("mode setcover\nset A 1\n+ x A A\n") == 3);
  CHECK(error_line("mode bmatching\nn 3\n+ a 1 1\n") == 3);
  CHECK(error_line("mode bmatching\nn 3\n+ a 0 1\n+ b 1 0\n") == 4);
  CHECK(error_line("mode bmatching\nn 3\n+ a 0\n") == 3);

  // header problems surface once the whole file is read
  CHECK_THROWS_AS(parse_stream("mode setcover\n+ x A\n"), StreamParseError);
  CHECK_THROWS_AS(parse_stream("mode hypergraph\nparams f=2\n"),
                  StreamParseError);
  CHECK_THROWS_AS(parse_stream("mode bmatching\nn 2\ncap 0 1.5\n"),
                  StreamParseError);
  CHECK_THROWS_AS(parse_stream(""), StreamParseError);
  CHECK_THROWS_AS(parse_stream("# only a comment\n"), StreamParseError);
}

TEST_CASE("comments and blank lines are ignored") {
  UpdateStream s = parse_stream(
      "# capacity test\nmode hypergraph\n\nn 2   # two nodes\n"
      "params f=2 m=4\n+ e1 0 1   # first\n");
  CHECK(s.updates.size() == 1);
  CHECK(s.updates[0].line == 6);
}

TEST_CASE("missing stream files raise") {
  CHECK_THROWS_AS(load_stream("/nonexistent/p.stream"), std::runtime_error);
}

TEST_CASE("generated streams parse and round trip") {
  for (StreamMode mode :
       {StreamMode::hypergraph, StreamMode::setcover, StreamMode::bmatching}) {
    GenParams p;
    p.mode = mode;
    p.node_count = 12;
    p.update_count = 150;
    p.frequency_cap = 3;
    p.epsilon = 0.2;
    p.cap_min = 1;
    p.cap_max = 3;
    p.seed = 77;
    UpdateStream g = generate_stream(p);
    CHECK(g.updates.size() == 150);
    std::string text = format_stream(g);
    UpdateStream r = parse_stream(text);
    CHECK(format_stream(r) == text);
    CHECK(r.updates.size() == g.updates.size());

    UpdateStream g2 = generate_stream(p);
    CHECK(format_stream(g2) == text); // same params, same stream
  }
}

TEST_CASE("generator honors the sliding window") {
  GenParams p;
  p.mode = StreamMode::bmatching;
  p.node_count = 20;
  p.update_count = 300;
  p.window = 5;
  p.seed = 3;
  UpdateStream s = generate_stream(p);
  long live = 0, peak = 0;
  for (const StreamUpdate& up : s.updates) {
    live += up.insert ? 1 : -1;
    peak = std::max(peak, live);
    CHECK(live >= 0);
  }
  CHECK(peak == 5);
}

TEST_CASE("generator rejects bad parameters") {
  GenParams p;
  p.node_count = 0;
  CHECK_THROWS_AS(generate_stream(p), std::invalid_argument);
  p = GenParams{};
  p.cap_min = 2;
  p.cap_max = 1;
  CHECK_THROWS_AS(generate_stream(p), std::invalid_argument);
  p = GenParams{};
  p.delete_ratio = 1.5;
  CHECK_THROWS_AS(generate_stream(p), std::invalid_argument);
  p = GenParams{};
  p.mode = StreamMode::bmatching;
  p.epsilon = 0.25;
  CHECK_THROWS_AS(generate_stream(p), std::invalid_argument);
}

TEST_CASE("replaying the parallel pair reproduces the frozen trace") {
  UpdateStream s = parse_stream(kParallelPair);
  RunOptions opt;
  opt.verify = RunOptions::Verify::full;
  RunResult r = run_stream(s, opt);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.failures.empty());
  CHECK(r.updates == 3);
  CHECK(r.level_changes == 8);
  CHECK(r.dirty_iterations == 4);
  CHECK(r.budget == doctest::Approx(360.0).epsilon(1e-12));
  CHECK(r.primal == doctest::Approx(0.4096).epsilon(1e-12));
  CHECK(r.solution == doctest::Approx(0.4096).epsilon(1e-12));
  CHECK(r.dual == 2.0); // both nodes stay tight
}

TEST_CASE("per update metrics match the frozen table") {
  UpdateStream s = parse_stream(kParallelPair);
  RunOptions opt;
  opt.verify = RunOptions::Verify::invariants;
  std::ostringstream csv;
  opt.csv = &csv;
  RunResult r = run_stream(s, opt);
  REQUIRE(r.exit_code == exit_ok);
  CHECK(stable_csv(csv.str()) ==
        "update,op,level_changes,budget,dirty_iterations,primal,dual,"
        "solution,oracle\n"
        "1,+,0,120,0,1,3,1,\n"
        "2,+,8,240,4,0.8192,2,0.8192,\n"
        "3,-,8,360,4,0.4096,2,0.4096,\n");

  std::ostringstream again;
  opt.csv = &again;
  run_stream(s, opt);
  CHECK(stable_csv(again.str()) == stable_csv(csv.str()));
}

TEST_CASE("usage errors surface as exit codes") {
  UpdateStream s = parse_stream(kParallelPair);
  RunOptions opt;
  opt.oracle = true;
  RunResult r = run_stream(s, opt);
  CHECK(r.exit_code == exit_usage);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].find("no exact oracle") != std::string::npos);

  opt = RunOptions{};
  opt.trials = 10;
  r = run_stream(s, opt);
  CHECK(r.exit_code == exit_usage);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].find("--trials") != std::string::npos);
}

TEST_CASE("set cover replay with the exact oracle") {
  GenParams p;
  p.mode = StreamMode::setcover;
  p.node_count = 6;
  p.update_count = 120;
  p.frequency_cap = 2;
  p.cap_min = 1;
  p.cap_max = 4;
  p.seed = 41;
  UpdateStream s = generate_stream(p);
  RunOptions opt;
  opt.verify = RunOptions::Verify::full;
  opt.oracle = true;
  RunResult r = run_stream(s, opt);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.failures.empty());
  CHECK(r.updates == 120);
}

TEST_CASE("bmatching replay with oracle and resampling trials") {
  GenParams p;
  p.mode = StreamMode::bmatching;
  p.node_count = 24;
  p.update_count = 200;
  p.epsilon = 0.2;
  p.sampling_c = 1.5;
  p.cap_min = 1;
  p.cap_max = 3;
  p.seed = 6;
  UpdateStream s = generate_stream(p);
  RunOptions opt;
  opt.verify = RunOptions::Verify::full;
  opt.oracle = true;
  opt.trials = 30;
  std::ostringstream log;
  opt.log = &log;
  RunResult r = run_stream(s, opt);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.failures.empty());
  CHECK(log.str().find("trials=30") != std::string::npos);

  // rerunning the same stream is bit for bit identical
  RunResult r2 = run_stream(s, opt);
  CHECK(r2.solution == r.solution);
  CHECK(r2.level_changes == r.level_changes);
}

TEST_CASE("epsilon and seed overrides take effect") {
  UpdateStream s = parse_stream(kParallelPair);
  RunOptions opt;
  opt.override_epsilon = true;
  opt.epsilon = 0.5; // alpha 2.0, beta 1.5: settles at level 2 in two moves
  RunResult r = run_stream(s, opt);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.level_changes == 4);
  CHECK(r.primal == doctest::Approx(1.0 / 2.25).epsilon(1e-12));
}
