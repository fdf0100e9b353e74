#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dynoprimal/runner.hpp"
#include "dynoprimal/stream.hpp"

namespace {

struct RunArgs {
  std::string mode;
  std::string stream_path;
  std::string verify = "invariants";
  std::size_t verify_every = 1;
  bool oracle = false;
  std::size_t trials = 0;
  double epsilon = -1.0;
  std::int64_t seed = -1;
  std::string metrics_out;
};

struct GenArgs {
  std::string mode = "hypergraph";
  std::string out;
  dynoprimal::GenParams params;
};

int do_run(const RunArgs& a) {
  using namespace dynoprimal;
  UpdateStream stream;
  try {
    stream = load_stream(a.stream_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  StreamMode want;
  try {
    want = stream_mode_from(a.mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  if (want != stream.mode) {
    std::cerr << "error: stream declares mode " << to_string(stream.mode)
              << ", requested " << a.mode << "\n";
    return exit_usage;
  }

  RunOptions opt;
  if (a.verify == "none") {
    opt.verify = RunOptions::Verify::none;
  } else if (a.verify == "invariants") {
    opt.verify = RunOptions::Verify::invariants;
  } else if (a.verify == "full") {
    opt.verify = RunOptions::Verify::full;
  } else {
    std::cerr << "error: unknown verify level '" << a.verify << "'\n";
    return exit_usage;
  }
  opt.verify_every = a.verify_every == 0 ? 1 : a.verify_every;
  opt.oracle = a.oracle;
  opt.trials = a.trials;
  if (a.epsilon >= 0.0) {
    opt.override_epsilon = true;
    opt.epsilon = a.epsilon;
  }
  if (a.seed >= 0) {
    opt.override_seed = true;
    opt.seed = static_cast<std::uint64_t>(a.seed);
  }
  std::ofstream csv;
  if (!a.metrics_out.empty()) {
    csv.open(a.metrics_out);
    if (!csv) {
      std::cerr << "error: cannot open " << a.metrics_out << "\n";
      return exit_usage;
    }
    opt.csv = &csv;
  }
  opt.log = &std::cerr;

  RunResult res;
  try {
    res = run_stream(stream, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }

  std::printf("updates=%zu level_changes=%llu budget=%.12g dirty=%llu\n",
              res.updates, static_cast<unsigned long long>(res.level_changes),
              res.budget, static_cast<unsigned long long>(res.dirty_iterations));
  std::printf("primal=%.12g dual=%.12g solution=%.12g\n", res.primal, res.dual,
              res.solution);
  std::printf("status=%d failures=%zu\n", res.exit_code, res.failures.size());
  return res.exit_code;
}

int do_gen(const GenArgs& a) {
  using namespace dynoprimal;
  GenParams p = a.params;
  try {
    p.mode = stream_mode_from(a.mode);
    UpdateStream s = generate_stream(p);
    std::string text = format_stream(s);
    if (a.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(a.out);
      if (!f) {
        std::cerr << "error: cannot open " << a.out << "\n";
        return exit_usage;
      }
      f << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic primal-dual matching and covering"};
  app.require_subcommand(1);

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "replay an update stream");
  run->add_option("--mode", ra.mode, "hypergraph, setcover, or bmatching")
      ->required();
  run->add_option("--stream", ra.stream_path, "update stream file")->required();
  run->add_option("--verify", ra.verify, "none, invariants, or full")
      ->capture_default_str();
  run->add_option("--verify-every", ra.verify_every,
                  "audit every K-th update")
      ->capture_default_str();
  run->add_flag("--oracle", ra.oracle, "compare against the exact optimum");
  run->add_option("--trials", ra.trials,
                  "bmatching: resampling rounds after the replay");
  run->add_option("--epsilon", ra.epsilon, "override the stream epsilon");
  run->add_option("--seed", ra.seed, "override the stream seed");
  run->add_option("--metrics-out", ra.metrics_out, "per-update CSV file");

  GenArgs ga;
  CLI::App* gen = app.add_subcommand("gen", "generate a random update stream");
  gen->add_option("--mode", ga.mode, "hypergraph, setcover, or bmatching")
      ->capture_default_str();
  gen->add_option("--nodes", ga.params.node_count, "nodes (sets for setcover)")
      ->capture_default_str();
  gen->add_option("--updates", ga.params.update_count, "stream length")
      ->capture_default_str();
  gen->add_option("--frequency-cap", ga.params.frequency_cap,
                  "max endpoints per edge")
      ->capture_default_str();
  gen->add_option("--multiplicity", ga.params.multiplicity, "weight scale mu")
      ->capture_default_str();
  gen->add_option("--epsilon", ga.params.epsilon, "accuracy parameter")
      ->capture_default_str();
  gen->add_option("--sampling-c", ga.params.sampling_c,
                  "bmatching oversampling constant")
      ->capture_default_str();
  gen->add_option("--delete-ratio", ga.params.delete_ratio,
                  "chance an update deletes")
      ->capture_default_str();
  gen->add_option("--window", ga.params.window,
                  "delete oldest once this many edges are live");
  gen->add_option("--cap-min", ga.params.cap_min, "capacity range low")
      ->capture_default_str();
  gen->add_option("--cap-max", ga.params.cap_max, "capacity range high")
      ->capture_default_str();
  gen->add_option("--max-edges", ga.params.max_edges,
                  "live edge budget m (0: derived)");
  gen->add_option("--seed", ga.params.seed, "generator seed")
      ->capture_default_str();
  gen->add_option("--out", ga.out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return do_run(ra);
  return do_gen(ga);
}
