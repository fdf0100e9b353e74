#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dynoprimal/stream.hpp"

namespace dynoprimal {

// Exit codes double as a severity scale; a run reports the strongest
// violation it saw.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,      // parse/config/io failures
  exit_statistics = 2, // resampling frequencies outside the band
  exit_quality = 3,    // approximation or duality bound breached
  exit_validity = 4,   // structural audit failed (cover, rounding, lists)
  exit_invariant = 5,  // weight band, counter budget, or bank violation
};

struct RunOptions {
  enum class Verify { none, invariants, full };
  Verify verify = Verify::invariants;
  std::size_t verify_every = 1;
  bool oracle = false;    // exact optimum at every checkpoint
  std::size_t trials = 0; // bmatching: resampling rounds after the replay
  bool override_seed = false;
  std::uint64_t seed = 0;
  bool override_epsilon = false;
  double epsilon = 0.0;
  std::ostream* csv = nullptr;
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = exit_ok;
  std::size_t updates = 0;
  std::uint64_t level_changes = 0;
  double budget = 0.0;
  std::uint64_t dirty_iterations = 0;
  double primal = 0.0;
  double dual = 0.0;
  double solution = 0.0; // primal, cover cost, or matching size
  std::vector<std::string> failures;
};

RunResult run_stream(const UpdateStream& stream, const RunOptions& opt);

} // namespace dynoprimal
