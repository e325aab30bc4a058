#pragma once

// Command-line front end for the experiment runners.  A small registry maps
// experiment names to tuned default parameters; callers override them with a
// key=value config file and/or explicit flags (flags win over the config
// file, which wins over the registry).  The binary in tools/ only parses
// argv and forwards to run(), so everything here is testable in-process.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pshlab/experiments.hpp"
#include "pshlab/report.hpp"

namespace pshlab::cli {

// User-facing knobs; unset fields fall back to the config file and then to
// the registry defaults for the chosen experiment.
struct RunConfig {
  std::string experiment;
  std::optional<int> base_cells;   // --M
  std::optional<int> fiber_cells;  // --K
  std::optional<int> big_n;        // --N
  std::optional<int> dim;          // --n
  std::optional<double> eps;
  std::optional<double> a0;
  std::optional<std::vector<double>> a_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct RegistryEntry {
  std::string name;
  std::string summary;
  experiments::RunParams params;
};

// All runnable experiments with their tuned defaults.
std::span<const RegistryEntry> registry();

// Parses a key=value file ('#' starts a comment; blank lines are skipped).
// Recognized keys: experiment, M, K, N, n, eps, a0, a-list, seed, out.
// The a-list value is a comma-separated list of positive steps.
// Throws std::invalid_argument on unknown keys or unparseable values.
RunConfig load_config_file(const std::string& path);

// Overlays `higher` on top of `lower`: set fields of `higher` win.
RunConfig merge(const RunConfig& lower, const RunConfig& higher);

// Resolves the final parameters for cfg.experiment.
// Throws std::invalid_argument if the experiment is not in the registry.
experiments::RunParams resolve(const RunConfig& cfg);

// Runs the named experiment with resolved parameters.
report::ExperimentReport dispatch(const std::string& name, const experiments::RunParams& params);

// One line per registry entry: name, defaults, summary.
void list_experiments(std::ostream& os);

// Full pipeline: resolve, run, print rows, write CSV report + summary.
// Returns 0 when every expectation holds, 1 when one fails, and 2 on
// invalid usage (unknown experiment or malformed values; the registry is
// printed to `err` in that case).
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace pshlab::cli
