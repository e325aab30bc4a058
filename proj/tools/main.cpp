#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pshlab/cli.hpp"

namespace cli = pshlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for lifted quasi-psh potentials"};
  app.require_subcommand(1);

  CLI::App* list = app.add_subcommand("list", "print the experiment registry");

  CLI::App* run = app.add_subcommand("run", "run one experiment and write a CSV report");
  std::string config_path;
  cli::RunConfig flags;
  std::vector<double> a_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  run->add_option("experiment,--experiment", flags.experiment, "experiment to run");
  run->add_option("-M,--M", flags.base_cells, "lattice points per base axis");
  run->add_option("-K,--K", flags.fiber_cells, "fiber cells per axis");
  run->add_option("-N,--N", flags.big_n, "fiber dimension / order cap");
  run->add_option("-n,--n", flags.dim, "complex base dimension");
  run->add_option("--eps", flags.eps, "fixture amplitude");
  run->add_option("--a0", flags.a0, "step for one-sided derivatives");
  run->add_option("--a-list", a_list, "comma-separated derivative steps")->delimiter(',');
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--out", out_dir, "report output directory (default: reports)");
  run->add_option("--config", config_path, "key=value config file");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    cli::list_experiments(std::cout);
    return 0;
  }

  if (!a_list.empty()) flags.a_list = a_list;
  if (seed) flags.seed = seed;
  if (out_dir) flags.out_dir = out_dir;

  cli::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = cli::load_config_file(config_path);
    cfg = cli::merge(cfg, flags);
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return cli::run(cfg, std::cout, std::cerr);
}
