#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "fluctlim/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fluctuation-limit experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  bool force = false;
  int threads = 1;
  std::uint64_t seed = 1;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "path to a JSON experiment config")
      ->required();
  run->add_option("--output", output_dir,
                  "output directory (overrides the config)");
  run->add_flag("--force", force, "allow writing into a non-empty directory");
  run->add_option("--threads", threads,
                  "worker threads, 0 = hardware concurrency");
  run->add_option("--seed", seed, "seed for randomized experiment states");

  CLI11_PARSE(app, argc, argv);

  if (threads < 0) {
    std::cerr << "error: --threads must be >= 0\n";
    return 1;
  }
  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw > 0 ? static_cast<int>(hw) : 1;
  }

  fluctlim::RunOptions options;
  options.output = output_dir;
  options.force = force;
  options.threads = threads;
  options.seed = seed;
  return fluctlim::run_experiment(config_path, options, std::cout, std::cerr);
}
