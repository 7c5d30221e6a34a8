// bcmac — blind cognitive MAC protocol simulator.
//
//   bcmac run <config>                 run a scenario file, write the curve CSV
//   bcmac preset <fig2..fig5> [...]    run a built-in experiment configuration
//   bcmac bounds <config>              print the analytic benchmarks only
//
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bcmac/config.hpp"
#include "bcmac/experiment.hpp"

namespace {

int run_config(bcmac::ScenarioConfig cfg) {
  const bcmac::ExperimentResult result = bcmac::run_experiment(cfg);
  std::cout << "wrote " << result.csv_path << "\n" << result.summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind cognitive MAC protocol simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string figure;
  double scale = 1.0;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_path;
  int threads = -1;
  bool full_curves = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario config file");
  run->add_option("config", config_path, "scenario file")->required();
  run->add_option("--out", out_path, "override the output path");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");
  run->add_flag("--full", full_curves, "record every slot instead of subsampling");

  CLI::App* pre = app.add_subcommand("preset", "run a built-in experiment");
  pre->add_option("figure", figure, "one of fig2, fig3, fig4, fig5")->required();
  pre->add_option("--scale", scale, "run-count scale in (0,1]; runs = ceil(1000*scale)");
  pre->add_option("--seed", seed, "base seed")->each([&](const std::string&) {
    seed_given = true;
  });
  pre->add_option("--out", out_path, "override the output path");
  pre->add_option("--threads", threads, "worker threads (0 = hardware)");
  pre->add_flag("--full", full_curves, "record every slot instead of subsampling");

  CLI::App* bounds = app.add_subcommand("bounds", "print analytic benchmarks for a config");
  bounds->add_option("config", config_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      bcmac::ScenarioConfig cfg = bcmac::load_config(config_path);
      if (!out_path.empty()) cfg.output_path = out_path;
      if (threads >= 0) cfg.threads = threads;
      if (full_curves) cfg.full_curves = true;
      return run_config(std::move(cfg));
    }
    if (pre->parsed()) {
      bcmac::ScenarioConfig cfg = bcmac::preset(figure, scale);
      if (seed_given) cfg.seed = seed;
      if (!out_path.empty()) cfg.output_path = out_path;
      if (threads >= 0) cfg.threads = threads;
      if (full_curves) cfg.full_curves = true;
      return run_config(std::move(cfg));
    }
    if (bounds->parsed()) {
      const bcmac::ScenarioConfig cfg = bcmac::load_config(config_path);
      std::cout << bcmac::bounds_report(cfg);
      return 0;
    }
  } catch (const bcmac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
