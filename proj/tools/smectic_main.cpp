#include "smectic/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace smectic;

  CLI::App app{"Smectic-A energy toolkit: runs one verification experiment and writes its artifacts."};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::optional<std::uint64_t> seed;

  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
  app.add_flag("--force", force, "Overwrite an existing output directory");
  app.add_option("--seed", seed, "Seed for randomized checks (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_code::ok : exit_code::config;
  }

  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_path, experiment);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_code::config;
  }
  if (seed) cfg.seed = *seed;
  const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);

  std::string message;
  const int rc = run_and_emit(cfg, dir, force, &message);
  if (rc == exit_code::ok) {
    std::cout << "wrote " << (dir / "manifest.json").string() << '\n';
  } else {
    const char* kind = rc == exit_code::config      ? "config error"
                       : rc == exit_code::numerical ? "numerical failure"
                                                    : "io error";
    std::cerr << kind << ": " << message << '\n';
  }
  return rc;
}
