#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "amlab/config.hpp"
#include "amlab/errors.hpp"

// Exit codes: 0 scenario pass, 1 scenario fail, 2 config error, 3 numerical
// error.
int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for regularized L-infinity variational "
               "problems: mollified Hamiltonians, monotone solvers, adjoint "
               "densities, control-distance barriers."};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "Run the configured scenario");
  run->add_option("config", config_path, "Path to the JSON config")->required();
  run->add_option("--out", [&](const std::vector<std::string>& v) {
        out_dir = v.back();
        return true;
      },
      "Output directory (overrides the config)");
  run->add_option("--seed", [&](const std::vector<std::string>& v) {
        seed = std::stoull(v.back());
        return true;
      },
      "Seed (overrides the config)");
  run->add_option("--threads", threads, "Worker threads for sweeps")
      ->check(CLI::PositiveNumber);

  CLI::App* validate =
      app.add_subcommand("validate", "Parse and echo the resolved config");
  validate->add_option("config", config_path, "Path to the JSON config")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      amlab::RunConfig cfg = amlab::load_config(config_path);
      std::cout << cfg.emit();
      return 0;
    }
    amlab::RunConfig cfg = amlab::load_config(config_path);
    const amlab::ScenarioResult res =
        amlab::run_scenario(std::move(cfg), out_dir, seed, threads);
    if (!res.pass) {
      std::cerr << "scenario failed: " << res.failure << "\n";
      return 1;
    }
    return 0;
  } catch (const amlab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const amlab::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const amlab::input_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
