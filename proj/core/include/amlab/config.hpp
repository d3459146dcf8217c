#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amlab/pde_solver.hpp"

namespace amlab {

// Fully resolved experiment definition.  Parsing applies defaults and
// rejects unknown keys; emitting a parsed config and re-parsing it yields
// the identical structure.
struct ModelConfig {
  std::string family = "quadratic";  // quadratic | anisotropic | separable_power
  int dim = 2;
  double c = 1.0;                    // quadratic
  double alpha = 4.0;                // separable_power
  double box_radius = 2.0;           // separable_power convexity box
  std::vector<double> matrix;        // anisotropic, row-major dim x dim
  double gamma = 0.0;                // 0 = no mollification
};

struct GridConfig {
  double box_radius = 1.0;  // domain [-r, r]^dim
  int nodes_per_axis = 41;
};

struct SolverSection {
  double eps = 0.05;
  SolverConfig inner;
};

struct FlatnessSection {
  std::vector<double> tau_sweep{0.1, 0.03, 0.01};
  std::vector<double> eps_sweep{0.1, 0.05};
  double mu = 0.0;     // 0 = lambda/(16 n), echoed resolved
  double c_emp = 0.0;  // 0 = calibrate on the first sweep point
  int nodes_per_axis = 41;
};

struct StabilitySection {
  std::vector<double> gamma_sweep{0.2, 0.1, 0.05};
  std::string boundary = "affine";  // affine | aronsson | bump
  double c_emp = 10.0;
};

struct BlowupSection {
  std::string field = "closed_form";  // closed_form | solve
  std::string boundary = "aronsson";
  std::vector<double> center{1.0, 1.0};
  std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  double dispersion_tolerance = 1e-3;
};

struct BarrierSection {
  double sigma = 0.0;  // 0 = auto (8 Lambda Lip(g)^2 * 1.01 in the Lipschitz
                       // check; 2.0 for a bare distance field)
  double delta = 0.0;
  double sweep_tolerance = 1e-8;
  double slack = 0.1;
  std::vector<int> x0;  // node index; empty = domain center
};

struct AdjointSection {
  std::vector<int> x0;  // node index; empty = domain center
  double mu = 0.0;      // 0 = lambda/(16 n)
  double beta = 0.0;    // 0 = alpha_eps / 2
  double eta = 0.5;
  std::vector<double> eps_sweep{0.1, 0.05, 0.025};
  std::string boundary = "aronsson";
  double window_radius = 0.0;  // 0 = half the box radius
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool binary_fields = false;
};

struct RunConfig {
  ModelConfig model;
  GridConfig grid;
  SolverSection solver;
  std::string scenario;  // flatness | stability | blowup | barrier | adjoint
  FlatnessSection flatness;
  StabilitySection stability;
  BlowupSection blowup;
  BarrierSection barrier;
  AdjointSection adjoint;
  OutputConfig output;
  std::uint64_t seed = 0;

  // Resolved-config serialization: stable key order, shortest round-trip
  // doubles, defaults echoed.
  std::string emit() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Builds the model described by the config (mollified when gamma > 0).
HamiltonianPtr build_model(const ModelConfig& mc);

struct ScenarioResult {
  bool pass = false;
  std::string failure;  // name of the first failing invariant, if any
};

// Runs the configured scenario and writes resolved_config.json, per-sweep
// CSV, and summary.json under the output directory.  Overrides mirror the
// command-line flags.
ScenarioResult run_scenario(RunConfig config,
                            const std::optional<std::string>& out_override = {},
                            const std::optional<std::uint64_t>& seed_override = {},
                            int threads = 1);

}  // namespace amlab
