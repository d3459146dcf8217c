#include "amlab/config.hpp"

#include <fstream>
#include <sstream>

#include "amlab/errors.hpp"
#include "json.hpp"

namespace amlab {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw config_error("config: unknown key '" + key + "' in " + context);
  }
}

template <class T>
void get(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error("config: bad value for '" + std::string(key) +
                       "': " + e.what());
  }
}

ModelConfig parse_model(const json& j) {
  ModelConfig m;
  check_keys(j, {"family", "dim", "c", "alpha", "box_radius", "matrix", "gamma"},
             "model");
  get(j, "family", m.family);
  get(j, "dim", m.dim);
  get(j, "c", m.c);
  get(j, "alpha", m.alpha);
  get(j, "box_radius", m.box_radius);
  get(j, "matrix", m.matrix);
  get(j, "gamma", m.gamma);
  if (m.family != "quadratic" && m.family != "anisotropic" &&
      m.family != "separable_power")
    throw config_error("config: unknown model family '" + m.family + "'");
  if (m.dim < 1 || m.dim > 3)
    throw config_error("config: model dim must be 1, 2 or 3");
  if (m.family == "anisotropic" &&
      m.matrix.size() != static_cast<std::size_t>(m.dim) * m.dim)
    throw config_error("config: anisotropic matrix needs dim*dim entries");
  if (m.gamma < 0.0 || m.gamma > 1.0)
    throw config_error("config: gamma must lie in [0, 1]");
  return m;
}

GridConfig parse_grid(const json& j) {
  GridConfig g;
  check_keys(j, {"box_radius", "nodes_per_axis"}, "grid");
  get(j, "box_radius", g.box_radius);
  get(j, "nodes_per_axis", g.nodes_per_axis);
  if (!(g.box_radius > 0.0)) throw config_error("config: box_radius must be > 0");
  if (g.nodes_per_axis < 3)
    throw config_error("config: nodes_per_axis must be >= 3");
  return g;
}

SolverSection parse_solver(const json& j) {
  SolverSection s;
  check_keys(j,
             {"eps", "tolerance", "max_outer_iterations", "damping",
              "newton_finish", "direct_threshold"},
             "solver");
  get(j, "eps", s.eps);
  get(j, "tolerance", s.inner.tolerance);
  get(j, "max_outer_iterations", s.inner.max_outer_iterations);
  get(j, "damping", s.inner.damping);
  get(j, "newton_finish", s.inner.newton_finish);
  get(j, "direct_threshold", s.inner.direct_threshold);
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config: parse failure: ") + e.what());
  }
  check_keys(j,
             {"model", "grid", "solver", "scenario", "flatness", "stability",
              "blowup", "barrier", "adjoint", "output", "seed"},
             "top level");
  RunConfig c;
  if (!j.contains("scenario"))
    throw config_error("config: missing required block 'scenario'");
  get(j, "scenario", c.scenario);
  if (c.scenario != "flatness" && c.scenario != "stability" &&
      c.scenario != "blowup" && c.scenario != "barrier" &&
      c.scenario != "adjoint")
    throw config_error("config: unknown scenario '" + c.scenario + "'");

  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  get(j, "seed", c.seed);

  if (j.contains("flatness")) {
    const json& f = j.at("flatness");
    check_keys(f, {"tau_sweep", "eps_sweep", "mu", "c_emp", "nodes_per_axis"},
               "flatness");
    get(f, "tau_sweep", c.flatness.tau_sweep);
    get(f, "eps_sweep", c.flatness.eps_sweep);
    get(f, "mu", c.flatness.mu);
    get(f, "c_emp", c.flatness.c_emp);
    get(f, "nodes_per_axis", c.flatness.nodes_per_axis);
  }
  if (j.contains("stability")) {
    const json& s = j.at("stability");
    check_keys(s, {"gamma_sweep", "boundary", "c_emp"}, "stability");
    get(s, "gamma_sweep", c.stability.gamma_sweep);
    get(s, "boundary", c.stability.boundary);
    get(s, "c_emp", c.stability.c_emp);
  }
  if (j.contains("blowup")) {
    const json& b = j.at("blowup");
    check_keys(b, {"field", "boundary", "center", "radii",
                   "dispersion_tolerance"},
               "blowup");
    get(b, "field", c.blowup.field);
    get(b, "boundary", c.blowup.boundary);
    get(b, "center", c.blowup.center);
    get(b, "radii", c.blowup.radii);
    get(b, "dispersion_tolerance", c.blowup.dispersion_tolerance);
  }
  if (j.contains("barrier")) {
    const json& b = j.at("barrier");
    check_keys(b, {"sigma", "delta", "sweep_tolerance", "slack", "x0"},
               "barrier");
    get(b, "sigma", c.barrier.sigma);
    get(b, "delta", c.barrier.delta);
    get(b, "sweep_tolerance", c.barrier.sweep_tolerance);
    get(b, "slack", c.barrier.slack);
    get(b, "x0", c.barrier.x0);
  }
  if (j.contains("adjoint")) {
    const json& a = j.at("adjoint");
    check_keys(a, {"x0", "mu", "beta", "eta", "eps_sweep", "boundary",
                   "window_radius"},
               "adjoint");
    get(a, "x0", c.adjoint.x0);
    get(a, "mu", c.adjoint.mu);
    get(a, "beta", c.adjoint.beta);
    get(a, "eta", c.adjoint.eta);
    get(a, "eps_sweep", c.adjoint.eps_sweep);
    get(a, "boundary", c.adjoint.boundary);
    get(a, "window_radius", c.adjoint.window_radius);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"directory", "csv", "json", "binary_fields"}, "output");
    get(o, "directory", c.output.directory);
    get(o, "csv", c.output.csv);
    get(o, "json", c.output.json);
    get(o, "binary_fields", c.output.binary_fields);
  }

  // Resolve the mu defaults so the emitted config echoes the actual values.
  const HamiltonianPtr model = build_model(c.model);
  const double mu_default = model->lambda() / (16.0 * c.model.dim);
  if (c.flatness.mu == 0.0) c.flatness.mu = mu_default;
  if (c.adjoint.mu == 0.0) c.adjoint.mu = mu_default;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string RunConfig::emit() const {
  json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  json& m = j["model"];
  m["family"] = model.family;
  m["dim"] = model.dim;
  m["c"] = model.c;
  m["alpha"] = model.alpha;
  m["box_radius"] = model.box_radius;
  m["matrix"] = model.matrix;
  m["gamma"] = model.gamma;
  json& g = j["grid"];
  g["box_radius"] = grid.box_radius;
  g["nodes_per_axis"] = grid.nodes_per_axis;
  json& s = j["solver"];
  s["eps"] = solver.eps;
  s["tolerance"] = solver.inner.tolerance;
  s["max_outer_iterations"] = solver.inner.max_outer_iterations;
  s["damping"] = solver.inner.damping;
  s["newton_finish"] = solver.inner.newton_finish;
  s["direct_threshold"] = solver.inner.direct_threshold;
  json& f = j["flatness"];
  f["tau_sweep"] = flatness.tau_sweep;
  f["eps_sweep"] = flatness.eps_sweep;
  f["mu"] = flatness.mu;
  f["c_emp"] = flatness.c_emp;
  f["nodes_per_axis"] = flatness.nodes_per_axis;
  json& st = j["stability"];
  st["gamma_sweep"] = stability.gamma_sweep;
  st["boundary"] = stability.boundary;
  st["c_emp"] = stability.c_emp;
  json& b = j["blowup"];
  b["field"] = blowup.field;
  b["boundary"] = blowup.boundary;
  b["center"] = blowup.center;
  b["radii"] = blowup.radii;
  b["dispersion_tolerance"] = blowup.dispersion_tolerance;
  json& ba = j["barrier"];
  ba["sigma"] = barrier.sigma;
  ba["delta"] = barrier.delta;
  ba["sweep_tolerance"] = barrier.sweep_tolerance;
  ba["slack"] = barrier.slack;
  ba["x0"] = barrier.x0;
  json& a = j["adjoint"];
  a["x0"] = adjoint.x0;
  a["mu"] = adjoint.mu;
  a["beta"] = adjoint.beta;
  a["eta"] = adjoint.eta;
  a["eps_sweep"] = adjoint.eps_sweep;
  a["boundary"] = adjoint.boundary;
  a["window_radius"] = adjoint.window_radius;
  json& o = j["output"];
  o["directory"] = output.directory;
  o["csv"] = output.csv;
  o["json"] = output.json;
  o["binary_fields"] = output.binary_fields;
  return j.dump(2) + "\n";
}

HamiltonianPtr build_model(const ModelConfig& mc) {
  HamiltonianPtr base;
  if (mc.family == "quadratic") {
    base = std::make_shared<QuadraticHamiltonian>(mc.dim, mc.c);
  } else if (mc.family == "anisotropic") {
    Eigen::MatrixXd A(mc.dim, mc.dim);
    for (int r = 0; r < mc.dim; ++r)
      for (int cidx = 0; cidx < mc.dim; ++cidx)
        A(r, cidx) = mc.matrix[r * mc.dim + cidx];
    base = std::make_shared<AnisotropicHamiltonian>(std::move(A));
  } else if (mc.family == "separable_power") {
    base = std::make_shared<SeparablePowerHamiltonian>(mc.dim, mc.alpha,
                                                       mc.box_radius);
  } else {
    throw config_error("config: unknown model family '" + mc.family + "'");
  }
  if (mc.gamma > 0.0) return mollify(base, mc.gamma);
  return base;
}

}  // namespace amlab
