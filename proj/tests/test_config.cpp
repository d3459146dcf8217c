#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "amlab/config.hpp"
#include "amlab/errors.hpp"
#include "doctest.h"

using namespace amlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("minimal config resolves defaults, including mu") {
  const RunConfig c = parse_config(R"({"scenario": "flatness"})");
  CHECK(c.model.family == "quadratic");
  CHECK(c.flatness.mu == doctest::Approx(1.0 / 32.0));  // lambda/(16 n)
  CHECK(c.adjoint.mu == doctest::Approx(1.0 / 32.0));
  CHECK(c.flatness.tau_sweep.size() == 3);
  CHECK(c.output.directory == "out");
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config(R"({"scenario": "flatness", "solver": {"epsilonn": 0.1}})");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("epsilonn") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"scenario": "nope"})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({})"), config_error);
  CHECK_THROWS_AS(parse_config("not json"), config_error);
}

TEST_CASE("parse -> emit -> parse is the identity on the resolved config") {
  const std::string text = R"({
    "scenario": "flatness",
    "seed": 99,
    "model": {"family": "separable_power", "dim": 2, "alpha": 4.0, "gamma": 0.1},
    "flatness": {"tau_sweep": [0.1, 0.05], "eps_sweep": [0.1]}
  })";
  const RunConfig c1 = parse_config(text);
  const std::string emitted = c1.emit();
  const RunConfig c2 = parse_config(emitted);
  CHECK(c2.emit() == emitted);
  CHECK(c2.seed == 99);
  CHECK(c2.model.gamma == 0.1);
}

TEST_CASE("build_model covers every family and validates") {
  ModelConfig m;
  m.family = "quadratic";
  CHECK(build_model(m)->family() == "quadratic");
  m.family = "anisotropic";
  m.matrix = {2.0, 0.3, 0.3, 1.0};
  CHECK(build_model(m)->family() == "anisotropic");
  m.family = "separable_power";
  m.gamma = 0.2;
  CHECK(build_model(m)->family() == "separable_power+mollified");
}

TEST_CASE("scenario artifacts are byte-identical across reruns") {
  const fs::path base = fs::temp_directory_path() / "amlab_det_test";
  fs::remove_all(base);
  RunConfig c = parse_config(R"({
    "scenario": "flatness",
    "seed": 7,
    "flatness": {"tau_sweep": [0.1, 0.05], "eps_sweep": [0.1],
                 "nodes_per_axis": 15}
  })");
  run_scenario(c, (base / "a").string(), {}, 1);
  run_scenario(c, (base / "b").string(), {}, 2);  // thread count is irrelevant
  for (const char* name :
       {"resolved_config.json", "flatness.csv", "summary.json"}) {
    CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
  }
  // Different seed must change the perturbation, hence the CSV.
  run_scenario(c, (base / "c").string(), std::uint64_t{8}, 1);
  CHECK(slurp(base / "a" / "flatness.csv") != slurp(base / "c" / "flatness.csv"));
  fs::remove_all(base);
}

TEST_CASE("flatness scenario writes one CSV row per sweep point") {
  const fs::path base = fs::temp_directory_path() / "amlab_rows_test";
  fs::remove_all(base);
  RunConfig c = parse_config(R"({
    "scenario": "flatness",
    "flatness": {"tau_sweep": [0.1, 0.05], "eps_sweep": [0.1],
                 "nodes_per_axis": 15}
  })");
  run_scenario(c, base.string(), {}, 1);
  const std::string csv = slurp(base / "flatness.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
  CHECK(slurp(base / "summary.json").find("\"scenario\": \"flatness\"") !=
        std::string::npos);
  fs::remove_all(base);
}

#ifdef AMLAB_CLI_PATH
TEST_CASE("CLI exit codes: 0 pass, 2 config error") {
  const fs::path base = fs::temp_directory_path() / "amlab_cli_test";
  fs::remove_all(base);
  fs::create_directories(base);
  spit(base / "good.json", R"({
    "scenario": "blowup",
    "grid": {"box_radius": 1.5, "nodes_per_axis": 301},
    "blowup": {"center": [1.0, 1.0], "radii": [0.3, 0.15, 0.075],
               "dispersion_tolerance": 0.01}
  })");
  spit(base / "bad.json", R"({"scenario": "flatness", "bogus_key": 1})");
  const std::string cli = AMLAB_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int st = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(st);
  };
  CHECK(run("validate " + (base / "good.json").string()) == 0);
  CHECK(run("validate " + (base / "bad.json").string()) == 2);
  CHECK(run("run " + (base / "good.json").string() + " --out " +
            (base / "out").string()) == 0);
  CHECK(run("run " + (base / "bad.json").string()) == 2);
  CHECK(run("run " + (base / "missing.json").string()) == 2);
  fs::remove_all(base);
}
#endif
