#include <cmath>
#include <random>

#include "amlab/adjoint.hpp"
#include "amlab/errors.hpp"
#include "doctest.h"

using namespace amlab;

namespace {

double p43(double t) { return t * std::cbrt(t); }

struct Setup {
  GridPtr grid;
  HamiltonianPtr model;
  GridField u;
  std::shared_ptr<const LinearizedStencil> stencil;
  std::array<int, 3> x0;
};

Setup make_setup(int nodes, double eps) {
  GridPtr grid = Grid::build(Eigen::Vector2d(-1.0, -1.0),
                             Eigen::Vector2d(1.0, 1.0), nodes);
  HamiltonianPtr model = std::make_shared<QuadraticHamiltonian>(2, 1.0);
  GridField bd(grid, [](const Eigen::VectorXd& x) {
    return p43(x[0]) - p43(x[1]);
  });
  SolverProblem prob{model, grid, bd, eps, {}};
  GridField u = solve_regularized(prob).solution;
  const SubWindow win = SubWindow::from_box(*grid, Eigen::Vector2d(-0.5, -0.5),
                                            Eigen::Vector2d(0.5, 0.5));
  auto st = std::make_shared<LinearizedStencil>(
      LinearizedStencil::assemble(u, *model, eps, win, true));
  return Setup{grid, model, std::move(u), std::move(st),
               {nodes / 2, nodes / 2, 0}};
}

}  // namespace

TEST_CASE("adjoint density: nonnegativity, unit mass, duality") {
  const Setup s = make_setup(33, 0.05);
  const AdjointSolution adj = solve_adjoint(s.stencil, s.x0, s.u, *s.model);

  CHECK(adj.theta_min() >= -1e-12);
  CHECK(adj.rho.minCoeff() >= -1e-12);
  CHECK(adj.rho_mass() == doctest::Approx(1.0).epsilon(1e-10));

  // Duality identity is exact linear algebra for arbitrary fields.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> vals(s.grid->node_count());
    for (double& v : vals) v = d(rng);
    CHECK(duality_check(GridField(s.grid, vals), adj) <= 1e-10);
  }
  // Constants: L(1) = 0, so the boundary density alone must reproduce 1.
  CHECK(duality_check(GridField(s.grid,
                                std::vector<double>(s.grid->node_count(), 1.0)),
                      adj) <= 1e-10);
}

TEST_CASE("adjoint solver reuses one factorization across base points") {
  const Setup s = make_setup(25, 0.05);
  AdjointSolver solver(s.stencil);
  const auto a1 = solver.solve({12, 12, 0}, s.u, *s.model);
  const auto a2 = solver.solve({13, 12, 0}, s.u, *s.model);
  CHECK(a1.rho_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(a2.rho_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((a1.theta_interior - a2.theta_interior).norm() > 0.0);
  // Base point outside the window interior is rejected.
  CHECK_THROWS_AS(solver.solve({0, 0, 0}, s.u, *s.model), input_error);
}

TEST_CASE("transpose consistency: <A v, theta> = <v, A^T theta>") {
  const Setup s = make_setup(25, 0.05);
  const AdjointSolution adj = solve_adjoint(s.stencil, s.x0, s.u, *s.model);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(s.stencil->interior_size());
  for (std::int64_t i = 0; i < v.size(); ++i) v[i] = d(rng);
  const auto& A = s.stencil->matrix();
  const double lhs = (A * v).dot(adj.theta_interior);
  const double rhs = v.dot(A.transpose() * adj.theta_interior);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("gradient mean value holds to roundoff at both resolutions") {
  // Differentiating the discrete equation: centered difference operators
  // commute on a uniform grid, so the linearized operator (with drift)
  // annihilates u_{x_k} exactly at nodes whose full stencil lies in the
  // domain interior.  By duality the rho-weighted boundary average then
  // reproduces u_{x_k}(x0) to machine precision, not merely to O(h).
  auto defect = [](int nodes) {
    const Setup s = make_setup(nodes, 0.05);
    const AdjointSolution adj = solve_adjoint(s.stencil, s.x0, s.u, *s.model);
    const std::vector<GridField> du = gradient(s.u);
    const double w = adj.boundary_weight();
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      double avg = 0.0;
      for (std::int64_t b = 0; b < s.stencil->boundary_size(); ++b)
        avg += du[k][s.stencil->boundary_nodes()[b]] * adj.rho[b] * w;
      worst = std::max(worst, std::abs(du[k].at(s.x0) - avg));
    }
    return worst;
  };
  CHECK(defect(25) <= 1e-10);
  CHECK(defect(49) <= 1e-10);
}

TEST_CASE("estimate parameter validation") {
  const Setup s = make_setup(25, 0.05);
  const AdjointSolution adj = solve_adjoint(s.stencil, s.x0, s.u, *s.model);
  EstimateParams p;
  p.beta = adj.alpha_eps * 2.0;  // beta must be below alpha_eps
  CHECK_THROWS_AS(integral_estimates(adj, s.u, *s.model, 0.05, p), config_error);
  p.beta = adj.alpha_eps / 2.0;
  p.mu = s.model->lambda();  // above lambda/(8n)
  CHECK_THROWS_AS(integral_estimates(adj, s.u, *s.model, 0.05, p), config_error);
}
