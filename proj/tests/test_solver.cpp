#include <algorithm>
#include <cmath>
#include <random>

#include "amlab/errors.hpp"
#include "amlab/pde_solver.hpp"
#include "doctest.h"

using namespace amlab;

namespace {

GridPtr box_grid(int dim, double r, int nodes) {
  return Grid::build(Eigen::VectorXd::Constant(dim, -r),
                     Eigen::VectorXd::Constant(dim, r), nodes);
}

double p43(double t) { return t * std::cbrt(t); }  // |t|^{4/3}, even

GridField aronsson_field(const GridPtr& g) {
  return GridField(g, [](const Eigen::VectorXd& x) {
    return p43(x[0]) - p43(x[1]);
  });
}

}  // namespace

TEST_CASE("affine boundary data is reproduced exactly in 1D/2D/3D") {
  for (int dim : {1, 2, 3}) {
    const auto g = box_grid(dim, 1.0, 9);
    Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(dim, 0.3, 1.2);
    GridField bd(g, [&](const Eigen::VectorXd& x) { return a.dot(x) + 0.7; });
    SolverProblem prob{std::make_shared<QuadraticHamiltonian>(dim, 1.0), g, bd,
                      0.1, {}};
    const auto res = solve_regularized(prob);
    double err = 0.0;
    for (std::int64_t i = 0; i < g->node_count(); ++i)
      err = std::max(err, std::abs(res.solution[i] - bd[i]));
    CHECK(err <= 1e-12);
    CHECK(res.final_residual <= 1e-9);
  }
}

TEST_CASE("1D two-point problem returns the affine interpolant") {
  const auto g = box_grid(1, 1.0, 33);
  // Arbitrary endpoint values; the solution must be the straight line.
  const double va = -0.4, vb = 1.3;
  GridField bd(g, [&](const Eigen::VectorXd& x) {
    return va + (vb - va) * (x[0] + 1.0) / 2.0;
  });
  SolverProblem prob{std::make_shared<SeparablePowerHamiltonian>(1, 4.0, 2.0),
                    g, bd, 0.05, {}};
  const auto res = solve_regularized(prob);
  double err = 0.0;
  g->for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    const double x = g->coords(idx)[0];
    err = std::max(err, std::abs(res.solution[i] -
                                 (va + (vb - va) * (x + 1.0) / 2.0)));
  });
  CHECK(err <= 1e-10);
}

TEST_CASE("maximum principle on randomized 2D instances") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const auto g = box_grid(2, 1.0, 17);
    const double a = amp(rng), b = amp(rng), c = amp(rng);
    GridField bd(g, [&](const Eigen::VectorXd& x) {
      return a * std::sin(2.0 * x[0]) + b * x[1] + c * x[0] * x[1];
    });
    SolverProblem prob{std::make_shared<QuadraticHamiltonian>(2, 1.0), g, bd,
                      0.05 + 0.05 * (k % 3), {}};
    const auto res = solve_regularized(prob);
    const auto rep = check_max_principle(res.solution, bd);
    CHECK(rep.pass);
  }
}

TEST_CASE("stencil applied to an affine field vanishes") {
  // Rows are monotone when |H_{p_1} H_{p_2}| <= min_i H_{p_i}^2 + eps; the
  // balanced slope below satisfies that with margin.
  const auto g = box_grid(2, 1.0, 11);
  GridField u(g, [](const Eigen::VectorXd& x) { return 0.8 * (x[0] - x[1]); });
  const auto st = LinearizedStencil::assemble(
      u, QuadraticHamiltonian(2, 1.0), 0.1, true);
  CHECK(st.apply(u).lpNorm<Eigen::Infinity>() <= 1e-11);
  CHECK(st.monotonicity().violating_rows == 0);
}

TEST_CASE("monotone rows give a discrete comparison principle") {
  // Gradient components are equal for u = f(x_1 + x_2), which keeps every
  // sign-split cross row inside the M-matrix regime.
  const auto g = box_grid(2, 1.0, 15);
  GridField u(g, [](const Eigen::VectorXd& x) {
    return 0.5 * std::sin(x[0] + x[1]);
  });
  const auto st = LinearizedStencil::assemble(
      u, QuadraticHamiltonian(2, 1.0), 0.05, true);
  CHECK(st.monotonicity().violating_rows == 0);
  GridField g1(g, [](const Eigen::VectorXd& x) { return x[1]; });
  GridField g2(g, [](const Eigen::VectorXd& x) { return x[1] + 0.3; });
  const Eigen::VectorXd v1 = solve_linear_dirichlet(st, g1);
  const Eigen::VectorXd v2 = solve_linear_dirichlet(st, g2);
  for (std::int64_t k = 0; k < st.interior_size(); ++k)
    CHECK(v2[k] >= v1[k] - 1e-10);
}

TEST_CASE("window stencils only touch window nodes") {
  const auto g = box_grid(2, 1.0, 21);
  GridField u = aronsson_field(g);
  const SubWindow win = SubWindow::from_box(*g, Eigen::Vector2d(-0.5, -0.5),
                                            Eigen::Vector2d(0.5, 0.5));
  const auto st = LinearizedStencil::assemble(u, QuadraticHamiltonian(2, 1.0),
                                              0.05, win, true);
  CHECK(st.interior_size() > 0);
  for (std::int64_t node : st.interior_nodes())
    CHECK(win.contains(g->unflatten(node), 2));
  for (std::int64_t node : st.boundary_nodes())
    CHECK(win.is_window_boundary(g->unflatten(node), 2));
}

TEST_CASE("interior gradients stay bounded across an eps sweep") {
  const auto g = box_grid(2, 1.0, 33);
  GridField bd = aronsson_field(g);
  std::vector<std::pair<double, GridField>> sols;
  for (double eps : {0.1, 0.05, 0.02, 0.01}) {
    SolverProblem prob{std::make_shared<QuadraticHamiltonian>(2, 1.0), g, bd,
                      eps, {}};
    sols.emplace_back(eps, solve_regularized(prob).solution);
  }
  const auto rep = interior_gradient_bound(sols, Eigen::Vector2d(-0.5, -0.5),
                                           Eigen::Vector2d(0.5, 0.5));
  CHECK(rep.pass);
  const double mn = *std::min_element(rep.max_gradient.begin(),
                                      rep.max_gradient.end());
  const double mx = *std::max_element(rep.max_gradient.begin(),
                                      rep.max_gradient.end());
  CHECK(mx - mn < 0.25 * mx);  // varies by < 25% across the sweep
}

TEST_CASE("solver rejects bad configuration") {
  const auto g = box_grid(2, 1.0, 9);
  GridField bd(g, [](const Eigen::VectorXd& x) { return x[1]; });
  SolverProblem prob{std::make_shared<QuadraticHamiltonian>(2, 1.0), g, bd,
                    0.0, {}};
  CHECK_THROWS_AS(solve_regularized(prob), config_error);
  prob.eps = 0.05;
  prob.config.tolerance = -1.0;
  CHECK_THROWS_AS(solve_regularized(prob), config_error);
}
