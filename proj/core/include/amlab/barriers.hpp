#pragma once

#include <array>
#include <vector>

#include "amlab/grid.hpp"
#include "amlab/hamiltonian.hpp"

namespace amlab {

// Discounted optimal-control distance L^d_s(x0, .) on the grid, computed by
// semi-Lagrangian value iteration over a fixed neighbor direction set.
struct BarrierField {
  std::array<int, 3> x0{0, 0, 0};
  double sigma = 1.0;
  double delta = 0.0;  // discount; 0 means the undiscounted limit
  GridField value;
  int sweeps = 0;
  std::vector<double> sweep_changes;  // sup-norm change per Gauss-Seidel sweep
};

struct BarrierOptions {
  double sweep_tolerance = 1e-8;
  int max_sweeps = 10000;
};

// Directions used by the value iteration: 16 in 2D (axis + diagonal + knight
// moves), 26 in 3D (the full {-1,0,1}^3 shell).  Integer grid offsets.
std::vector<std::array<int, 3>> direction_set(int dim);

BarrierField control_distance(const HamiltonianPtr& model, double sigma,
                              double delta, const GridPtr& grid,
                              const std::array<int, 3>& x0,
                              const BarrierOptions& options = {});

// Cost of the single straight segment from x to y at the optimal constant
// speed; an upper bound for the control distance.
double straight_line_cost(const Hamiltonian& model, double sigma, double delta,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Admissibility threshold for the discount: sigma / (2 sup C^H_sigma(y-x)),
// sup over grid-node pairs (attained at the box diameter).
double delta_threshold(const HamiltonianPtr& model, double sigma,
                       const Grid& grid);

struct ConeSandwichReport {
  std::int64_t nodes = 0;
  std::int64_t lower_violations = 0;    // value < 0 or value > cone + slack
  std::int64_t upper_checked = 0;       // nodes where (d/s) L < ln sqrt(2)
  std::int64_t upper_violations = 0;    // cone > e^{4 d L / s} L (1 + slack)
  std::int64_t not_applicable = 0;      // outside the admissible sub-region
  double max_ratio = 0.0;               // max value / cone over nodes != x0
  std::vector<std::int64_t> violation_nodes;  // grid flat indices, capped
  double slack = 0.05;
  bool pass = false;
};

ConeSandwichReport cone_sandwich_check(const BarrierField& barrier,
                                       const HamiltonianPtr& model,
                                       double slack = 0.05);

struct BoundaryLipschitzReport {
  struct Point {
    std::array<int, 3> x0{0, 0, 0};
    std::int64_t failing_nodes = 0;
    double worst_defect = 0.0;   // max over nodes of the sandwich violation
    double lipschitz_ratio = 0.0;  // max |u(x)-g(x0)| / |x-x0|
  };
  std::vector<Point> points;
  double sigma = 0.0;
  double delta = 0.0;
  // Empirical proxy for the unquantified semiconcavity constant: the largest
  // discrete pure second difference of the barrier over interior nodes.
  double max_second_difference = 0.0;
  bool pass = false;
};

// Verifies -L^d_s(., x0) <= u(.) - g(x0) <= L^d_s(x0, .) at every node for
// each sampled boundary node x0.  sigma must respect the admissibility
// formula sigma > 8 Lambda Lip(g)^2; pass sigma <= 0 to pick
// 8 Lambda Lip(g)^2 * 1.01 automatically.
BoundaryLipschitzReport boundary_lipschitz_check(
    const GridField& u, const GridField& g, const HamiltonianPtr& model,
    double sigma, double delta,
    const std::vector<std::array<int, 3>>& boundary_points,
    const BarrierOptions& options = {});

// Discrete Lipschitz constant of the boundary data along boundary nodes.
double boundary_lipschitz_constant(const GridField& g);

}  // namespace amlab
