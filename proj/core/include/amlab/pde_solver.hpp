#pragma once

#include <Eigen/Sparse>
#include <optional>

#include "amlab/grid.hpp"
#include "amlab/hamiltonian.hpp"

namespace amlab {

// Node-index window into a grid (inclusive).  The adjoint machinery works on
// a sub-box V of the solve domain U; the window's nodes must be grid nodes.
struct SubWindow {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  static SubWindow full(const Grid& g);
  // Largest node-aligned window covering [box_lo, box_hi].
  static SubWindow from_box(const Grid& g, const Eigen::VectorXd& box_lo,
                            const Eigen::VectorXd& box_hi);
  bool contains(const std::array<int, 3>& idx, int dim) const;
  bool is_window_boundary(const std::array<int, 3>& idx, int dim) const;
};

struct MonotonicityReport {
  std::int64_t rows = 0;
  std::int64_t violating_rows = 0;
  std::vector<std::int64_t> sample_nodes;  // grid flat indices, capped
  double violating_fraction() const {
    return rows == 0 ? 0.0 : static_cast<double>(violating_rows) / rows;
  }
};

// Monotone discretization of the linearized operator
//   L_eps(v) = -a_ij v_{x_i x_j} - b_l v_{x_l},
//   a_ij = H_{p_i}(Du) H_{p_j}(Du) + eps d_ij,
//   b_l  = 2 H_{p_i p_l}(Du) u_{x_i x_j} H_{p_j}(Du),
// frozen at a solution iterate u.  Second-order terms use centered and
// sign-split 4-point cross stencils, the drift is first-order upwinded on
// the sign of b_l.  Rows over window-interior nodes; B carries the coupling
// to window-boundary nodes, so L_eps(v) = A v_int + B v_bdry.
class LinearizedStencil {
 public:
  using SpMat = Eigen::SparseMatrix<double>;

  static LinearizedStencil assemble(const GridField& u, const Hamiltonian& model,
                                    double eps, const SubWindow& window,
                                    bool include_drift = true);
  static LinearizedStencil assemble(const GridField& u, const Hamiltonian& model,
                                    double eps, bool include_drift = true);

  const GridPtr& grid() const { return grid_; }
  const SubWindow& window() const { return window_; }
  double eps() const { return eps_; }
  bool has_drift() const { return has_drift_; }

  std::int64_t interior_size() const { return static_cast<std::int64_t>(interior_.size()); }
  std::int64_t boundary_size() const { return static_cast<std::int64_t>(boundary_.size()); }
  const std::vector<std::int64_t>& interior_nodes() const { return interior_; }
  const std::vector<std::int64_t>& boundary_nodes() const { return boundary_; }
  // Local index of a grid node among window-interior (-1) / window-boundary
  // (-1 if absent).
  std::int64_t interior_local(std::int64_t grid_flat) const;
  std::int64_t boundary_local(std::int64_t grid_flat) const;

  const SpMat& matrix() const { return A_; }
  const SpMat& boundary_matrix() const { return B_; }

  // L_eps(v) at window-interior nodes, in interior-local order.
  Eigen::VectorXd apply(const GridField& v) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v_interior,
                        const Eigen::VectorXd& v_boundary) const;

  const MonotonicityReport& monotonicity() const { return monotonicity_; }

 private:
  GridPtr grid_;
  SubWindow window_;
  double eps_ = 0.0;
  bool has_drift_ = true;
  std::vector<std::int64_t> interior_, boundary_;
  std::vector<std::int64_t> interior_map_, boundary_map_;  // grid flat -> local
  SpMat A_, B_;
  MonotonicityReport monotonicity_;
};

struct SolverConfig {
  double tolerance = 1e-9;       // sup-norm of the discrete residual
  int max_outer_iterations = 500;
  double damping = 0.7;
  bool newton_finish = false;
  std::int64_t direct_threshold = 200000;  // unknowns; iterative above
};

// Dirichlet problem A_H(v) + eps Laplace(v) = 0 on the grid box, v = g on
// the boundary nodes.
struct SolverProblem {
  HamiltonianPtr model;
  GridPtr grid;
  GridField boundary_values;  // only boundary nodes are read
  double eps = 0.0;
  SolverConfig config;
};

struct SolveResult {
  GridField solution;
  int outer_iterations = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// Frozen-coefficient Picard iteration with damping, optionally finished by
// Newton steps on the full linearization.
SolveResult solve_regularized(const SolverProblem& problem);

// Solves the frozen linear Dirichlet system L(v) = 0 in the window interior,
// v = g on the window boundary, for an already assembled stencil.
Eigen::VectorXd solve_linear_dirichlet(const LinearizedStencil& stencil,
                                       const GridField& g,
                                       std::int64_t direct_threshold = 200000);

struct MaxPrincipleReport {
  double max_abs_interior = 0.0;
  double max_abs_boundary = 0.0;
  bool pass = false;
};

MaxPrincipleReport check_max_principle(const GridField& u, const GridField& g,
                                       double tol = 1e-10);

struct GradientBoundReport {
  std::vector<double> eps_values;
  std::vector<double> max_gradient;  // max |Du| over the inner window per eps
  bool pass = false;                 // max over sweep <= 2 x median
};

// Reports max |Du| on an inner box across already-solved fields (one per
// eps).
GradientBoundReport interior_gradient_bound(
    const std::vector<std::pair<double, GridField>>& solutions,
    const Eigen::VectorXd& inner_lo, const Eigen::VectorXd& inner_hi);

}  // namespace amlab
