#pragma once

#include <memory>
#include <string>
#include <vector>

#include "amlab/pde_solver.hpp"

namespace amlab {

// Discrete Green's function of the transposed linearized operator:
// L*_eps Theta = delta_{x0} on the window interior, Theta = 0 on the window
// boundary.  rho is the discrete boundary density defined by the flux
// algebra that makes the duality identity exact, so sum(rho * weight) = 1.
struct AdjointSolution {
  std::shared_ptr<const LinearizedStencil> stencil;
  std::array<int, 3> x0{0, 0, 0};
  std::int64_t x0_flat = 0;
  GridField theta;                 // full grid; zero outside the window interior
  Eigen::VectorXd theta_interior;  // window-interior local order
  Eigen::VectorXd rho;             // per window-boundary node, local order
  double alpha_eps = 0.0;          // H(Du(x0)) of the frozen solution

  double cell_volume() const;      // h^n
  double boundary_weight() const;  // h^{n-1}
  double theta_min() const;
  double rho_mass() const;         // sum rho * boundary weight
};

// Solves the transposed system for the Dirac load (1/h^n at x0).  A shared
// factorization may serve several base points; pass it via `shared` after a
// first solve.
class AdjointSolver {
 public:
  explicit AdjointSolver(std::shared_ptr<const LinearizedStencil> stencil);
  AdjointSolution solve(const std::array<int, 3>& x0, const GridField& u,
                        const Hamiltonian& model) const;

 private:
  std::shared_ptr<const LinearizedStencil> stencil_;
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

AdjointSolution solve_adjoint(std::shared_ptr<const LinearizedStencil> stencil,
                              const std::array<int, 3>& x0, const GridField& u,
                              const Hamiltonian& model);

// |sum_int L_eps(v) Theta h^n + sum_bdry v rho w - v(x0)|; exact linear
// algebra up to roundoff for arbitrary v.
double duality_check(const GridField& v, const AdjointSolution& adjoint);

struct EstimateEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, double>> params;
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  double alpha_eps = 0.0;
  double theta_mass_total = 0.0;     // sum Theta h^n
  double theta_mass_sublevel = 0.0;  // sum over {H(Du) <= beta} of Theta h^n
  bool all_pass() const;
};

struct EstimateParams {
  double mu = 0.0;    // 0 -> lambda/(16 n)
  double beta = 0.0;  // sublevel threshold, must be < alpha_eps
  double eta = 0.5;
  double slack = 0.5;
  double c_emp = 10.0;  // empirical constant for the non-explicit bounds
};

// Discrete versions of the weighted-integral estimates tied to the adjoint
// Green's function: the Hessian-energy bound, the three-term exponential
// bound (<= 2 eps), the H^2-moment bound, and the sublevel/total mass
// bounds.
EstimateReport integral_estimates(const AdjointSolution& adjoint,
                                  const GridField& u, const Hamiltonian& model,
                                  double eps, const EstimateParams& params);

}  // namespace amlab
