#include "amlab/adjoint.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "amlab/errors.hpp"

namespace amlab {

double AdjointSolution::cell_volume() const {
  return std::pow(stencil->grid()->spacing(), stencil->grid()->dim());
}

double AdjointSolution::boundary_weight() const {
  return std::pow(stencil->grid()->spacing(), stencil->grid()->dim() - 1);
}

double AdjointSolution::theta_min() const {
  return theta_interior.size() ? theta_interior.minCoeff() : 0.0;
}

double AdjointSolution::rho_mass() const {
  return rho.sum() * boundary_weight();
}

struct AdjointSolver::Impl {
  Eigen::SparseMatrix<double> At;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

AdjointSolver::AdjointSolver(std::shared_ptr<const LinearizedStencil> stencil)
    : stencil_(std::move(stencil)) {
  if (!stencil_) throw input_error("adjoint: missing stencil");
  auto impl = std::make_shared<Impl>();
  impl->At = stencil_->matrix().transpose();
  impl->lu.compute(impl->At);
  if (impl->lu.info() != Eigen::Success)
    throw numerical_error(
        "adjoint: transposed system is singular (monotonicity broken "
        "upstream?)");
  impl_ = std::move(impl);
}

AdjointSolution AdjointSolver::solve(const std::array<int, 3>& x0,
                                     const GridField& u,
                                     const Hamiltonian& model) const {
  const LinearizedStencil& st = *stencil_;
  const Grid& g = *st.grid();
  const std::int64_t flat = g.flatten(x0);
  const std::int64_t local = st.interior_local(flat);
  if (local < 0) throw input_error("adjoint: x0 must be window-interior");

  const double hn = std::pow(g.spacing(), g.dim());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(st.interior_size());
  rhs[local] = 1.0 / hn;  // Dirac: unit mass after the h^n quadrature weight

  AdjointSolution out{stencil_, x0, flat,
                      GridField(st.grid(),
                                std::vector<double>(g.node_count(), 0.0),
                                "theta")};
  out.theta_interior = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success)
    throw numerical_error("adjoint: transpose solve failed");

  std::vector<double> vals(g.node_count(), 0.0);
  for (std::int64_t k = 0; k < st.interior_size(); ++k)
    vals[st.interior_nodes()[k]] = out.theta_interior[k];
  out.theta = GridField(st.grid(), std::move(vals), "theta");

  // rho from the boundary flux algebra: rho_b * h^{n-1} = -(B^T Theta)_b h^n.
  out.rho = -(st.boundary_matrix().transpose() * out.theta_interior) * g.spacing();
  out.alpha_eps = model.value(gradient_at(u, x0));
  return out;
}

AdjointSolution solve_adjoint(std::shared_ptr<const LinearizedStencil> stencil,
                              const std::array<int, 3>& x0, const GridField& u,
                              const Hamiltonian& model) {
  return AdjointSolver(std::move(stencil)).solve(x0, u, model);
}

double duality_check(const GridField& v, const AdjointSolution& adj) {
  const LinearizedStencil& st = *adj.stencil;
  if (v.grid()->node_count() != st.grid()->node_count())
    throw input_error("duality_check: grid mismatch");
  const double hn = adj.cell_volume();
  const double w = adj.boundary_weight();
  double acc = st.apply(v).dot(adj.theta_interior) * hn;
  for (std::int64_t k = 0; k < st.boundary_size(); ++k)
    acc += v[st.boundary_nodes()[k]] * adj.rho[k] * w;
  return std::abs(acc - v[adj.x0_flat]);
}

bool EstimateReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

EstimateReport integral_estimates(const AdjointSolution& adj, const GridField& u,
                                  const Hamiltonian& model, double eps,
                                  const EstimateParams& params) {
  const LinearizedStencil& st = *adj.stencil;
  const Grid& g = *st.grid();
  const int n = g.dim();
  const double hn = adj.cell_volume();
  const double wbd = adj.boundary_weight();
  const double lambda = model.lambda();

  double mu = params.mu > 0.0 ? params.mu : lambda / (16.0 * n);
  if (!(mu > 0.0 && mu < lambda / (8.0 * n)))
    throw config_error("integral_estimates: need 0 < mu < lambda/(8n)");
  const double alpha = adj.alpha_eps;
  if (!(params.beta > 0.0 && params.beta < alpha))
    throw config_error("integral_estimates: need 0 < beta < alpha_eps = " +
                       std::to_string(alpha));
  if (!(params.eta > 0.0))
    throw config_error("integral_estimates: eta must be positive");

  // Per-interior-node ingredients.
  double hessian_energy = 0.0;       // int [<Hpp dH, dH> + eps tr(Hpp D2u D2u)] Theta
  double exp_interior = 0.0;         // mu int w <Hpp dH,dH> Theta + eps mu int w tr(..) Theta
  double h2_moment = 0.0;            // int H(Du)^2 Theta
  double mass_total = 0.0, mass_sub = 0.0;
  double sup_H = 0.0, sup_u = 0.0;

  for (std::int64_t k = 0; k < st.interior_size(); ++k) {
    const std::int64_t flat = st.interior_nodes()[k];
    const auto idx = g.unflatten(flat);
    const double theta = adj.theta_interior[k];
    const Eigen::VectorXd du = gradient_at(u, idx);
    const auto ev = model.eval(du);
    const Eigen::MatrixXd d2u = hessian_at(u, idx);
    const Eigen::VectorXd dH = d2u * ev.gradient;
    const double quad = dH.dot(ev.hessian * dH);
    const double trace_term = (ev.hessian * d2u * d2u).trace();
    const double w = std::exp((mu / eps) * (alpha - ev.value));

    hessian_energy += (quad + eps * trace_term) * theta * hn;
    exp_interior += (mu * w * quad + eps * mu * w * trace_term) * theta * hn;
    h2_moment += ev.value * ev.value * theta * hn;
    mass_total += theta * hn;
    if (ev.value <= params.beta) mass_sub += theta * hn;
    sup_H = std::max(sup_H, ev.value);
    sup_u = std::max(sup_u, std::abs(u[flat]));
  }

  // Boundary term of the exponential estimate.
  double exp_boundary = 0.0;
  for (std::int64_t k = 0; k < st.boundary_size(); ++k) {
    const auto idx = g.unflatten(st.boundary_nodes()[k]);
    const double Hb = model.value(gradient_at(u, idx));
    exp_boundary += eps * std::exp((mu / eps) * (alpha - Hb)) * adj.rho[k] * wbd;
  }

  EstimateReport rep;
  rep.alpha_eps = alpha;
  rep.theta_mass_total = mass_total;
  rep.theta_mass_sublevel = mass_sub;
  const double slack = params.slack;

  {
    EstimateEntry e;
    e.name = "hessian_energy_bound";
    e.lhs = hessian_energy;
    e.rhs = sup_H;
    e.pass = e.lhs <= e.rhs * (1.0 + slack) + 1e-12;
    e.params = {{"mu", mu}};
    rep.entries.push_back(std::move(e));
  }
  {
    EstimateEntry e;
    e.name = "exponential_three_term";
    e.lhs = exp_boundary + exp_interior;
    e.rhs = 2.0 * eps;
    e.pass = e.lhs <= e.rhs * (1.0 + slack);
    e.params = {{"mu", mu}, {"boundary_term", exp_boundary},
                {"interior_term", exp_interior}};
    rep.entries.push_back(std::move(e));
  }
  {
    EstimateEntry e;
    e.name = "h2_moment_bound";
    e.lhs = h2_moment;
    e.rhs = params.c_emp * ((1.0 + sup_u) * (1.0 + sup_H) +
                            params.eta * params.eta * mass_total);
    e.pass = e.lhs <= e.rhs * (1.0 + slack);
    e.params = {{"eta", params.eta}, {"c_emp", params.c_emp}};
    rep.entries.push_back(std::move(e));
  }
  {
    EstimateEntry e;
    e.name = "sublevel_mass_bound";
    e.lhs = mass_sub;
    e.rhs = params.c_emp * (1.0 / eps) *
            std::exp(mu * (params.beta - alpha) / eps);
    e.pass = e.lhs <= e.rhs * (1.0 + slack);
    e.params = {{"mu", mu}, {"beta", params.beta}, {"c_emp", params.c_emp}};
    rep.entries.push_back(std::move(e));
  }
  {
    EstimateEntry e;
    e.name = "total_mass_bound";
    e.lhs = mass_total;
    e.rhs = params.c_emp * ((1.0 / eps) * std::exp(-mu * alpha / (2.0 * eps)) +
                            1.0 / (alpha * alpha));
    e.pass = e.lhs <= e.rhs * (1.0 + slack);
    e.params = {{"mu", mu}, {"alpha_eps", alpha}, {"c_emp", params.c_emp}};
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace amlab
