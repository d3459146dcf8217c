#include "amlab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amlab/errors.hpp"

namespace amlab {

namespace {

// L(q), with closed forms where the family admits one; the general path is
// the Legendre transform.
double lagrangian(const Hamiltonian& model, const Eigen::VectorXd& q) {
  if (const auto* quad = dynamic_cast<const QuadraticHamiltonian*>(&model))
    return q.squaredNorm() / (2.0 * quad->lambda());
  if (const auto* an = dynamic_cast<const AnisotropicHamiltonian*>(&model))
    return 0.5 * q.dot(an->matrix().ldlt().solve(q));
  return legendre(model, q).value;
}

// (sigma + L(d/t)) * (1 - e^{-delta t}) / delta, with the delta -> 0 limit.
double segment_cost(const Hamiltonian& model, double sigma, double delta,
                    const Eigen::VectorXd& d, double t) {
  const double run = sigma + lagrangian(model, d / t);
  if (delta == 0.0) return t * run;
  return run * (-std::expm1(-delta * t)) / delta;
}

// Minimizes f over [a, b] by golden section.
template <class F>
double golden_min(F&& f, double a, double b, int iters = 80) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-14 * (1.0 + b); ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

std::pair<double, double> time_bracket(const Hamiltonian& model, double sigma,
                                       double len) {
  const double vmax = std::sqrt(2.0 * sigma / model.lambda());
  const double vmin = std::sqrt(2.0 * sigma / model.Lambda());
  return {len / (10.0 * vmax), 10.0 * len / vmin};
}

}  // namespace

std::vector<std::array<int, 3>> direction_set(int dim) {
  std::vector<std::array<int, 3>> dirs;
  if (dim == 1) {
    dirs = {{1, 0, 0}, {-1, 0, 0}};
  } else if (dim == 2) {
    // 8 axis/diagonal + 8 knight moves.
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        if (a || b) dirs.push_back({a, b, 0});
    for (int a : {-1, 1})
      for (int b : {-2, 2}) {
        dirs.push_back({a, b, 0});
        dirs.push_back({b, a, 0});
      }
  } else if (dim == 3) {
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          if (a || b || c) dirs.push_back({a, b, c});
  } else {
    throw input_error("direction_set: dim must be 1, 2 or 3");
  }
  return dirs;
}

double straight_line_cost(const Hamiltonian& model, double sigma, double delta,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (!(sigma > 0.0)) throw config_error("straight_line_cost: sigma must be > 0");
  if (delta < 0.0) throw config_error("straight_line_cost: delta must be >= 0");
  const Eigen::VectorXd d = y - x;
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  if (const auto* quad = dynamic_cast<const QuadraticHamiltonian*>(&model);
      quad && delta == 0.0)
    return std::sqrt(2.0 * sigma / quad->lambda()) * len;
  auto [t_lo, t_hi] = time_bracket(model, sigma, len);
  return golden_min(
      [&](double t) { return segment_cost(model, sigma, delta, d, t); }, t_lo,
      t_hi);
}

double delta_threshold(const HamiltonianPtr& model, double sigma,
                       const Grid& grid) {
  // sup C^H_sigma(y - x) over node pairs: the cone is convex and positively
  // homogeneous, so the sup over the displacement box sits at a corner.
  const Eigen::VectorXd span = grid.hi() - grid.lo();
  const int n = grid.dim();
  double sup = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd d = span;
    for (int k = 0; k < n; ++k)
      if (mask & (1 << k)) d[k] = -d[k];
    sup = std::max(sup, cone(ConeSpec{sigma, model}, d));
  }
  if (sup <= 0.0) throw numerical_error("delta_threshold: degenerate cone sup");
  return sigma / (2.0 * sup);
}

BarrierField control_distance(const HamiltonianPtr& model, double sigma,
                              double delta, const GridPtr& grid,
                              const std::array<int, 3>& x0,
                              const BarrierOptions& options) {
  if (!model || !grid) throw config_error("control_distance: missing model/grid");
  if (!(sigma > 0.0)) throw config_error("control_distance: sigma must be > 0");
  if (delta < 0.0) throw config_error("control_distance: delta must be >= 0");
  const Grid& g = *grid;
  const int n = g.dim();
  const double h = g.spacing();
  const Hamiltonian& H = *model;

  const auto dirs = direction_set(n);
  std::vector<Eigen::VectorXd> steps;
  std::vector<double> flat_cost(dirs.size());  // delta == 0 segment costs
  steps.reserve(dirs.size());
  const Eigen::VectorXd origin = g.coords(x0);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < n; ++a) d[a] = h * dirs[k][a];
    steps.push_back(d);
    flat_cost[k] = straight_line_cost(H, sigma, 0.0, Eigen::VectorXd::Zero(n),
                                      d);
  }

  // Initial iterate: one-segment upper bound from x0.
  std::vector<double> v(g.node_count());
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    v[i] = straight_line_cost(H, sigma, delta, origin, g.coords(idx));
  });
  const std::int64_t src = g.flatten(x0);
  v[src] = 0.0;

  BarrierField out{x0, sigma, delta, GridField(grid, v, "barrier")};
  const std::int64_t total = g.node_count();
  int sweep = 0;
  double change = 0.0;
  for (; sweep < options.max_sweeps; ++sweep) {
    change = 0.0;
    const bool forward = (sweep % 2 == 0);
    for (std::int64_t s = 0; s < total; ++s) {
      const std::int64_t i = forward ? s : total - 1 - s;
      if (i == src) continue;
      const auto idx = g.unflatten(i);
      double best = v[i];
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        std::array<int, 3> j = idx;
        bool ok = true;
        for (int a = 0; a < n; ++a) {
          j[a] -= dirs[k][a];
          if (j[a] < 0 || j[a] >= g.counts()[a]) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        const double vy = v[g.flatten(j)];
        double cand;
        if (delta == 0.0) {
          cand = flat_cost[k] + vy;
        } else {
          const Eigen::VectorXd& d = steps[k];
          auto [t_lo, t_hi] = time_bracket(H, sigma, d.norm());
          cand = golden_min(
              [&](double t) {
                return segment_cost(H, sigma, delta, d, t) +
                       std::exp(-delta * t) * vy;
              },
              t_lo, t_hi, 60);
        }
        best = std::min(best, cand);
      }
      if (best < v[i]) {
        change = std::max(change, v[i] - best);
        v[i] = best;
      }
    }
    out.sweep_changes.push_back(change);
    if (change < options.sweep_tolerance) break;
  }
  if (change >= options.sweep_tolerance)
    throw numerical_error("control_distance: value iteration did not converge",
                          "last change " + std::to_string(change));
  out.sweeps = sweep + 1;
  out.value = GridField(grid, std::move(v), "barrier");
  return out;
}

ConeSandwichReport cone_sandwich_check(const BarrierField& barrier,
                                       const HamiltonianPtr& model,
                                       double slack) {
  ConeSandwichReport rep;
  rep.slack = slack;
  const Grid& g = *barrier.value.grid();
  const Eigen::VectorXd origin = g.coords(barrier.x0);
  const double sigma = barrier.sigma, delta = barrier.delta;
  const double ln_sqrt2 = 0.5 * std::numbers::ln2;
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    rep.nodes++;
    const double L = barrier.value[i];
    const Eigen::VectorXd d = g.coords(idx) - origin;
    if (d.norm() == 0.0) {
      if (std::abs(L) > 1e-12) rep.lower_violations++;
      return;
    }
    const double C = cone(ConeSpec{sigma, model}, d);
    rep.max_ratio = std::max(rep.max_ratio, L / C);
    const bool low_ok = L >= -1e-12 && L <= C * (1.0 + slack) + 1e-12;
    bool up_ok = true;
    if (delta / sigma * L < ln_sqrt2) {
      rep.upper_checked++;
      up_ok = C <= std::exp(4.0 * delta * L / sigma) * L * (1.0 + slack) + 1e-12;
      if (!up_ok) rep.upper_violations++;
    } else {
      rep.not_applicable++;
    }
    if (!low_ok) rep.lower_violations++;
    if ((!low_ok || !up_ok) && rep.violation_nodes.size() < 32)
      rep.violation_nodes.push_back(i);
  });
  rep.pass = rep.lower_violations == 0 && rep.upper_violations == 0;
  return rep;
}

double boundary_lipschitz_constant(const GridField& g) {
  const Grid& grd = *g.grid();
  std::vector<std::int64_t> bnodes;
  grd.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    if (grd.is_boundary(idx)) bnodes.push_back(i);
  });
  double lip = 0.0;
  const std::size_t nb = bnodes.size();
  const std::size_t stride = nb > 2048 ? nb / 2048 + 1 : 1;
  for (std::size_t a = 0; a < nb; a += stride) {
    const Eigen::VectorXd xa = grd.coords(bnodes[a]);
    for (std::size_t b = a + 1; b < nb; ++b) {
      const double dist = (grd.coords(bnodes[b]) - xa).norm();
      if (dist > 0.0)
        lip = std::max(lip, std::abs(g[bnodes[b]] - g[bnodes[a]]) / dist);
    }
  }
  return lip;
}

BoundaryLipschitzReport boundary_lipschitz_check(
    const GridField& u, const GridField& g, const HamiltonianPtr& model,
    double sigma, double delta,
    const std::vector<std::array<int, 3>>& boundary_points,
    const BarrierOptions& options) {
  if (!model) throw config_error("boundary_lipschitz_check: missing model");
  if (u.grid()->node_count() != g.grid()->node_count())
    throw input_error("boundary_lipschitz_check: field grid mismatch");
  const Grid& grd = *u.grid();
  const double lip = boundary_lipschitz_constant(g);
  const double floor = 8.0 * model->Lambda() * lip * lip;
  if (sigma <= 0.0)
    sigma = floor * 1.01 + (floor == 0.0 ? 1.0 : 0.0);
  else if (sigma <= floor)
    throw config_error(
        "boundary_lipschitz_check: sigma must exceed 8*Lambda*Lip(g)^2 = " +
        std::to_string(floor));

  BoundaryLipschitzReport rep;
  rep.sigma = sigma;
  rep.delta = delta;
  const double tol = 1e-8;
  for (const auto& x0 : boundary_points) {
    if (!grd.is_boundary(x0))
      throw input_error("boundary_lipschitz_check: sample point not on boundary");
    BarrierField bf = control_distance(model, sigma, delta, u.grid(), x0, options);
    const double g0 = g[grd.flatten(x0)];
    const Eigen::VectorXd origin = grd.coords(x0);
    BoundaryLipschitzReport::Point pt;
    pt.x0 = x0;
    grd.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
      const double L = bf.value[i];
      const double dv = u[i] - g0;
      const double defect = std::max(dv - L, -dv - L);
      if (defect > tol) {
        pt.failing_nodes++;
        pt.worst_defect = std::max(pt.worst_defect, defect);
      }
      const double dist = (grd.coords(idx) - origin).norm();
      if (dist > 0.0)
        pt.lipschitz_ratio = std::max(pt.lipschitz_ratio, std::abs(dv) / dist);
    });
    // Semiconcavity proxy: largest pure second difference of the barrier.
    const double h2 = grd.spacing() * grd.spacing();
    grd.for_each_node([&](std::int64_t, const std::array<int, 3>& idx) {
      if (grd.is_boundary(idx)) return;
      for (int a = 0; a < grd.dim(); ++a) {
        auto jm = idx, jp = idx;
        jm[a] -= 1;
        jp[a] += 1;
        const double d2 =
            (bf.value.at(jp) - 2.0 * bf.value.at(idx) + bf.value.at(jm)) / h2;
        rep.max_second_difference = std::max(rep.max_second_difference, d2);
      }
    });
    rep.points.push_back(pt);
  }
  rep.pass = std::all_of(rep.points.begin(), rep.points.end(),
                         [](const auto& p) { return p.failing_nodes == 0; });
  return rep;
}

}  // namespace amlab
