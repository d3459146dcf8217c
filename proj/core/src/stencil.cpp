#include <cmath>

#include "amlab/errors.hpp"
#include "amlab/pde_solver.hpp"

namespace amlab {

SubWindow SubWindow::full(const Grid& g) {
  SubWindow w;
  for (int d = 0; d < g.dim(); ++d) w.hi[d] = g.counts()[d] - 1;
  return w;
}

SubWindow SubWindow::from_box(const Grid& g, const Eigen::VectorXd& box_lo,
                              const Eigen::VectorXd& box_hi) {
  SubWindow w;
  for (int d = 0; d < g.dim(); ++d) {
    w.lo[d] = static_cast<int>(std::ceil((box_lo[d] - g.lo()[d]) / g.spacing() - 1e-9));
    w.hi[d] = static_cast<int>(std::floor((box_hi[d] - g.lo()[d]) / g.spacing() + 1e-9));
    w.lo[d] = std::max(w.lo[d], 0);
    w.hi[d] = std::min(w.hi[d], g.counts()[d] - 1);
    if (w.hi[d] - w.lo[d] < 2)
      throw input_error("window: fewer than 3 nodes along an axis");
  }
  return w;
}

bool SubWindow::contains(const std::array<int, 3>& idx, int dim) const {
  for (int d = 0; d < dim; ++d)
    if (idx[d] < lo[d] || idx[d] > hi[d]) return false;
  return true;
}

bool SubWindow::is_window_boundary(const std::array<int, 3>& idx, int dim) const {
  for (int d = 0; d < dim; ++d)
    if (idx[d] == lo[d] || idx[d] == hi[d]) return true;
  return false;
}

std::int64_t LinearizedStencil::interior_local(std::int64_t grid_flat) const {
  return interior_map_[grid_flat];
}
std::int64_t LinearizedStencil::boundary_local(std::int64_t grid_flat) const {
  return boundary_map_[grid_flat];
}

LinearizedStencil LinearizedStencil::assemble(const GridField& u,
                                              const Hamiltonian& model,
                                              double eps, bool include_drift) {
  return assemble(u, model, eps, SubWindow::full(*u.grid()), include_drift);
}

LinearizedStencil LinearizedStencil::assemble(const GridField& u,
                                              const Hamiltonian& model,
                                              double eps, const SubWindow& window,
                                              bool include_drift) {
  const GridPtr& gp = u.grid();
  const Grid& g = *gp;
  const int n = g.dim();
  if (model.dim() != n) throw input_error("stencil: model/grid dimension mismatch");
  const double h = g.spacing();

  LinearizedStencil st;
  st.grid_ = gp;
  st.window_ = window;
  st.eps_ = eps;
  st.has_drift_ = include_drift;
  st.interior_map_.assign(g.node_count(), -1);
  st.boundary_map_.assign(g.node_count(), -1);

  // Enumerate window nodes in flat-grid order: interior vs window boundary.
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    if (!window.contains(idx, n)) return;
    if (window.is_window_boundary(idx, n)) {
      st.boundary_map_[i] = static_cast<std::int64_t>(st.boundary_.size());
      st.boundary_.push_back(i);
    } else {
      st.interior_map_[i] = static_cast<std::int64_t>(st.interior_.size());
      st.interior_.push_back(i);
    }
  });

  std::vector<Eigen::Triplet<double>> ta, tb;
  const std::int64_t rows = st.interior_size();
  ta.reserve(rows * (2 * n + 2 * n * n + 1));
  tb.reserve(rows);

  // Row-local accumulation keyed by grid flat index keeps duplicate triplets
  // to a minimum and lets us test monotonicity per row.
  struct Entry {
    std::int64_t node;
    double coeff;
  };
  std::vector<Entry> row;
  const double h2 = h * h;

  for (std::int64_t r = 0; r < rows; ++r) {
    const std::int64_t flat = st.interior_[r];
    const auto idx = g.unflatten(flat);
    row.clear();
    auto add = [&](std::array<int, 3> j, double c) {
      row.push_back({g.flatten(j), c});
    };
    auto shifted = [&](int d, int s, int d2 = -1, int s2 = 0) {
      auto j = idx;
      j[d] += s;
      if (d2 >= 0) j[d2] += s2;
      return j;
    };

    const Eigen::VectorXd du = gradient_at(u, idx);
    const auto ev = model.eval(du);
    const Eigen::VectorXd& gH = ev.gradient;

    // -a_ii v_{x_i x_i}
    for (int d = 0; d < n; ++d) {
      const double aii = gH[d] * gH[d] + eps;
      add(idx, 2.0 * aii / h2);
      add(shifted(d, +1), -aii / h2);
      add(shifted(d, -1), -aii / h2);
    }
    // -2 a_ij v_{x_i x_j}, sign-split 4-point cross stencil
    for (int di = 0; di < n; ++di) {
      for (int dj = di + 1; dj < n; ++dj) {
        const double aij = gH[di] * gH[dj];
        if (aij == 0.0) continue;
        const double m = std::abs(aij) / h2;
        add(idx, -2.0 * m);
        add(shifted(di, +1), m);
        add(shifted(di, -1), m);
        add(shifted(dj, +1), m);
        add(shifted(dj, -1), m);
        if (aij > 0.0) {
          add(shifted(di, +1, dj, +1), -m);
          add(shifted(di, -1, dj, -1), -m);
        } else {
          add(shifted(di, +1, dj, -1), -m);
          add(shifted(di, -1, dj, +1), -m);
        }
      }
    }
    // -b_l v_{x_l}, upwinded
    if (include_drift) {
      const Eigen::MatrixXd d2u = hessian_at(u, idx);
      const Eigen::VectorXd dH = d2u * gH;            // D[H(Du)]
      const Eigen::VectorXd b = 2.0 * ev.hessian * dH;
      for (int d = 0; d < n; ++d) {
        if (b[d] > 0.0) {
          add(idx, b[d] / h);
          add(shifted(d, +1), -b[d] / h);
        } else if (b[d] < 0.0) {
          add(idx, -b[d] / h);
          add(shifted(d, -1), b[d] / h);
        }
      }
    }

    // Scatter to A/B and test the M-matrix row conditions.
    double diag = 0.0, worst_offdiag = 0.0;
    for (const Entry& e : row) {
      if (e.node == flat) {
        diag += e.coeff;
        continue;
      }
      if (st.interior_map_[e.node] >= 0)
        ta.emplace_back(r, st.interior_map_[e.node], e.coeff);
      else if (st.boundary_map_[e.node] >= 0)
        tb.emplace_back(r, st.boundary_map_[e.node], e.coeff);
      else
        throw input_error("stencil: window too small for its own stencil");
    }
    ta.emplace_back(r, r, diag);

    // Off-diagonal sign check needs the summed coefficients per neighbor.
    std::sort(row.begin(), row.end(),
              [](const Entry& a, const Entry& b) { return a.node < b.node; });
    for (std::size_t k = 0; k < row.size();) {
      std::size_t k2 = k;
      double c = 0.0;
      while (k2 < row.size() && row[k2].node == row[k].node) c += row[k2++].coeff;
      if (row[k].node != flat) worst_offdiag = std::max(worst_offdiag, c);
      k = k2;
    }
    st.monotonicity_.rows++;
    if (worst_offdiag > 1e-12 * std::max(1.0, diag) || diag <= 0.0) {
      st.monotonicity_.violating_rows++;
      if (st.monotonicity_.sample_nodes.size() < 32)
        st.monotonicity_.sample_nodes.push_back(flat);
    }
  }

  st.A_.resize(rows, rows);
  st.A_.setFromTriplets(ta.begin(), ta.end());
  st.B_.resize(rows, st.boundary_size());
  st.B_.setFromTriplets(tb.begin(), tb.end());
  return st;
}

Eigen::VectorXd LinearizedStencil::apply(const Eigen::VectorXd& v_interior,
                                         const Eigen::VectorXd& v_boundary) const {
  return A_ * v_interior + B_ * v_boundary;
}

Eigen::VectorXd LinearizedStencil::apply(const GridField& v) const {
  if (v.grid() != grid_ && v.grid()->node_count() != grid_->node_count())
    throw input_error("stencil: field grid mismatch");
  Eigen::VectorXd vi(interior_size()), vb(boundary_size());
  for (std::int64_t k = 0; k < interior_size(); ++k) vi[k] = v[interior_[k]];
  for (std::int64_t k = 0; k < boundary_size(); ++k) vb[k] = v[boundary_[k]];
  return apply(vi, vb);
}

}  // namespace amlab
