#include "amlab/grid.hpp"

#include <cmath>

#include "amlab/errors.hpp"

namespace amlab {

std::shared_ptr<const Grid> Grid::build(const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi,
                                        const std::vector<int>& nodes_per_axis) {
  const int n = static_cast<int>(lo.size());
  if (n < 1 || n > 3) throw config_error("grid: dimension must be in {1,2,3}");
  if (hi.size() != n || static_cast<int>(nodes_per_axis.size()) != n)
    throw config_error("grid: inconsistent box/count dimensions");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = n;
  g->lo_ = lo;
  g->hi_ = hi;
  g->counts_ = nodes_per_axis;
  g->total_ = 1;
  g->interior_ = 1;
  for (int d = 0; d < n; ++d) {
    if (!(hi[d] > lo[d])) throw config_error("grid: degenerate box");
    if (nodes_per_axis[d] < 3) throw config_error("grid: need >= 3 nodes per axis");
    double hd = (hi[d] - lo[d]) / (nodes_per_axis[d] - 1);
    if (d == 0)
      g->h_ = hd;
    else if (std::abs(hd - g->h_) > 1e-12 * std::max(1.0, g->h_))
      throw config_error("grid: unequal spacing across axes (h_" +
                         std::to_string(d) + " = " + std::to_string(hd) +
                         ", h_0 = " + std::to_string(g->h_) + ")");
    g->total_ *= nodes_per_axis[d];
    g->interior_ *= nodes_per_axis[d] - 2;
  }
  g->stride_ = {1, 1, 1};
  for (int d = n - 2; d >= 0; --d)
    g->stride_[d] = g->stride_[d + 1] * g->counts_[d + 1];
  return g;
}

std::shared_ptr<const Grid> Grid::build(const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi, int nodes) {
  return build(lo, hi, std::vector<int>(lo.size(), nodes));
}

std::int64_t Grid::flatten(const std::array<int, 3>& idx) const {
  std::int64_t f = 0;
  for (int d = 0; d < dim_; ++d) f += idx[d] * stride_[d];
  return f;
}

std::array<int, 3> Grid::unflatten(std::int64_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    idx[d] = static_cast<int>(flat / stride_[d]);
    flat %= stride_[d];
  }
  return idx;
}

bool Grid::is_boundary(const std::array<int, 3>& idx) const {
  for (int d = 0; d < dim_; ++d)
    if (idx[d] == 0 || idx[d] == counts_[d] - 1) return true;
  return false;
}

Eigen::VectorXd Grid::coords(const std::array<int, 3>& idx) const {
  Eigen::VectorXd x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = lo_[d] + h_ * idx[d];
  return x;
}

void Grid::for_each_node(
    const std::function<void(std::int64_t, const std::array<int, 3>&)>& f) const {
  std::array<int, 3> idx{0, 0, 0};
  for (std::int64_t i = 0; i < total_; ++i) {
    f(i, idx);
    for (int d = dim_ - 1; d >= 0; --d) {
      if (++idx[d] < counts_[d]) break;
      idx[d] = 0;
    }
  }
}

GridField::GridField(GridPtr grid, std::vector<double> values, std::string label)
    : grid_(std::move(grid)), values_(std::move(values)), label_(std::move(label)) {
  if (!grid_) throw input_error("field: missing grid");
  if (static_cast<std::int64_t>(values_.size()) != grid_->node_count())
    throw input_error("field: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw input_error("field: non-finite value");
}

GridField::GridField(GridPtr grid,
                     const std::function<double(const Eigen::VectorXd&)>& f,
                     std::string label)
    : grid_(std::move(grid)), label_(std::move(label)) {
  if (!grid_) throw input_error("field: missing grid");
  values_.resize(grid_->node_count());
  grid_->for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    values_[i] = f(grid_->coords(idx));
    if (!std::isfinite(values_[i])) throw input_error("field: non-finite value");
  });
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::max_abs_boundary() const {
  double m = 0.0;
  grid_->for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    if (grid_->is_boundary(idx)) m = std::max(m, std::abs(values_[i]));
  });
  return m;
}

double GridField::interpolate(const Eigen::VectorXd& x) const {
  const Grid& g = *grid_;
  const int n = g.dim();
  if (x.size() != n) throw input_error("interpolate: dimension mismatch");
  std::array<int, 3> cell{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) {
    double s = (x[d] - g.lo()[d]) / g.spacing();
    if (s < -1e-9 || s > g.counts()[d] - 1 + 1e-9)
      throw input_error("interpolate: point outside grid box");
    s = std::clamp(s, 0.0, static_cast<double>(g.counts()[d] - 1));
    cell[d] = std::min(static_cast<int>(std::floor(s)), g.counts()[d] - 2);
    frac[d] = s - cell[d];
  }
  double acc = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> idx = cell;
    for (int d = 0; d < n; ++d) {
      if (c & (1 << d)) {
        idx[d] += 1;
        w *= frac[d];
      } else {
        w *= 1.0 - frac[d];
      }
    }
    acc += w * values_[g.flatten(idx)];
  }
  return acc;
}

namespace {

// One-dimensional derivative along axis d: centered in the interior,
// second-order one-sided at the ends.
double axis_derivative(const GridField& f, std::array<int, 3> idx, int d) {
  const Grid& g = *f.grid();
  const double h = g.spacing();
  const int c = g.counts()[d];
  auto v = [&](int i) {
    auto j = idx;
    j[d] = i;
    return f.at(j);
  };
  const int i = idx[d];
  if (i == 0) return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
  if (i == c - 1)
    return (3.0 * v(c - 1) - 4.0 * v(c - 2) + v(c - 3)) / (2.0 * h);
  return (v(i + 1) - v(i - 1)) / (2.0 * h);
}

}  // namespace

Eigen::VectorXd gradient_at(const GridField& field, const std::array<int, 3>& idx) {
  const int n = field.grid()->dim();
  Eigen::VectorXd gvec(n);
  for (int d = 0; d < n; ++d) gvec[d] = axis_derivative(field, idx, d);
  return gvec;
}

std::vector<GridField> gradient(const GridField& field) {
  const Grid& g = *field.grid();
  const int n = g.dim();
  std::vector<std::vector<double>> comp(n, std::vector<double>(g.node_count()));
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& idx) {
    for (int d = 0; d < n; ++d) comp[d][i] = axis_derivative(field, idx, d);
  });
  std::vector<GridField> out;
  out.reserve(n);
  for (int d = 0; d < n; ++d)
    out.emplace_back(field.grid(), std::move(comp[d]),
                     field.label() + "_x" + std::to_string(d + 1));
  return out;
}

Eigen::MatrixXd hessian_at(const GridField& field, const std::array<int, 3>& idx) {
  const Grid& g = *field.grid();
  if (g.is_boundary(idx)) throw input_error("hessian_at: interior nodes only");
  const int n = g.dim();
  const double h = g.spacing();
  Eigen::MatrixXd H(n, n);
  auto v = [&](int di, int dj, int si, int sj) {
    auto j = idx;
    j[di] += si;
    j[dj] += sj;
    return field.at(j);
  };
  const double center = field.at(idx);
  for (int a = 0; a < n; ++a) {
    H(a, a) = (v(a, a, 1, 0) - 2.0 * center + v(a, a, -1, 0)) / (h * h);
    for (int b = a + 1; b < n; ++b) {
      H(a, b) = H(b, a) = (v(a, b, 1, 1) + v(a, b, -1, -1) - v(a, b, 1, -1) -
                           v(a, b, -1, 1)) /
                          (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace amlab
