#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace amlab {

// Uniform Cartesian grid on a box, n in {1,2,3}, equal spacing h on every
// axis.  Nodes are flattened row-major with the last axis fastest.  A node
// is boundary iff any coordinate index is extremal.
class Grid {
 public:
  static std::shared_ptr<const Grid> build(const Eigen::VectorXd& lo,
                                           const Eigen::VectorXd& hi,
                                           const std::vector<int>& nodes_per_axis);
  // Convenience: the same node count on every axis.
  static std::shared_ptr<const Grid> build(const Eigen::VectorXd& lo,
                                           const Eigen::VectorXd& hi, int nodes);

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const std::vector<int>& counts() const { return counts_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  std::int64_t node_count() const { return total_; }
  std::int64_t interior_count() const { return interior_; }
  std::int64_t boundary_count() const { return total_ - interior_; }

  std::int64_t flatten(const std::array<int, 3>& idx) const;
  std::array<int, 3> unflatten(std::int64_t flat) const;
  bool is_boundary(const std::array<int, 3>& idx) const;
  Eigen::VectorXd coords(const std::array<int, 3>& idx) const;
  Eigen::VectorXd coords(std::int64_t flat) const { return coords(unflatten(flat)); }

  // Visits every node in flat order.
  void for_each_node(const std::function<void(std::int64_t, const std::array<int, 3>&)>& f) const;

 private:
  Grid() = default;
  int dim_ = 0;
  Eigen::VectorXd lo_, hi_;
  std::vector<int> counts_;
  double h_ = 0.0;
  std::int64_t total_ = 0, interior_ = 0;
  std::array<std::int64_t, 3> stride_{1, 1, 1};
};

using GridPtr = std::shared_ptr<const Grid>;

// One scalar per node.  Values are validated finite on construction.
class GridField {
 public:
  GridField(GridPtr grid, std::vector<double> values, std::string label = {});
  // Samples a function of the node coordinates.
  GridField(GridPtr grid, const std::function<double(const Eigen::VectorXd&)>& f,
            std::string label = {});

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::string& label() const { return label_; }
  double operator[](std::int64_t i) const { return values_[i]; }
  double at(const std::array<int, 3>& idx) const {
    return values_[grid_->flatten(idx)];
  }

  double max_abs() const;
  double max_abs_boundary() const;

  // Multilinear interpolation at an arbitrary point inside the box.
  double interpolate(const Eigen::VectorXd& x) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::string label_;
};

// Discrete gradient: centered second-order differences at interior nodes,
// one-sided second-order at boundary nodes.  Returns one field per axis.
std::vector<GridField> gradient(const GridField& field);

// Gradient vector at a single node (same stencils as gradient()).
Eigen::VectorXd gradient_at(const GridField& field, const std::array<int, 3>& idx);

// Discrete Hessian at an interior node: centered second differences on the
// diagonal and 4-point cross differences off it.  Symmetric by construction.
Eigen::MatrixXd hessian_at(const GridField& field, const std::array<int, 3>& idx);

// Serialization: flat CSV (index coordinates + value) and a compact binary
// layout (header with extents/counts, then row-major doubles).
void write_csv(const GridField& field, const std::string& path);
void write_binary(const GridField& field, const std::string& path);
GridField read_binary(const std::string& path);

}  // namespace amlab
