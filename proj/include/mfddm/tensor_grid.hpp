#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfddm {

using Point = std::vector<double>;
using MultiIndex = std::vector<std::size_t>;

class PointOutsideDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box prod_k [lo[k], hi[k]].
class Rect {
 public:
  Rect(std::vector<double> lo, std::vector<double> hi);

  /// [a, b]^d
  static Rect cube(std::size_t dim, double a, double b);

  std::size_t dim() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  double extent(std::size_t axis) const { return hi_[axis] - lo_[axis]; }

  /// Closed-box membership with the per-axis tolerance locate() uses.
  bool contains(std::span<const double> p) const;

  /// Cartesian product of two boxes (this factor first).
  Rect times(const Rect& other) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Relative per-axis slack for point location: 1e-10 * (hi - lo).
inline constexpr double kLocateTolerance = 1e-10;

/// Structured grid on a d-rectangle. Nodes are ordered lexicographically
/// with axis 0 fastest; elements use the same ordering over cell indices.
class TensorGrid {
 public:
  struct Location {
    MultiIndex element;         // cell index t_k in [0, N_k)
    std::vector<double> local;  // s_k in [0, 1]
  };

  TensorGrid(Rect rect, std::vector<std::vector<double>> partitions);

  static TensorGrid uniform(const Rect& rect, std::size_t n_per_axis);

  std::size_t dim() const { return rect_.dim(); }
  const Rect& rect() const { return rect_; }
  const std::vector<double>& partition(std::size_t axis) const { return partitions_[axis]; }
  std::size_t cells(std::size_t axis) const { return partitions_[axis].size() - 1; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_elements() const { return num_elements_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  /// Largest cell width over all axes.
  double mesh_size() const;

  std::size_t flat_index(std::span<const std::size_t> index) const;
  MultiIndex multi_index(std::size_t flat) const;

  Point node_coords(std::span<const std::size_t> index) const;
  Point node_coords(std::size_t flat) const;

  Location locate(std::span<const double> p) const;

  /// Flat index of the lowest corner node of a cell.
  std::size_t element_origin(std::span<const std::size_t> element) const;

  /// Flat node offsets of the 2^d corners relative to element_origin; bit k
  /// of the corner number selects the upper node along axis k.
  const std::vector<std::size_t>& corner_offsets() const { return corner_offsets_; }

  bool is_boundary(std::size_t flat) const;
  std::vector<MultiIndex> boundary_nodes() const;
  /// Flat indices, ascending.
  std::vector<std::size_t> boundary_flat() const;
  std::vector<std::size_t> interior_flat() const;

 private:
  Rect rect_;
  std::vector<std::vector<double>> partitions_;
  std::vector<std::size_t> strides_;
  std::vector<std::size_t> corner_offsets_;
  std::size_t num_nodes_ = 0;
  std::size_t num_elements_ = 0;
};

/// Nodal values of a Q1 function on one grid.
class ChartField {
 public:
  explicit ChartField(std::shared_ptr<const TensorGrid> grid);
  ChartField(std::shared_ptr<const TensorGrid> grid, std::vector<double> dofs);

  const TensorGrid& grid() const { return *grid_; }
  const std::shared_ptr<const TensorGrid>& grid_ptr() const { return grid_; }
  std::span<const double> dofs() const { return dofs_; }
  std::span<double> dofs() { return dofs_; }
  double operator[](std::size_t i) const { return dofs_[i]; }
  double& operator[](std::size_t i) { return dofs_[i]; }

 private:
  std::shared_ptr<const TensorGrid> grid_;
  std::vector<double> dofs_;
};

/// Multilinear blend of the 2^d corner values of one located cell.
double eval_q1(const ChartField& field, const TensorGrid::Location& where);
double eval_q1(const ChartField& field, std::span<const double> p);

using PointFunction = std::function<double(std::span<const double>)>;

ChartField interpolate(std::shared_ptr<const TensorGrid> grid, const PointFunction& func);

}  // namespace mfddm
