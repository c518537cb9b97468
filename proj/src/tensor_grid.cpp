#include "mfddm/tensor_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace mfddm {

Rect::Rect(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty()) throw std::invalid_argument("Rect: dimension must be at least 1");
  if (lo_.size() != hi_.size()) throw std::invalid_argument("Rect: lo/hi dimension mismatch");
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (!(lo_[k] < hi_[k])) {
      std::ostringstream msg;
      msg << "Rect: axis " << k << " has lo >= hi (" << lo_[k] << ", " << hi_[k] << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

Rect Rect::cube(std::size_t dim, double a, double b) {
  return Rect(std::vector<double>(dim, a), std::vector<double>(dim, b));
}

bool Rect::contains(std::span<const double> p) const {
  if (p.size() != dim()) return false;
  for (std::size_t k = 0; k < dim(); ++k) {
    const double tol = kLocateTolerance * extent(k);
    if (!(p[k] >= lo_[k] - tol && p[k] <= hi_[k] + tol)) return false;
  }
  return true;
}

Rect Rect::times(const Rect& other) const {
  std::vector<double> lo = lo_;
  std::vector<double> hi = hi_;
  lo.insert(lo.end(), other.lo_.begin(), other.lo_.end());
  hi.insert(hi.end(), other.hi_.begin(), other.hi_.end());
  return Rect(std::move(lo), std::move(hi));
}

TensorGrid::TensorGrid(Rect rect, std::vector<std::vector<double>> partitions)
    : rect_(std::move(rect)), partitions_(std::move(partitions)) {
  const std::size_t d = rect_.dim();
  if (partitions_.size() != d) throw std::invalid_argument("TensorGrid: one partition per axis required");
  for (std::size_t k = 0; k < d; ++k) {
    const auto& c = partitions_[k];
    if (c.size() < 2) throw std::invalid_argument("TensorGrid: partition needs at least two points");
    if (c.front() != rect_.lo()[k] || c.back() != rect_.hi()[k])
      throw std::invalid_argument("TensorGrid: partition endpoints must match the rectangle");
    for (std::size_t j = 1; j < c.size(); ++j)
      if (!(c[j - 1] < c[j])) throw std::invalid_argument("TensorGrid: partition must be strictly increasing");
  }
  strides_.resize(d);
  num_nodes_ = 1;
  num_elements_ = 1;
  for (std::size_t k = 0; k < d; ++k) {
    strides_[k] = num_nodes_;
    num_nodes_ *= partitions_[k].size();
    num_elements_ *= partitions_[k].size() - 1;
  }
  corner_offsets_.resize(std::size_t{1} << d);
  for (std::size_t a = 0; a < corner_offsets_.size(); ++a) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < d; ++k)
      if (a >> k & 1U) off += strides_[k];
    corner_offsets_[a] = off;
  }
}

TensorGrid TensorGrid::uniform(const Rect& rect, std::size_t n_per_axis) {
  if (n_per_axis == 0) throw std::invalid_argument("TensorGrid::uniform: n_per_axis must be >= 1");
  std::vector<std::vector<double>> parts(rect.dim());
  for (std::size_t k = 0; k < rect.dim(); ++k) {
    auto& c = parts[k];
    c.resize(n_per_axis + 1);
    const double lo = rect.lo()[k];
    const double hi = rect.hi()[k];
    const auto n = static_cast<double>(n_per_axis);
    // Convex-combination form keeps symmetric grids exactly symmetric.
    for (std::size_t j = 0; j <= n_per_axis; ++j) {
      const auto t = static_cast<double>(j);
      c[j] = (lo * (n - t) + hi * t) / n;
    }
  }
  return TensorGrid(rect, std::move(parts));
}

double TensorGrid::mesh_size() const {
  double h = 0.0;
  for (const auto& c : partitions_)
    for (std::size_t j = 1; j < c.size(); ++j) h = std::max(h, c[j] - c[j - 1]);
  return h;
}

std::size_t TensorGrid::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != dim()) throw std::out_of_range("TensorGrid::flat_index: wrong index dimension");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (index[k] >= partitions_[k].size()) throw std::out_of_range("TensorGrid::flat_index: index out of range");
    flat += index[k] * strides_[k];
  }
  return flat;
}

MultiIndex TensorGrid::multi_index(std::size_t flat) const {
  if (flat >= num_nodes_) throw std::out_of_range("TensorGrid::multi_index: flat index out of range");
  MultiIndex index(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    index[k] = flat % partitions_[k].size();
    flat /= partitions_[k].size();
  }
  return index;
}

Point TensorGrid::node_coords(std::span<const std::size_t> index) const {
  if (index.size() != dim()) throw std::out_of_range("TensorGrid::node_coords: wrong index dimension");
  Point x(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    if (index[k] >= partitions_[k].size()) throw std::out_of_range("TensorGrid::node_coords: index out of range");
    x[k] = partitions_[k][index[k]];
  }
  return x;
}

Point TensorGrid::node_coords(std::size_t flat) const {
  const auto index = multi_index(flat);
  return node_coords(index);
}

TensorGrid::Location TensorGrid::locate(std::span<const double> p) const {
  if (p.size() != dim()) throw std::invalid_argument("TensorGrid::locate: point dimension mismatch");
  Location loc{MultiIndex(dim()), std::vector<double>(dim())};
  for (std::size_t k = 0; k < dim(); ++k) {
    const auto& c = partitions_[k];
    const double tol = kLocateTolerance * rect_.extent(k);
    double x = p[k];
    if (!(x >= c.front() - tol && x <= c.back() + tol)) {
      std::ostringstream msg;
      msg << "point coordinate " << x << " on axis " << k << " is outside [" << c.front() << ", " << c.back()
          << "]";
      throw PointOutsideDomain(msg.str());
    }
    x = std::clamp(x, c.front(), c.back());
    // First partition point >= x, searched from c[1]; faces go to the lower cell.
    const auto it = std::lower_bound(c.begin() + 1, c.end(), x);
    const auto t = static_cast<std::size_t>(it - (c.begin() + 1));
    loc.element[k] = t;
    loc.local[k] = std::clamp((x - c[t]) / (c[t + 1] - c[t]), 0.0, 1.0);
  }
  return loc;
}

std::size_t TensorGrid::element_origin(std::span<const std::size_t> element) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dim(); ++k) flat += element[k] * strides_[k];
  return flat;
}

bool TensorGrid::is_boundary(std::size_t flat) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    const std::size_t n = partitions_[k].size();
    const std::size_t j = flat % n;
    if (j == 0 || j == n - 1) return true;
    flat /= n;
  }
  return false;
}

std::vector<MultiIndex> TensorGrid::boundary_nodes() const {
  std::vector<MultiIndex> out;
  for (std::size_t flat : boundary_flat()) out.push_back(multi_index(flat));
  return out;
}

std::vector<std::size_t> TensorGrid::boundary_flat() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_nodes_; ++i)
    if (is_boundary(i)) out.push_back(i);
  return out;
}

std::vector<std::size_t> TensorGrid::interior_flat() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < num_nodes_; ++i)
    if (!is_boundary(i)) out.push_back(i);
  return out;
}

ChartField::ChartField(std::shared_ptr<const TensorGrid> grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("ChartField: null grid");
  dofs_.assign(grid_->num_nodes(), 0.0);
}

ChartField::ChartField(std::shared_ptr<const TensorGrid> grid, std::vector<double> dofs)
    : grid_(std::move(grid)), dofs_(std::move(dofs)) {
  if (!grid_) throw std::invalid_argument("ChartField: null grid");
  if (dofs_.size() != grid_->num_nodes()) throw std::invalid_argument("ChartField: dof count != node count");
}

double eval_q1(const ChartField& field, const TensorGrid::Location& where) {
  const auto& grid = field.grid();
  const std::size_t d = grid.dim();
  const std::size_t origin = grid.element_origin(where.element);
  const auto& offsets = grid.corner_offsets();
  const auto dofs = field.dofs();
  double value = 0.0;
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    double phi = 1.0;
    for (std::size_t k = 0; k < d; ++k) phi *= (a >> k & 1U) ? where.local[k] : 1.0 - where.local[k];
    value += phi * dofs[origin + offsets[a]];
  }
  return value;
}

double eval_q1(const ChartField& field, std::span<const double> p) {
  return eval_q1(field, field.grid().locate(p));
}

ChartField interpolate(std::shared_ptr<const TensorGrid> grid, const PointFunction& func) {
  std::vector<double> dofs(grid->num_nodes());
  MultiIndex index(grid->dim(), 0);
  Point x(grid->dim());
  for (std::size_t flat = 0; flat < grid->num_nodes(); ++flat) {
    for (std::size_t k = 0; k < grid->dim(); ++k) x[k] = grid->partition(k)[index[k]];
    dofs[flat] = func(x);
    for (std::size_t k = 0; k < grid->dim(); ++k) {
      if (++index[k] < grid->partition(k).size()) break;
      index[k] = 0;
    }
  }
  return ChartField(std::move(grid), std::move(dofs));
}

}  // namespace mfddm
