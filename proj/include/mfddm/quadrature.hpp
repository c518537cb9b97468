#pragma once

#include <cstddef>
#include <vector>

namespace mfddm {

/// Tensor Gauss-Legendre rule on the unit cube [0, 1]^d.
struct QuadratureRule {
  std::size_t dim = 0;
  std::size_t points_per_axis = 0;
  std::vector<double> nodes_1d;    // on [0, 1]
  std::vector<double> weights_1d;  // sum to 1
  std::vector<double> points;      // size() * dim, axis 0 fastest within a point
  std::vector<double> weights;     // products of 1-D weights

  std::size_t size() const { return weights.size(); }
  const double* point(std::size_t i) const { return points.data() + i * dim; }
};

inline constexpr std::size_t kMaxQuadraturePoints = 10;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton's method
/// on the Legendre recurrence.
void gauss_legendre(std::size_t q, std::vector<double>& nodes, std::vector<double>& weights);

/// q in [1, kMaxQuadraturePoints]; exact for per-axis degree <= 2q - 1.
QuadratureRule quadrature_rule(std::size_t dim, std::size_t q = 2);

}  // namespace mfddm
