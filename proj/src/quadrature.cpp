#include "mfddm/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mfddm {

void gauss_legendre(std::size_t q, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  const auto n = static_cast<double>(q);
  for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
    // Chebyshev-like initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= q; ++k) {
        const auto kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      // Re-evaluate the derivative at the converged root.
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= q; ++k) {
        const auto kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[q - 1 - i] = x;
    weights[i] = w;
    weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) nodes[q / 2] = 0.0;
}

QuadratureRule quadrature_rule(std::size_t dim, std::size_t q) {
  if (q < 1 || q > kMaxQuadraturePoints)
    throw std::invalid_argument("quadrature_rule: points per axis must be in [1, 10]");
  if (dim == 0) throw std::invalid_argument("quadrature_rule: dimension must be >= 1");

  QuadratureRule rule;
  rule.dim = dim;
  rule.points_per_axis = q;
  std::vector<double> x, w;
  gauss_legendre(q, x, w);
  rule.nodes_1d.resize(q);
  rule.weights_1d.resize(q);
  for (std::size_t i = 0; i < q; ++i) {
    rule.nodes_1d[i] = 0.5 * (x[i] + 1.0);
    rule.weights_1d[i] = 0.5 * w[i];
  }

  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= q;
  rule.points.resize(total * dim);
  rule.weights.resize(total);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    double weight = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t i = rest % q;
      rest /= q;
      rule.points[p * dim + k] = rule.nodes_1d[i];
      weight *= rule.weights_1d[i];
    }
    rule.weights[p] = weight;
  }
  return rule;
}

}  // namespace mfddm
