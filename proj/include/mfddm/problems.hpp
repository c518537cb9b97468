#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "mfddm/atlas.hpp"

namespace mfddm {

/// A function on the manifold given through its chart representatives.
using ChartFunction = std::function<double(std::size_t chart, std::span<const double> x)>;

/// -Lap u + b u = f on a closed manifold, with the exact solution when known.
struct Problem {
  std::string name;
  std::shared_ptr<const Atlas> atlas;
  double b = 1.0;
  ChartFunction f;
  ChartFunction exact;  // may be empty

  bool has_exact() const { return static_cast<bool>(exact); }

  /// Same problem on the relabelled atlas (see Atlas::reordered).
  Problem reordered(const std::vector<std::size_t>& order) const;
};

/// S^4, u = y_5, f = (4 + b) u.
Problem s4_problem(double r, double b = 1.0);

/// CP^2, u = sum_j a_j |w_j|^2 on normalised homogeneous coordinates,
/// f = (12 + b) u - 4 sum_j a_j.
Problem cp2_problem(double r, double b = 4.0, std::array<double, 3> a = {0.0, 1.0, -1.0});

/// S^2 x S^2 with the product metric, u = y_3 + y'_3, f = (2 + b) u.
Problem s2xs2_problem(double r, double b = 2.0);

/// |-Lap_h u + b u - f| at x, with Lap_h u = (1/w) sum_a D_a (sum_c K_ac D_c u)
/// using central differences of width `step` on the exact solution. Requires
/// x to sit at least 2 * step inside the chart rectangle.
double strong_residual_check(const Problem& problem, std::size_t chart, std::span<const double> x, double step);

}  // namespace mfddm
