#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mfddm/fem.hpp"
#include "mfddm/sparse_matrix.hpp"
#include "mfddm/tensor_grid.hpp"

namespace mfddm {

struct ChartErrors {
  double linf = 0.0;
  double l2 = 0.0;        // (e, e)_i with the metric volume weight
  double h1_semi = 0.0;   // parameter-domain Dirichlet form
  double energy = 0.0;    // a_i(e, e)
  double h1_metric = 0.0; // gradient part of a_i only
};

/// Errors of a per-chart field tuple; each global measure is the maximum
/// over charts.
struct ErrorReport {
  double linf = 0.0;
  double l2 = 0.0;
  double h1_semi = 0.0;
  double energy = 0.0;
  double h1_metric = 0.0;
  std::vector<ChartErrors> per_chart;
};

ErrorReport error_report(std::span<const ChartField> exact, std::span<const ChartField> approx,
                         std::span<const AssembledChart* const> assembled,
                         std::span<const SparseMatrix* const> flat_stiffness);

struct ConvergenceOrders {
  double linf = 0.0;
  double l2 = 0.0;
  double h1_semi = 0.0;
  double energy = 0.0;
};

/// Least-squares slope of log(error) against log(h).
double fitted_order(std::span<const double> h, std::span<const double> error);

ConvergenceOrders convergence_rates(std::span<const std::pair<double, ErrorReport>> rows);

}  // namespace mfddm
