#include "mfddm/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfddm {

namespace {

double root(double v) { return std::sqrt(std::max(v, 0.0)); }

}  // namespace

ErrorReport error_report(std::span<const ChartField> exact, std::span<const ChartField> approx,
                         std::span<const AssembledChart* const> assembled,
                         std::span<const SparseMatrix* const> flat_stiffness) {
  const std::size_t m = exact.size();
  if (approx.size() != m || assembled.size() != m || flat_stiffness.size() != m)
    throw std::invalid_argument("error_report: chart counts differ");

  ErrorReport report;
  report.per_chart.resize(m);
  std::vector<double> e;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& ac = *assembled[i];
    const std::size_t n = ac.grid->num_nodes();
    if (exact[i].dofs().size() != n || approx[i].dofs().size() != n || flat_stiffness[i]->rows() != n)
      throw std::invalid_argument("error_report: grid mismatch on a chart");
    e.resize(n);
    auto& c = report.per_chart[i];
    for (std::size_t k = 0; k < n; ++k) {
      e[k] = exact[i][k] - approx[i][k];
      c.linf = std::max(c.linf, std::abs(e[k]));
    }
    const double mass = ac.mass.quadratic_form(e);
    const double energy = ac.stiffness.quadratic_form(e);
    c.l2 = root(mass);
    c.energy = root(energy);
    c.h1_metric = root(energy - ac.b * mass);
    c.h1_semi = root(flat_stiffness[i]->quadratic_form(e));

    report.linf = std::max(report.linf, c.linf);
    report.l2 = std::max(report.l2, c.l2);
    report.energy = std::max(report.energy, c.energy);
    report.h1_metric = std::max(report.h1_metric, c.h1_metric);
    report.h1_semi = std::max(report.h1_semi, c.h1_semi);
  }
  return report;
}

double fitted_order(std::span<const double> h, std::span<const double> error) {
  if (h.size() != error.size()) throw std::invalid_argument("fitted_order: size mismatch");
  if (h.size() < 2) throw std::invalid_argument("fitted_order: at least two rows are required");
  const auto n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0) || !(error[k] > 0.0)) throw std::invalid_argument("fitted_order: h and errors must be positive");
    const double x = std::log(h[k]);
    const double y = std::log(error[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fitted_order: mesh sizes must be distinct");
  return (n * sxy - sx * sy) / denom;
}

ConvergenceOrders convergence_rates(std::span<const std::pair<double, ErrorReport>> rows) {
  if (rows.size() < 2) throw std::invalid_argument("convergence_rates: at least two rows are required");
  std::vector<double> h, linf, l2, h1, energy;
  for (const auto& [hh, r] : rows) {
    h.push_back(hh);
    linf.push_back(r.linf);
    l2.push_back(r.l2);
    h1.push_back(r.h1_semi);
    energy.push_back(r.energy);
  }
  return {fitted_order(h, linf), fitted_order(h, l2), fitted_order(h, h1), fitted_order(h, energy)};
}

}  // namespace mfddm
