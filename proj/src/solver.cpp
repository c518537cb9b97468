#include "mfddm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace mfddm {

namespace {

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

void true_residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                   std::vector<double>& r, std::size_t threads) {
  a.multiply(x, r, threads);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

}  // namespace

std::size_t default_max_iterations(std::size_t n) {
  return static_cast<std::size_t>(10.0 * std::sqrt(static_cast<double>(n))) + 1000;
}

CgReport cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const CgOptions& options) {
  const std::size_t n = b.size();
  if (a.rows() != n || a.cols() != n || x.size() != n) throw std::invalid_argument("cg: dimension mismatch");
  if (!(options.tol > 0.0)) throw std::invalid_argument("cg: tolerance must be positive");

  CgReport report;
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }

  const std::size_t max_iter = options.max_iter ? options.max_iter : default_max_iterations(n);
  const std::size_t refresh = options.residual_refresh ? options.residual_refresh : 50;

  std::vector<double> r(n), z, p(n), q(n), inv_diag;
  if (options.jacobi) {
    inv_diag = a.diagonal();
    for (auto& v : inv_diag) v = 1.0 / v;
    z.resize(n);
  }
  auto precondition = [&] {
    if (!options.jacobi) return;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  };
  auto residual_vector = [&]() -> std::span<const double> { return options.jacobi ? z : r; };

  true_residual(a, b, x, r, options.threads);
  double rel = std::sqrt(dot(r, r)) / b_norm;
  report.final_relative_residual = rel;
  if (rel <= options.tol) {
    report.converged = true;
    return report;
  }

  precondition();
  auto zr = residual_vector();
  std::copy(zr.begin(), zr.end(), p.begin());
  double rz = dot(r, zr);

  while (report.iterations < max_iter) {
    a.multiply(p, q, options.threads);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++report.iterations;

    bool refreshed = false;
    if (report.iterations % refresh == 0) {
      true_residual(a, b, x, r, options.threads);
      refreshed = true;
    }
    rel = std::sqrt(dot(r, r)) / b_norm;
    if (rel <= options.tol && !refreshed) {
      // Accept only on the true residual.
      true_residual(a, b, x, r, options.threads);
      rel = std::sqrt(dot(r, r)) / b_norm;
    }
    report.final_relative_residual = rel;
    if (rel <= options.tol) {
      report.converged = true;
      return report;
    }

    precondition();
    zr = residual_vector();
    const double rz_next = dot(r, zr);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = zr[i] + beta * p[i];
  }

  std::ostringstream msg;
  msg << "CG did not reach relative residual " << options.tol << " in " << max_iter << " iterations (last "
      << report.final_relative_residual << ")";
  throw CgNotConverged(msg.str(), report);
}

}  // namespace mfddm
