#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "mfddm/sparse_matrix.hpp"

namespace mfddm {

struct CgReport {
  std::size_t iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

struct CgOptions {
  /// Stop when ||b - A x||_2 / ||b||_2 <= tol (true residual).
  double tol = 1e-8;
  /// 0 selects 10 * sqrt(n) + 1000.
  std::size_t max_iter = 0;
  /// Recompute the true residual every this many iterations.
  std::size_t residual_refresh = 50;
  bool jacobi = false;
  std::size_t threads = 1;
};

class CgNotConverged : public std::runtime_error {
 public:
  CgNotConverged(const std::string& what, CgReport report) : std::runtime_error(what), report_(report) {}
  const CgReport& report() const { return report_; }

 private:
  CgReport report_;
};

std::size_t default_max_iterations(std::size_t n);

/// Conjugate gradients for SPD `a`, warm-started from the contents of `x`.
/// Returns with 0 iterations when the start already meets the tolerance;
/// with b = 0 the solution is x = 0. Throws CgNotConverged after max_iter.
CgReport cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const CgOptions& options = {});

}  // namespace mfddm
