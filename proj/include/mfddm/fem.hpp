#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mfddm/atlas.hpp"
#include "mfddm/quadrature.hpp"
#include "mfddm/sparse_matrix.hpp"
#include "mfddm/tensor_grid.hpp"

namespace mfddm {

/// Q1 discretisation of one chart:
///   stiffness[x, y] = a(phi_x, phi_y) = int (grad phi_x . K grad phi_y + b w phi_x phi_y)
///   mass[x, y]      = int w phi_x phi_y
///   load[x]         = int f w phi_x
/// All three share the 3^d stencil pattern of the grid.
struct AssembledChart {
  std::shared_ptr<const TensorGrid> grid;
  double b = 0.0;
  SparseMatrix stiffness;
  SparseMatrix mass;
  std::vector<double> load;
  std::vector<std::size_t> interior;  // ascending flat node indices
  std::vector<std::size_t> boundary;  // ascending flat node indices
};

/// CSR pattern coupling every node with its 3^d tensor neighbours.
std::shared_ptr<const CsrPattern> stencil_pattern(const TensorGrid& grid);

/// Assembles on `grid`, which must parameterise the chart's rectangle. `f`
/// is sampled at quadrature points. Work is split by node layers of the last
/// axis; the result does not depend on `threads`.
AssembledChart assemble(std::shared_ptr<const TensorGrid> grid, const Chart& chart, double b, const PointFunction& f,
                        const QuadratureRule& quad, std::size_t threads = 1);

/// Parameter-domain Laplacian stiffness (K = I, w = 1, b = 0). Reuses
/// `pattern` when given.
SparseMatrix assemble_flat_stiffness(const TensorGrid& grid, const QuadratureRule& quad, std::size_t threads = 1,
                                     std::shared_ptr<const CsrPattern> pattern = nullptr);

/// Interior/boundary split of an assembled stiffness matrix. Rows of both
/// blocks follow AssembledChart::interior; coupling columns follow
/// AssembledChart::boundary.
struct DirichletSystem {
  SparseMatrix interior_matrix;
  SparseMatrix coupling;
};

DirichletSystem restrict_to_interior(const AssembledChart& ac);

/// load|interior - A[interior, boundary] * boundary_values
std::vector<double> lifted_rhs(const DirichletSystem& system, const AssembledChart& ac,
                               std::span<const double> boundary_values);

/// One-shot form: boundary_values must be ordered like ac.boundary and
/// cover it exactly.
std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const AssembledChart& ac,
                                                             std::span<const double> boundary_values);

}  // namespace mfddm
