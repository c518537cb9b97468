#include "mfddm/fem.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mfddm/parallel.hpp"

namespace mfddm {

std::shared_ptr<const CsrPattern> stencil_pattern(const TensorGrid& grid) {
  const std::size_t d = grid.dim();
  const std::size_t n = grid.num_nodes();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("stencil_pattern: grid too large");

  std::size_t stencil = 1;
  for (std::size_t k = 0; k < d; ++k) stencil *= 3;

  auto pattern = std::make_shared<CsrPattern>();
  pattern->rows = n;
  pattern->cols = n;
  pattern->row_offsets.resize(n + 1);
  pattern->row_offsets[0] = 0;

  // Row lengths first: product over axes of the neighbours in range.
  MultiIndex index(d, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t len = 1;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t last = grid.cells(k);
      len *= 1 + (index[k] > 0 ? 1 : 0) + (index[k] < last ? 1 : 0);
    }
    pattern->row_offsets[r + 1] = pattern->row_offsets[r] + len;
    for (std::size_t k = 0; k < d; ++k) {
      if (++index[k] <= grid.cells(k)) break;
      index[k] = 0;
    }
  }
  pattern->columns.resize(pattern->row_offsets[n]);

  // Neighbour offsets enumerated with axis 0 as the fastest digit give
  // ascending flat indices.
  std::fill(index.begin(), index.end(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t pos = pattern->row_offsets[r];
    for (std::size_t s = 0; s < stencil; ++s) {
      std::size_t rest = s;
      bool inside = true;
      std::ptrdiff_t col = static_cast<std::ptrdiff_t>(r);
      for (std::size_t k = 0; k < d; ++k) {
        const int dk = static_cast<int>(rest % 3) - 1;
        rest /= 3;
        const auto jk = static_cast<std::ptrdiff_t>(index[k]) + dk;
        if (jk < 0 || jk > static_cast<std::ptrdiff_t>(grid.cells(k))) {
          inside = false;
          break;
        }
        col += dk * static_cast<std::ptrdiff_t>(grid.stride(k));
      }
      if (inside) pattern->columns[pos++] = static_cast<std::uint32_t>(col);
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (++index[k] <= grid.cells(k)) break;
      index[k] = 0;
    }
  }
  return pattern;
}

namespace {

struct ReferenceBasis {
  std::size_t corners = 0;
  std::vector<double> value;     // [corner][qp]
  std::vector<double> gradient;  // [corner][qp][axis], d/ds on the unit cell
};

ReferenceBasis reference_basis(std::size_t d, const QuadratureRule& quad) {
  ReferenceBasis ref;
  ref.corners = std::size_t{1} << d;
  const std::size_t nq = quad.size();
  ref.value.resize(ref.corners * nq);
  ref.gradient.resize(ref.corners * nq * d);
  for (std::size_t a = 0; a < ref.corners; ++a) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double* s = quad.point(q);
      double v = 1.0;
      for (std::size_t k = 0; k < d; ++k) v *= (a >> k & 1U) ? s[k] : 1.0 - s[k];
      ref.value[a * nq + q] = v;
      for (std::size_t k = 0; k < d; ++k) {
        double g = (a >> k & 1U) ? 1.0 : -1.0;
        for (std::size_t m = 0; m < d; ++m)
          if (m != k) g *= (a >> m & 1U) ? s[m] : 1.0 - s[m];
        ref.gradient[(a * nq + q) * d + k] = g;
      }
    }
  }
  return ref;
}

struct FormTargets {
  SparseMatrix* stiffness = nullptr;
  SparseMatrix* mass = nullptr;
  std::vector<double>* load = nullptr;
};

void assemble_forms(const TensorGrid& grid, const Chart::CoefficientFn& coefficients, double b,
                    const PointFunction* f, const QuadratureRule& quad, std::size_t threads, FormTargets out) {
  const std::size_t d = grid.dim();
  if (quad.dim != d) throw std::invalid_argument("assemble: quadrature dimension does not match the grid");
  const ReferenceBasis ref = reference_basis(d, quad);
  const std::size_t nb = ref.corners;
  const std::size_t nq = quad.size();
  const auto& offsets = grid.corner_offsets();
  const CsrPattern& pattern = (out.stiffness ? out.stiffness : out.mass)->pattern();

  // Node layers along the last axis are owned by one thread each; a thread
  // visits every cell touching its layers and scatters only into its rows.
  const std::size_t last = d - 1;
  const std::size_t layers = grid.cells(last) + 1;
  const std::size_t layer_stride = grid.stride(last);

  parallel_blocks(layers, resolve_threads(threads), [&](std::size_t layer_begin, std::size_t layer_end) {
    if (layer_begin >= layer_end) return;
    const std::size_t row_begin = layer_begin * layer_stride;
    const std::size_t row_end = layer_end * layer_stride;
    const std::size_t cell_begin = layer_begin == 0 ? 0 : layer_begin - 1;
    const std::size_t cell_end = std::min(layer_end, grid.cells(last));

    std::vector<double> ke(nb * nb), me(nb * nb), le(nb);
    std::vector<double> k_at(d * d), grad(nb * d), kgrad(nb * d), x(d), h(d), lo(d);
    MultiIndex cell(d, 0);
    cell[last] = cell_begin;
    for (;;) {
      if (cell[last] >= cell_end) break;

      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = grid.partition(k)[cell[k]];
        h[k] = grid.partition(k)[cell[k] + 1] - lo[k];
      }
      double volume = 1.0;
      for (std::size_t k = 0; k < d; ++k) volume *= h[k];

      std::fill(ke.begin(), ke.end(), 0.0);
      std::fill(me.begin(), me.end(), 0.0);
      std::fill(le.begin(), le.end(), 0.0);
      for (std::size_t q = 0; q < nq; ++q) {
        const double* s = quad.point(q);
        for (std::size_t k = 0; k < d; ++k) x[k] = lo[k] + s[k] * h[k];
        const double w = coefficients(x, k_at);
        const double jw = quad.weights[q] * volume;
        const double* phi = &ref.value[q];
        for (std::size_t a = 0; a < nb; ++a)
          for (std::size_t k = 0; k < d; ++k) grad[a * d + k] = ref.gradient[(a * nq + q) * d + k] / h[k];
        if (out.stiffness) {
          for (std::size_t a = 0; a < nb; ++a)
            for (std::size_t r = 0; r < d; ++r) {
              double t = 0.0;
              for (std::size_t c = 0; c < d; ++c) t += k_at[r * d + c] * grad[a * d + c];
              kgrad[a * d + r] = t;
            }
          for (std::size_t a = 0; a < nb; ++a) {
            const double pa = phi[a * nq];
            for (std::size_t bb = a; bb < nb; ++bb) {
              double g = 0.0;
              for (std::size_t k = 0; k < d; ++k) g += kgrad[a * d + k] * grad[bb * d + k];
              ke[a * nb + bb] += jw * (g + b * w * pa * phi[bb * nq]);
            }
          }
        }
        if (out.mass) {
          for (std::size_t a = 0; a < nb; ++a) {
            const double pa = phi[a * nq];
            for (std::size_t bb = a; bb < nb; ++bb) me[a * nb + bb] += jw * w * pa * phi[bb * nq];
          }
        }
        if (out.load) {
          const double fw = (*f)(x) * w * jw;
          for (std::size_t a = 0; a < nb; ++a) le[a] += fw * phi[a * nq];
        }
      }

      const std::size_t origin = grid.element_origin(cell);
      for (std::size_t a = 0; a < nb; ++a) {
        const std::size_t row = origin + offsets[a];
        if (row < row_begin || row >= row_end) continue;
        for (std::size_t bb = 0; bb < nb; ++bb) {
          const std::size_t pos = pattern.find(row, origin + offsets[bb]);
          const std::size_t lo_ab = std::min(a, bb) * nb + std::max(a, bb);
          if (out.stiffness) out.stiffness->values()[pos] += ke[lo_ab];
          if (out.mass) out.mass->values()[pos] += me[lo_ab];
        }
        if (out.load) (*out.load)[row] += le[a];
      }

      for (std::size_t k = 0; k < d; ++k) {
        if (++cell[k] < grid.cells(k) || k == last) break;
        cell[k] = 0;
      }
    }
  });
}

}  // namespace

AssembledChart assemble(std::shared_ptr<const TensorGrid> grid, const Chart& chart, double b, const PointFunction& f,
                        const QuadratureRule& quad, std::size_t threads) {
  if (!grid) throw std::invalid_argument("assemble: null grid");
  if (grid->dim() != chart.dim()) throw std::invalid_argument("assemble: grid and chart dimensions differ");
  if (b < 0.0) throw std::invalid_argument("assemble: reaction coefficient b must be >= 0");

  AssembledChart ac;
  ac.grid = grid;
  ac.b = b;
  auto pattern = stencil_pattern(*grid);
  ac.stiffness = SparseMatrix(pattern);
  ac.mass = SparseMatrix(pattern);
  ac.load.assign(grid->num_nodes(), 0.0);
  assemble_forms(*grid, chart.coefficient_fn(), b, &f, quad, threads, {&ac.stiffness, &ac.mass, &ac.load});
  ac.interior = grid->interior_flat();
  ac.boundary = grid->boundary_flat();
  return ac;
}

SparseMatrix assemble_flat_stiffness(const TensorGrid& grid, const QuadratureRule& quad, std::size_t threads,
                                     std::shared_ptr<const CsrPattern> pattern) {
  if (!pattern) pattern = stencil_pattern(grid);
  SparseMatrix s(pattern);
  const std::size_t d = grid.dim();
  Chart::CoefficientFn flat = [d](std::span<const double>, std::span<double> k) {
    std::fill(k.begin(), k.end(), 0.0);
    for (std::size_t a = 0; a < d; ++a) k[a * d + a] = 1.0;
    return 1.0;
  };
  assemble_forms(grid, flat, 0.0, nullptr, quad, threads, {&s, nullptr, nullptr});
  return s;
}

DirichletSystem restrict_to_interior(const AssembledChart& ac) {
  const auto& grid = *ac.grid;
  const std::size_t n = grid.num_nodes();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> interior_slot(n, kNone), boundary_slot(n, kNone);
  for (std::size_t k = 0; k < ac.interior.size(); ++k) interior_slot[ac.interior[k]] = k;
  for (std::size_t k = 0; k < ac.boundary.size(); ++k) boundary_slot[ac.boundary[k]] = k;

  const CsrPattern& full = ac.stiffness.pattern();
  const auto values = ac.stiffness.values();
  auto inner = std::make_shared<CsrPattern>();
  auto couple = std::make_shared<CsrPattern>();
  inner->rows = couple->rows = ac.interior.size();
  inner->cols = ac.interior.size();
  couple->cols = ac.boundary.size();
  inner->row_offsets.push_back(0);
  couple->row_offsets.push_back(0);
  std::vector<double> inner_values, couple_values;
  inner_values.reserve(full.nnz());
  for (std::size_t row : ac.interior) {
    for (std::size_t k = full.row_offsets[row]; k < full.row_offsets[row + 1]; ++k) {
      const std::size_t col = full.columns[k];
      if (interior_slot[col] != kNone) {
        inner->columns.push_back(static_cast<std::uint32_t>(interior_slot[col]));
        inner_values.push_back(values[k]);
      } else {
        couple->columns.push_back(static_cast<std::uint32_t>(boundary_slot[col]));
        couple_values.push_back(values[k]);
      }
    }
    inner->row_offsets.push_back(inner->columns.size());
    couple->row_offsets.push_back(couple->columns.size());
  }
  inner->columns.shrink_to_fit();
  inner_values.shrink_to_fit();
  return DirichletSystem{SparseMatrix(std::move(inner), std::move(inner_values)),
                         SparseMatrix(std::move(couple), std::move(couple_values))};
}

std::vector<double> lifted_rhs(const DirichletSystem& system, const AssembledChart& ac,
                               std::span<const double> boundary_values) {
  if (boundary_values.size() != ac.boundary.size()) {
    std::ostringstream msg;
    msg << "boundary values cover " << boundary_values.size() << " nodes, expected " << ac.boundary.size();
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> rhs(ac.interior.size());
  system.coupling.multiply(boundary_values, rhs);
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = ac.load[ac.interior[k]] - rhs[k];
  return rhs;
}

std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const AssembledChart& ac,
                                                             std::span<const double> boundary_values) {
  DirichletSystem system = restrict_to_interior(ac);
  auto rhs = lifted_rhs(system, ac, boundary_values);
  return {std::move(system.interior_matrix), std::move(rhs)};
}

}  // namespace mfddm
