#include "mfddm/ddm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace mfddm {

std::size_t SweepRecord::total_iterations() const {
  std::size_t total = 0;
  for (const auto& r : cg) total += r.iterations;
  return total;
}

std::size_t DdmState::total_cg_iterations() const {
  std::size_t total = 0;
  for (const auto& s : history) total += s.total_iterations();
  return total;
}

DdmSolver::DdmSolver(Problem problem, std::size_t n_per_axis, DdmOptions options)
    : problem_(std::move(problem)), n_per_axis_(n_per_axis), options_(options) {
  if (!problem_.atlas) throw std::invalid_argument("DdmSolver: problem has no atlas");
  if (!problem_.f) throw std::invalid_argument("DdmSolver: problem has no right-hand side");
  if (n_per_axis_ < 1) throw std::invalid_argument("DdmSolver: n_per_axis must be >= 1");
  if (options_.max_sweeps < 1) throw std::invalid_argument("DdmSolver: max_sweeps must be >= 1");
  if (!(options_.cg_tol > 0.0 && options_.cg_tol < 1.0)) throw std::invalid_argument("DdmSolver: cg_tol must be in (0, 1)");
  const Atlas& atlas = *problem_.atlas;
  if (atlas.size() < 2)
    throw CoverViolation("a single chart cannot supply boundary data for itself; at least two charts are required");

  const QuadratureRule quad = quadrature_rule(atlas.dim(), options_.quad_points);
  charts_.resize(atlas.size());
  for (std::size_t i = 0; i < atlas.size(); ++i) {
    auto& cd = charts_[i];
    cd.grid = std::make_shared<const TensorGrid>(TensorGrid::uniform(atlas.chart(i).rect(), n_per_axis_));
    const auto& f = problem_.f;
    PointFunction fi = [&f, i](std::span<const double> x) { return f(i, x); };
    cd.assembled = assemble(cd.grid, atlas.chart(i), problem_.b, fi, quad, options_.threads);
    cd.system = restrict_to_interior(cd.assembled);
  }
  for (std::size_t i = 0; i < atlas.size(); ++i) plan_transfer(i);
}

void DdmSolver::plan_transfer(std::size_t i) {
  const Atlas& atlas = *problem_.atlas;
  auto& cd = charts_[i];
  const auto& grid = *cd.grid;
  const std::size_t d = grid.dim();
  const auto& boundary = cd.assembled.boundary;
  cd.source.resize(boundary.size());
  cd.origin.resize(boundary.size());
  cd.local.resize(boundary.size() * d);

  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const Point xi = grid.node_coords(boundary[k]);
    std::optional<std::size_t> chosen;
    // Latest data first: highest j < i, then highest j > i.
    for (std::size_t j = i; j-- > 0;) {
      if (atlas.membership(i, xi, j)) {
        chosen = j;
        break;
      }
    }
    if (!chosen) {
      for (std::size_t j = atlas.size(); j-- > i + 1;) {
        if (atlas.membership(i, xi, j)) {
          chosen = j;
          break;
        }
      }
    }
    if (!chosen) {
      std::ostringstream msg;
      msg << "boundary node (";
      for (std::size_t a = 0; a < d; ++a) msg << (a ? ", " : "") << xi[a];
      msg << ") of chart " << i << " lies in no other chart; the atlas does not cover the manifold";
      throw CoverViolation(msg.str());
    }
    const std::size_t j0 = *chosen;
    const auto y = atlas.transition(i, j0, xi);
    const auto where = charts_[j0].grid->locate(*y);
    cd.source[k] = j0;
    cd.origin[k] = charts_[j0].grid->element_origin(where.element);
    std::copy(where.local.begin(), where.local.end(), cd.local.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
}

DdmState DdmSolver::initial_state() const {
  DdmState state;
  for (const auto& cd : charts_) state.fields.emplace_back(cd.grid);
  return state;
}

std::vector<double> DdmSolver::boundary_transfer(const DdmState& state, std::size_t i) const {
  const auto& cd = charts_.at(i);
  const std::size_t d = cd.grid->dim();
  std::vector<double> values(cd.source.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& src = state.fields.at(cd.source[k]);
    const auto& offsets = src.grid().corner_offsets();
    const auto dofs = src.dofs();
    const double* s = cd.local.data() + k * d;
    double v = 0.0;
    for (std::size_t a = 0; a < offsets.size(); ++a) {
      double phi = 1.0;
      for (std::size_t m = 0; m < d; ++m) phi *= (a >> m & 1U) ? s[m] : 1.0 - s[m];
      v += phi * dofs[cd.origin[k] + offsets[a]];
    }
    values[k] = v;
  }
  return values;
}

SweepRecord DdmSolver::sweep(DdmState& state) const {
  if (state.fields.size() != charts_.size()) throw std::invalid_argument("DdmSolver::sweep: state has wrong chart count");
  SweepRecord record;
  record.sweep = state.sweep + 1;
  record.cg.resize(charts_.size());

  CgOptions cg_options;
  cg_options.tol = options_.cg_tol;
  cg_options.max_iter = options_.cg_max_iter;
  cg_options.jacobi = options_.jacobi;
  cg_options.threads = options_.threads;

  for (std::size_t i = 0; i < charts_.size(); ++i) {
    const auto& cd = charts_[i];
    const auto& ac = cd.assembled;
    const std::vector<double> g = boundary_transfer(state, i);
    auto dofs = state.fields[i].dofs();
    double change = 0.0;

    for (std::size_t k = 0; k < g.size(); ++k) {
      change = std::max(change, std::abs(dofs[ac.boundary[k]] - g[k]));
      dofs[ac.boundary[k]] = g[k];
    }

    const std::vector<double> rhs = lifted_rhs(cd.system, ac, g);
    std::vector<double> x(ac.interior.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = dofs[ac.interior[k]];
    try {
      record.cg[i] = cg(cd.system.interior_matrix, rhs, x, cg_options);
    } catch (const CgNotConverged& e) {
      std::ostringstream msg;
      msg << "chart " << i << ", sweep " << record.sweep << ": " << e.what();
      throw ChartSolveFailed(msg.str(), i, record.sweep, e.report());
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      change = std::max(change, std::abs(dofs[ac.interior[k]] - x[k]));
      dofs[ac.interior[k]] = x[k];
    }
    record.update = std::max(record.update, change);
  }

  state.sweep = record.sweep;
  state.history.push_back(record);
  return record;
}

DdmState DdmSolver::solve(const Observer& observer) const {
  DdmState state = initial_state();
  solve(state, observer);
  return state;
}

void DdmSolver::solve(DdmState& state, const Observer& observer) const {
  state.n0.reset();
  for (std::size_t n = 0; n < options_.max_sweeps; ++n) {
    const SweepRecord record = sweep(state);
    if (observer) observer(state, record);
    if (record.stationary()) {
      std::size_t last_active = 0;
      for (const auto& h : state.history)
        if (!h.stationary()) last_active = h.sweep;
      state.n0 = last_active;
      return;
    }
  }
  std::ostringstream msg;
  msg << "no stationary sweep within " << options_.max_sweeps << " sweeps (last update "
      << (state.history.empty() ? 0.0 : state.history.back().update) << ")";
  throw MaxSweepsExceeded(msg.str(), std::make_shared<const DdmState>(state));
}

std::vector<ChartField> DdmSolver::exact_interpolant() const {
  if (!problem_.has_exact()) throw std::logic_error("DdmSolver::exact_interpolant: problem has no exact solution");
  std::vector<ChartField> out;
  for (std::size_t i = 0; i < charts_.size(); ++i) {
    const auto& u = problem_.exact;
    out.push_back(interpolate(charts_[i].grid, [&u, i](std::span<const double> x) { return u(i, x); }));
  }
  return out;
}

}  // namespace mfddm
