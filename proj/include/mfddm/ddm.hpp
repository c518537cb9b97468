#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfddm/fem.hpp"
#include "mfddm/problems.hpp"
#include "mfddm/solver.hpp"
#include "mfddm/tensor_grid.hpp"

namespace mfddm {

struct DdmOptions {
  double cg_tol = 1e-8;
  std::size_t quad_points = 2;
  std::size_t max_sweeps = 500;
  std::size_t threads = 1;
  bool jacobi = false;
  std::size_t cg_max_iter = 0;  // 0: solver default
};

struct SweepRecord {
  std::size_t sweep = 0;        // 1-based
  std::vector<CgReport> cg;     // one per chart, in sweep order
  double update = 0.0;          // max over charts of the nodal max-norm change

  std::size_t total_iterations() const;
  bool stationary() const { return total_iterations() == 0; }
};

/// Iterate of the chart-wise Schwarz method: one Q1 field per chart.
struct DdmState {
  std::vector<ChartField> fields;
  std::size_t sweep = 0;
  std::vector<SweepRecord> history;
  /// Last sweep with any CG work; set once a stationary sweep is seen.
  std::optional<std::size_t> n0;

  std::size_t total_cg_iterations() const;
};

class CoverViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChartSolveFailed : public std::runtime_error {
 public:
  ChartSolveFailed(const std::string& what, std::size_t chart, std::size_t sweep, CgReport report)
      : std::runtime_error(what), chart(chart), sweep(sweep), report(report) {}
  std::size_t chart;
  std::size_t sweep;
  CgReport report;
};

class MaxSweepsExceeded : public std::runtime_error {
 public:
  MaxSweepsExceeded(const std::string& what, std::shared_ptr<const DdmState> state)
      : std::runtime_error(what), state(std::move(state)) {}
  std::shared_ptr<const DdmState> state;
};

/// Multiplicative overlapping Schwarz iteration over the charts of an
/// atlas. Chart i takes its boundary data from the highest-numbered chart
/// j < i containing the node, falling back to the highest-numbered other
/// chart; the source field is evaluated through the transition map by Q1
/// interpolation. Per-chart matrices are assembled once.
class DdmSolver {
 public:
  using Observer = std::function<void(const DdmState&, const SweepRecord&)>;

  /// Builds grids, assembles every chart, and resolves the boundary
  /// transfer sources. Throws CoverViolation when some boundary node lies in
  /// no other chart.
  DdmSolver(Problem problem, std::size_t n_per_axis, DdmOptions options = {});

  const Problem& problem() const { return problem_; }
  const DdmOptions& options() const { return options_; }
  std::size_t num_charts() const { return charts_.size(); }
  std::size_t n_per_axis() const { return n_per_axis_; }
  const std::shared_ptr<const TensorGrid>& grid(std::size_t i) const { return charts_.at(i).grid; }
  const AssembledChart& assembled(std::size_t i) const { return charts_.at(i).assembled; }
  /// Chart supplying each boundary node's value, ordered like assembled(i).boundary.
  const std::vector<std::size_t>& transfer_sources(std::size_t i) const { return charts_.at(i).source; }

  /// All-zero fields.
  DdmState initial_state() const;

  /// Boundary values for chart i read from the fields as they currently are.
  std::vector<double> boundary_transfer(const DdmState& state, std::size_t i) const;

  /// One outer iteration over all charts in order; updates `state` in place.
  SweepRecord sweep(DdmState& state) const;

  /// Sweeps from zero until a sweep needs no CG iteration on any chart.
  DdmState solve(const Observer& observer = {}) const;
  /// Continues from `state` under the same stopping rule.
  void solve(DdmState& state, const Observer& observer = {}) const;

  /// Nodal interpolant of the exact solution on every chart.
  std::vector<ChartField> exact_interpolant() const;

 private:
  struct ChartData {
    std::shared_ptr<const TensorGrid> grid;
    AssembledChart assembled;
    DirichletSystem system;
    std::vector<std::size_t> source;   // per boundary node
    std::vector<std::size_t> origin;   // lowest corner of the containing cell in the source grid
    std::vector<double> local;         // per boundary node, d local coordinates
  };

  void plan_transfer(std::size_t i);

  Problem problem_;
  std::size_t n_per_axis_;
  DdmOptions options_;
  std::vector<ChartData> charts_;
};

}  // namespace mfddm
