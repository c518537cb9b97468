#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfddm/ddm.hpp"
#include "mfddm/norms.hpp"
#include "mfddm/problems.hpp"

namespace mfddm {

enum class Manifold { s4, cp2, s2xs2 };

std::string to_string(Manifold m);
Manifold manifold_from_string(const std::string& name);

/// Default reaction coefficient of each shipped problem.
double default_b(Manifold m);

struct RunConfig {
  Manifold manifold = Manifold::s4;
  double r = 1.2;
  std::optional<double> b;  // problem default when unset
  std::vector<std::size_t> n_list;
  double cg_tol = 1e-8;
  std::size_t quad_points = 2;
  std::size_t max_sweeps = 500;
  std::size_t threads = 0;  // 0: hardware parallelism
  bool jacobi = false;
  double mem_cap_gib = 16.0;
  std::string output_path;  // empty: standard output

  double effective_b() const { return b ? *b : default_b(manifold); }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MemoryCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `solve` arguments (program name excluded). Values from a file
/// given with --config are overridden by flags. Throws ConfigError.
/// Returns nullopt when help was requested; `help_out` then holds the text.
std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::string* help_out = nullptr);

/// Throws ConfigError on invalid settings.
void validate(const RunConfig& config);

Problem make_problem(const RunConfig& config);

/// Estimated bytes of sparse storage held for one grid size, summed over
/// charts: three CSR-sized matrices per chart, each nodes * 3^d entries of
/// a 4-byte index and an 8-byte value.
std::size_t estimate_matrix_bytes(const Problem& problem, std::size_t n_per_axis);

struct StudyRow {
  std::string manifold;
  double h = 0.0;
  std::size_t n = 0;
  double r = 0.0;
  double b = 0.0;
  double cg_tol = 0.0;
  std::size_t quad_points = 0;
  ErrorReport errors;
  std::size_t n0 = 0;
  std::size_t sweeps = 0;
  std::size_t total_cg_iterations = 0;
  double wall_seconds = 0.0;
};

/// Solves one grid size and measures the error against the interpolated
/// exact solution. `log` receives per-sweep progress when non-null.
StudyRow run_case(const Problem& problem, double r, std::size_t n_per_axis, const DdmOptions& options,
                  std::ostream* log = nullptr);

/// Runs every N in config.n_list. Throws MemoryCapExceeded before any work
/// when a grid size is over the cap.
std::vector<StudyRow> run_study(const RunConfig& config, std::ostream* log = nullptr);

std::string csv_header();
std::string csv_row(const StudyRow& row);
void write_csv(std::ostream& out, const std::vector<StudyRow>& rows);

}  // namespace mfddm
