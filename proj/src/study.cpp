#include "mfddm/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace mfddm {

namespace {

/// TOML reader that files section-less keys under the solve subcommand.
class SolveConfigFormat : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items)
      if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents = {"solve"};
    return items;
  }
};

}  // namespace

std::string to_string(Manifold m) {
  switch (m) {
    case Manifold::s4: return "s4";
    case Manifold::cp2: return "cp2";
    case Manifold::s2xs2: return "s2xs2";
  }
  return "unknown";
}

Manifold manifold_from_string(const std::string& name) {
  if (name == "s4") return Manifold::s4;
  if (name == "cp2") return Manifold::cp2;
  if (name == "s2xs2") return Manifold::s2xs2;
  throw ConfigError("unknown manifold '" + name + "' (expected s4, cp2 or s2xs2)");
}

double default_b(Manifold m) {
  switch (m) {
    case Manifold::s4: return 1.0;
    case Manifold::cp2: return 4.0;
    case Manifold::s2xs2: return 2.0;
  }
  return 1.0;
}

std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::string* help_out) {
  CLI::App app{"Chart-wise overlapping Schwarz solver for -Lap u + b u = f on closed 4-manifolds", "mfddm"};
  app.require_subcommand(1);
  auto* solve = app.add_subcommand("solve", "Run a convergence study and write one CSV row per grid size");

  RunConfig cfg;
  std::string manifold;
  double b = 0.0;
  app.config_formatter(std::make_shared<SolveConfigFormat>());
  app.set_config("--config", "", "Read option defaults from a TOML file; flags take precedence");
  solve->fallthrough();
  solve->footer("  --config FILE               TOML file of option defaults (bare keys or a [solve] table); flags take precedence");
  solve->add_option("--manifold", manifold, "Manifold: s4, cp2 or s2xs2")->required();
  solve->add_option("--r", cfg.r, "Half-width of every chart rectangle [-r, r]^4; must exceed 1")
      ->capture_default_str();
  auto* n_opt = solve->add_option("--n", cfg.n_list, "Comma-separated cells per axis, each >= 2 (h = 2r/N)")
                    ->delimiter(',')
                    ->required();
  (void)n_opt;
  auto* b_opt = solve->add_option("--b", b, "Reaction coefficient (default: 1 for s4, 4 for cp2, 2 for s2xs2)");
  solve->add_option("--cg-tol", cfg.cg_tol, "Relative residual tolerance of the chart solves")->capture_default_str();
  solve->add_option("--quad", cfg.quad_points, "Gauss points per axis per cell")->capture_default_str();
  solve->add_option("--max-sweeps", cfg.max_sweeps, "Outer sweep limit")->capture_default_str();
  solve->add_option("--threads", cfg.threads, "Worker threads for assembly and mat-vecs (0: hardware)")
      ->capture_default_str();
  solve->add_flag("--jacobi", cfg.jacobi, "Diagonally precondition the chart solves");
  solve->add_option("--mem-cap-gib", cfg.mem_cap_gib, "Refuse grid sizes whose estimated matrix storage exceeds this")
      ->capture_default_str();
  solve->add_option("--out", cfg.output_path, "CSV output path (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    if (help_out) *help_out = app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    if (what.empty()) what = e.get_name();
    if (!solve->parsed()) what += "\nusage: mfddm solve --manifold {s4|cp2|s2xs2} --n N1[,N2,...] [options]";
    throw ConfigError(what);
  }

  cfg.manifold = manifold_from_string(manifold);
  if (b_opt->count() > 0) cfg.b = b;
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& config) {
  if (!(config.r > 1.0)) {
    std::ostringstream msg;
    msg << "--r must exceed 1 so that the chart interiors cover the manifold (got " << config.r << ")";
    throw ConfigError(msg.str());
  }
  if (config.n_list.empty()) throw ConfigError("--n needs at least one grid size");
  for (auto n : config.n_list)
    if (n < 2) throw ConfigError("every --n value must be >= 2");
  if (!(config.cg_tol > 0.0 && config.cg_tol < 1.0)) throw ConfigError("--cg-tol must lie in (0, 1)");
  if (config.quad_points < 1 || config.quad_points > kMaxQuadraturePoints)
    throw ConfigError("--quad must lie in [1, 10]");
  if (config.max_sweeps < 1) throw ConfigError("--max-sweeps must be >= 1");
  if (!(config.effective_b() > 0.0)) throw ConfigError("--b must be positive on a closed manifold");
  if (!(config.mem_cap_gib > 0.0)) throw ConfigError("--mem-cap-gib must be positive");
}

Problem make_problem(const RunConfig& config) {
  switch (config.manifold) {
    case Manifold::s4: return s4_problem(config.r, config.effective_b());
    case Manifold::cp2: return cp2_problem(config.r, config.effective_b());
    case Manifold::s2xs2: return s2xs2_problem(config.r, config.effective_b());
  }
  throw ConfigError("unknown manifold");
}

std::size_t estimate_matrix_bytes(const Problem& problem, std::size_t n_per_axis) {
  const std::size_t d = problem.atlas->dim();
  std::size_t nodes = 1;
  std::size_t stencil = 1;
  for (std::size_t k = 0; k < d; ++k) {
    nodes *= n_per_axis + 1;
    stencil *= 3;
  }
  constexpr std::size_t kEntryBytes = sizeof(std::uint32_t) + sizeof(double);
  constexpr std::size_t kMatricesPerChart = 3;
  return problem.atlas->size() * kMatricesPerChart * nodes * stencil * kEntryBytes;
}

StudyRow run_case(const Problem& problem, double r, std::size_t n_per_axis, const DdmOptions& options,
                  std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  DdmSolver solver(problem, n_per_axis, options);
  if (log) *log << "[" << problem.name << " N=" << n_per_axis << "] assembled " << solver.num_charts() << " charts\n";

  DdmSolver::Observer observer;
  if (log) {
    observer = [log](const DdmState&, const SweepRecord& rec) {
      *log << "  sweep " << rec.sweep << ": cg";
      for (const auto& c : rec.cg) *log << ' ' << c.iterations;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3e", rec.update);
      *log << "  update " << buf << '\n';
    };
  }
  const DdmState state = solver.solve(observer);

  const auto exact = solver.exact_interpolant();
  const QuadratureRule quad = quadrature_rule(problem.atlas->dim(), options.quad_points);
  std::vector<SparseMatrix> flat;
  std::vector<const AssembledChart*> assembled;
  for (std::size_t i = 0; i < solver.num_charts(); ++i) {
    const auto& ac = solver.assembled(i);
    flat.push_back(assemble_flat_stiffness(*ac.grid, quad, options.threads, ac.stiffness.pattern_ptr()));
    assembled.push_back(&ac);
  }
  std::vector<const SparseMatrix*> flat_ptrs;
  for (const auto& s : flat) flat_ptrs.push_back(&s);

  StudyRow row;
  row.manifold = problem.name;
  row.h = solver.grid(0)->mesh_size();
  row.n = n_per_axis;
  row.r = r;
  row.b = problem.b;
  row.cg_tol = options.cg_tol;
  row.quad_points = options.quad_points;
  row.errors = error_report(exact, state.fields, assembled, flat_ptrs);
  row.n0 = state.n0.value_or(0);
  row.sweeps = state.sweep;
  row.total_cg_iterations = state.total_cg_iterations();
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (log) *log << "[" << problem.name << " N=" << n_per_axis << "] n0 = " << row.n0 << ", linf = " << row.errors.linf
                << '\n';
  return row;
}

std::vector<StudyRow> run_study(const RunConfig& config, std::ostream* log) {
  validate(config);
  const Problem problem = make_problem(config);
  const double cap = config.mem_cap_gib * 1024.0 * 1024.0 * 1024.0;
  for (auto n : config.n_list) {
    const auto bytes = static_cast<double>(estimate_matrix_bytes(problem, n));
    if (bytes > cap) {
      std::ostringstream msg;
      msg << "N = " << n << " needs about " << bytes / (1024.0 * 1024.0 * 1024.0)
          << " GiB of matrix storage, above the cap of " << config.mem_cap_gib << " GiB (--mem-cap-gib)";
      throw MemoryCapExceeded(msg.str());
    }
  }

  DdmOptions options;
  options.cg_tol = config.cg_tol;
  options.quad_points = config.quad_points;
  options.max_sweeps = config.max_sweeps;
  options.threads = config.threads;
  options.jacobi = config.jacobi;

  std::vector<StudyRow> rows;
  for (auto n : config.n_list) rows.push_back(run_case(problem, config.r, n, options, log));
  return rows;
}

std::string csv_header() {
  return "manifold,h,N,r,b,cg_tol,quad_points,linf,l2,h1_semi,energy,h1_metric,n0,sweeps,total_cg_iterations,"
         "wall_seconds";
}

std::string csv_row(const StudyRow& row) {
  auto sci = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << row.manifold << ',' << sci(row.h) << ',' << row.n << ',' << sci(row.r) << ',' << sci(row.b) << ','
      << sci(row.cg_tol) << ',' << row.quad_points << ',' << sci(row.errors.linf) << ',' << sci(row.errors.l2) << ','
      << sci(row.errors.h1_semi) << ',' << sci(row.errors.energy) << ',' << sci(row.errors.h1_metric) << ','
      << row.n0 << ',' << row.sweeps << ',' << row.total_cg_iterations << ',' << sci(row.wall_seconds);
  return out.str();
}

void write_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << csv_header() << '\n';
  for (const auto& row : rows) out << csv_row(row) << '\n';
}

}  // namespace mfddm
