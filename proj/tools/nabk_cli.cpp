// Benchmark and diagnostics front end for the nabk solvers.
//
// Exit codes: 0 success, 2 usage error, 3 solver breakdown, 4 size guard.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nabk/bench.hpp"
#include "nabk/diagnose.hpp"
#include "nabk/diagnostics.hpp"
#include "nabk/registry.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitBreakdown = 3;
constexpr int kExitSizeGuard = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
    try {
      std::size_t used = 0;
      const std::string value = kv.substr(eq + 1);
      out[kv.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError("--param value is not a number in '" + kv + "'");
    }
  }
  return out;
}

nabk::Method parse_method_or_throw(const std::string& s) {
  auto m = nabk::parse_method(s);
  if (!m) throw UsageError("unknown method '" + s + "'");
  return *m;
}

void require_problem(const std::string& name) {
  if (nabk::canonical_problem_name(name).empty()) throw UsageError("unknown problem '" + name + "'");
}

// Explicit path, else $NABK_OUTPUT_DIR/<fallback>, else stdout (empty path).
fs::path output_path(const std::string& explicit_path, const std::string& fallback) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("NABK_OUTPUT_DIR"); dir && *dir) return fs::path(dir) / fallback;
  return {};
}

void emit(const fs::path& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

fs::path sibling(const fs::path& path, const std::string& suffix, const std::string& fallback) {
  if (path.empty()) return fallback;
  fs::path p = path;
  p.replace_filename(path.stem().string() + suffix);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average block nonlinear Kaczmarz solvers: solve, benchmark, sweep and diagnose"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Run one solver on one problem and write a JSON report");
  std::string problem = "h-equation", method = "ngabk", x0 = "paper", out_path;
  nabk::Index n = 50;
  double rho = 0.1, tol_sq = 1e-6;
  std::size_t max_iters = 200000;
  std::uint64_t seed = 0;
  std::vector<std::string> raw_params;
  bool history = false;
  solve_cmd->add_option("--problem", problem, "h-equation | brown | broyden | overdetermined | affine");
  solve_cmd->add_option("--n", n, "Number of unknowns")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--method", method, "ngabk | mrnabk | nrk | rdcnk | rbcnk | newton");
  solve_cmd->add_option("--param", raw_params, "Problem parameter key=value (repeatable)");
  solve_cmd->add_option("--rho", rho, "Relaxation for mrnabk");
  solve_cmd->add_option("--tol-sq", tol_sq, "Stop when ||f||^2 falls below this");
  solve_cmd->add_option("--max-iters", max_iters);
  solve_cmd->add_option("--seed", seed, "Seed for randomized methods");
  solve_cmd->add_option("--x0", x0, "paper | zeros | const:<v>");
  solve_cmd->add_option("--out", out_path, "JSON report path");
  solve_cmd->add_flag("--history", history, "Also write a per-iteration CSV next to the report");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run a suite's size grid over the iterative methods (CSV)");
  std::string suite;
  std::size_t repeats = 10;
  std::uint64_t seed_base = 0;
  std::vector<std::string> methods;
  std::vector<nabk::Index> sizes;
  std::string bench_out, stats_out, reports_dir;
  unsigned threads = 0;
  bench_cmd->add_option("--suite", suite, "h-equation | brown | broyden | overdetermined | all")->required();
  bench_cmd->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed-base", seed_base);
  bench_cmd->add_option("--methods", methods, "Subset of nrk,rdcnk,ngabk,rbcnk,mrnabk")->delimiter(',');
  bench_cmd->add_option("--sizes", sizes, "Override the size grid")->delimiter(',');
  bench_cmd->add_option("--param", raw_params);
  bench_cmd->add_option("--rho", rho);
  bench_cmd->add_option("--tol-sq", tol_sq);
  bench_cmd->add_option("--max-iters", max_iters);
  bench_cmd->add_option("--threads", threads);
  bench_cmd->add_option("--out", bench_out, "CSV path");
  bench_cmd->add_option("--stats-out", stats_out, "Iteration-spread CSV path");
  bench_cmd->add_option("--reports-dir", reports_dir, "Directory for one JSON record per row");

  // rho-sweep
  auto* sweep_cmd = app.add_subcommand("rho-sweep", "MRNABK over a grid of rho values and sizes (CSV)");
  std::vector<double> rhos{0.1, 0.3, 0.5, 0.7, 0.8, 0.9};
  std::vector<nabk::Index> sweep_sizes{50, 100, 500, 1000, 1500};
  std::string sweep_problem = "h-equation";
  sweep_cmd->add_option("--problem", sweep_problem);
  sweep_cmd->add_option("--param", raw_params);
  sweep_cmd->add_option("--rhos", rhos)->delimiter(',');
  sweep_cmd->add_option("--sizes", sweep_sizes)->delimiter(',');
  sweep_cmd->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--tol-sq", tol_sq);
  sweep_cmd->add_option("--max-iters", max_iters);
  sweep_cmd->add_option("--threads", threads);
  sweep_cmd->add_option("--out", bench_out, "CSV path");

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "Check per-step contraction against the convergence bounds (JSON)");
  std::size_t pairs = 100;
  double pair_radius = 0.05;
  std::size_t diag_iters = 2000;
  std::string diag_problem = "brown", diag_method = "ngabk";
  nabk::Index diag_n = 10;
  diag_cmd->add_option("--problem", diag_problem);
  diag_cmd->add_option("--n", diag_n)->check(CLI::PositiveNumber);
  diag_cmd->add_option("--method", diag_method, "ngabk | mrnabk");
  diag_cmd->add_option("--param", raw_params);
  diag_cmd->add_option("--rho", rho);
  diag_cmd->add_option("--pairs", pairs);
  diag_cmd->add_option("--pair-radius", pair_radius, "Fraction of the sample-box diameter");
  diag_cmd->add_option("--seed", seed);
  diag_cmd->add_option("--x0", x0);
  diag_cmd->add_option("--tol-sq", tol_sq);
  diag_cmd->add_option("--max-iters", diag_iters);
  diag_cmd->add_option("--out", out_path, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const auto params = parse_params(raw_params);

    if (*solve_cmd) {
      require_problem(problem);
      nabk::SolveRequest req;
      req.problem = problem;
      req.n = n;
      req.params = params;
      req.method = parse_method_or_throw(method);
      req.config.rho = rho;
      req.config.tol_sq = tol_sq;
      req.config.max_iters = max_iters;
      req.config.seed = seed;
      req.x0 = x0;
      const nabk::SolveOutcome res = nabk::solve(req);
      const fs::path path = output_path(
          out_path, "solve_" + res.spec.name + "_" + std::to_string(n) + "_" + method + ".json");
      emit(path, res.json.dump(2) + "\n");
      if (history) {
        const fs::path hist = sibling(path, ".history.csv", "history.csv");
        emit(hist, nabk::history_to_csv(res.report));
      }
      std::cerr << res.spec.name << " n=" << res.spec.n << " " << method << ": " << to_string(res.report.status)
                << " after " << res.report.iters << " iterations, ||f||^2 = " << res.report.final_residual_sq
                << "\n";
      return res.report.status == nabk::Status::NumericalBreakdown ? kExitBreakdown : 0;
    }

    if (*bench_cmd) {
      if (!nabk::is_suite(suite)) throw UsageError("unknown suite '" + suite + "'");
      nabk::BenchPlan plan;
      plan.suite = suite;
      plan.sizes = sizes;
      plan.params = params;
      if (!methods.empty()) {
        plan.methods.clear();
        for (const auto& m : methods) plan.methods.push_back(parse_method_or_throw(m));
      }
      nabk::RunOptions opts;
      opts.repeats = repeats;
      opts.seed_base = seed_base;
      opts.rho = rho;
      opts.tol_sq = tol_sq;
      opts.max_iters = max_iters;
      opts.threads = threads;
      const auto records = nabk::run_bench(plan, opts);
      const fs::path path = output_path(bench_out, "bench_" + suite + ".csv");
      emit(path, nabk::records_to_csv(records));
      const fs::path stats =
          stats_out.empty() ? (path.empty() ? fs::path() : sibling(path, "_iters.csv", "")) : fs::path(stats_out);
      if (!stats.empty()) emit(stats, nabk::iteration_stats_csv(records));
      if (!reports_dir.empty()) {
        for (const auto& r : records)
          emit(fs::path(reports_dir) / (r.problem + "_" + std::to_string(r.n) + "_" + r.method + ".json"),
               nabk::to_json(r).dump(2) + "\n");
      }
      return 0;
    }

    if (*sweep_cmd) {
      require_problem(sweep_problem);
      nabk::RunOptions opts;
      opts.repeats = repeats;
      opts.tol_sq = tol_sq;
      opts.max_iters = max_iters;
      opts.threads = threads;
      const auto records = nabk::run_rho_sweep(sweep_problem, params, rhos, sweep_sizes, opts);
      emit(output_path(bench_out, "rho_sweep_" + nabk::canonical_problem_name(sweep_problem) + ".csv"),
           nabk::records_to_csv(records));
      return 0;
    }

    if (*diag_cmd) {
      require_problem(diag_problem);
      nabk::DiagnoseOptions opts;
      opts.problem = diag_problem;
      opts.n = diag_n;
      opts.params = params;
      opts.method = parse_method_or_throw(diag_method);
      opts.rho = rho;
      opts.pairs = pairs;
      opts.pair_radius = pair_radius;
      opts.seed = seed;
      opts.x0 = x0;
      opts.tol_sq = tol_sq;
      opts.max_iters = diag_iters;
      const auto report = nabk::run_diagnose(opts);
      emit(output_path(out_path, "diagnose_" + nabk::canonical_problem_name(diag_problem) + "_" +
                                     std::to_string(diag_n) + "_" + diag_method + ".json"),
           report.dump(2) + "\n");
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nabk::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nabk::SizeGuardError& e) {
    std::cerr << "size guard: " << e.what() << "\n";
    return kExitSizeGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
