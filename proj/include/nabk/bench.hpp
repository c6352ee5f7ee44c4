#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nabk/registry.hpp"
#include "nabk/solver.hpp"

namespace nabk {

/// One row of a benchmark table.
struct RunRecord {
  std::string method;
  std::string problem;
  Index n = 0;
  Index m = 0;
  std::optional<double> rho;
  /// Iteration count; the median over repeats for randomized methods.
  std::size_t iters = 0;
  double final_residual_sq = 0;
  /// Mean solver-loop wall time over repeats.
  double wall_ms = 0;
  std::optional<std::uint64_t> seed;
  std::size_t repeats = 1;
  Status status = Status::MaxIters;

  /// Per-repeat iteration counts, in seed order.
  std::vector<std::size_t> iters_all;
  double iters_median = 0;
  double iters_mean = 0;
  std::size_t iters_min = 0;
  std::size_t iters_max = 0;
};

inline constexpr const char* kRunRecordHeader =
    "method,problem,n,m,rho,iters,final_residual_sq,wall_ms,seed,repeats,status";
inline constexpr const char* kIterationStatsHeader = "method,problem,n,repeats,iters_median,iters_mean,iters_min,iters_max";
inline constexpr const char* kHistoryHeader = "k,residual_sq,block_size,step_norm";

struct RunOptions {
  std::size_t repeats = 10;
  std::uint64_t seed_base = 0;
  double rho = 0.1;
  double tol_sq = 1e-6;
  std::size_t max_iters = 200000;
  /// Worker threads for independent cells; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Runs one (problem, method) cell `repeats` times. Randomized methods use seeds seed_base + r.
RunRecord run_cell(const ProblemInstance& problem, Method method, const RunOptions& opts);

/// Suite keys: h-equation, brown, broyden, overdetermined, all.
bool is_suite(const std::string& suite);
std::vector<std::string> suite_problems(const std::string& suite);
/// Size grid of a problem's reference table.
std::vector<Index> default_sizes(const std::string& problem);

struct BenchPlan {
  std::string suite;
  std::vector<Method> methods{std::begin(kIterativeMethods), std::end(kIterativeMethods)};
  /// Overrides the reference size grid when nonempty.
  std::vector<Index> sizes;
  std::map<std::string, double> params;
};

/// Runs every (problem, size, method) cell; failures are recorded per row. Sorted by (suite order, n, method order).
std::vector<RunRecord> run_bench(const BenchPlan& plan, const RunOptions& opts);

/// MRNABK over a (size, rho) grid, sorted by (n, rho).
std::vector<RunRecord> run_rho_sweep(const std::string& problem, const std::map<std::string, double>& params,
                                     const std::vector<double>& rhos, const std::vector<Index>& sizes,
                                     const RunOptions& opts);

/// Exact RunRecord CSV (header + LF-terminated rows).
std::string records_to_csv(const std::vector<RunRecord>& records);
/// Iteration spread per record.
std::string iteration_stats_csv(const std::vector<RunRecord>& records);
nlohmann::json to_json(const RunRecord& record);

/// Per-iteration CSV: k,residual_sq,block_size,step_norm.
std::string history_to_csv(const SolverReport<double>& report);

struct SolveRequest {
  std::string problem;
  Index n = 0;
  std::map<std::string, double> params;
  Method method = Method::NGABK;
  SolverConfig<double> config;
  /// "paper", "zeros" or "const:<v>".
  std::string x0 = "paper";
};

struct SolveOutcome {
  ProblemSpec spec;
  SolverReport<double> report;
  double wall_ms = 0;
  nlohmann::json json;
};

/// Parses the x0 selector against a problem.
Vector<double> resolve_x0(const std::string& selector, const ProblemSpec& spec);

SolveOutcome solve(const SolveRequest& request);

/// Formats a double so it reads back bit-identically.
std::string format_double(double v);

}  // namespace nabk
