#include "nabk/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

namespace nabk {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double median_of(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? double(v[h]) : 0.5 * (double(v[h - 1]) + double(v[h]));
}

// Runs jobs on a small pool; each job writes only its own slot.
void run_parallel(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  for (auto& th : pool) th.join();
}

std::size_t method_rank(const std::string& name) {
  for (std::size_t r = 0; r < std::size(kIterativeMethods); ++r)
    if (to_string(kIterativeMethods[r]) == name) return r;
  return std::size(kIterativeMethods);
}

}  // namespace

RunRecord run_cell(const ProblemInstance& problem, Method method, const RunOptions& opts) {
  if (opts.repeats == 0) throw ArgumentError("repeats must be at least 1");
  RunRecord rec;
  rec.method = std::string(to_string(method));
  rec.problem = problem.spec.name;
  rec.n = problem.spec.n;
  rec.m = problem.spec.m;
  if (method == Method::MRNABK) rec.rho = opts.rho;
  if (is_randomized(method)) rec.seed = opts.seed_base;
  rec.repeats = opts.repeats;

  SolverConfig<double> cfg;
  cfg.method = method;
  cfg.rho = opts.rho;
  cfg.tol_sq = opts.tol_sq;
  cfg.max_iters = opts.max_iters;

  std::vector<SolverReport<double>> reports;
  double total_ms = 0;
  for (std::size_t r = 0; r < opts.repeats; ++r) {
    cfg.seed = opts.seed_base + r;
    const auto t0 = std::chrono::steady_clock::now();
    SolverReport<double> rep = run(*problem.system, problem.spec.x0, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.iters_all.push_back(rep.iters);
    rep.history.clear();
    reports.push_back(std::move(rep));
  }
  rec.wall_ms = total_ms / double(opts.repeats);
  rec.iters_median = median_of(rec.iters_all);
  rec.iters_mean = std::accumulate(rec.iters_all.begin(), rec.iters_all.end(), 0.0) / double(opts.repeats);
  rec.iters_min = *std::min_element(rec.iters_all.begin(), rec.iters_all.end());
  rec.iters_max = *std::max_element(rec.iters_all.begin(), rec.iters_all.end());

  // Representative run: the lower median by iteration count, first seed on ties.
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].iters < reports[b].iters; });
  const SolverReport<double>& rep = reports[order[(order.size() - 1) / 2]];
  rec.iters = is_randomized(method) ? std::size_t(std::llround(rec.iters_median)) : reports.front().iters;
  rec.final_residual_sq = is_randomized(method) ? rep.final_residual_sq : reports.front().final_residual_sq;
  rec.status = Status::Converged;
  for (const auto& r : reports)
    if (r.status != Status::Converged) rec.status = r.status;
  return rec;
}

bool is_suite(const std::string& suite) {
  return suite == "all" || suite == "h-equation" || suite == "brown" || suite == "broyden" ||
         suite == "overdetermined";
}

std::vector<std::string> suite_problems(const std::string& suite) {
  if (suite == "all") return {"h-equation", "brown", "broyden", "overdetermined"};
  if (is_suite(suite)) return {suite};
  return {};
}

std::vector<Index> default_sizes(const std::string& problem) {
  if (problem == "h-equation") return {50, 100, 300, 500};
  if (problem == "brown") return {50, 100, 150, 200, 250, 300, 350, 400};
  if (problem == "broyden") return {50, 500, 700, 900, 1500, 2000};
  if (problem == "overdetermined") return {100, 300, 500, 1000, 2000};
  return {10};
}

std::vector<RunRecord> run_bench(const BenchPlan& plan, const RunOptions& opts) {
  const std::vector<std::string> problems = suite_problems(plan.suite);
  if (problems.empty()) throw ArgumentError("unknown suite '" + plan.suite + "'");
  if (plan.methods.empty()) throw ArgumentError("no methods selected");

  struct Cell {
    std::size_t problem_rank;
    std::string problem;
    Index n;
    Method method;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const auto sizes = plan.sizes.empty() ? default_sizes(problems[p]) : plan.sizes;
    for (Index n : sizes)
      for (Method m : plan.methods) cells.push_back({p, problems[p], n, m});
  }

  std::vector<RunRecord> out(cells.size());
  run_parallel(cells.size(), opts.threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    std::map<std::string, double> params = cell.problem == "h-equation" ? plan.params : std::map<std::string, double>{};
    try {
      out[c] = run_cell(make_problem(cell.problem, cell.n, params), cell.method, opts);
    } catch (const std::exception&) {
      RunRecord& rec = out[c];
      rec.method = std::string(to_string(cell.method));
      rec.problem = cell.problem;
      rec.n = cell.n;
      rec.repeats = opts.repeats;
      rec.status = Status::NumericalBreakdown;
      rec.final_residual_sq = std::nan("");
    }
  });

  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Cell &x = cells[a], &y = cells[b];
    if (x.problem_rank != y.problem_rank) return x.problem_rank < y.problem_rank;
    if (x.n != y.n) return x.n < y.n;
    return method_rank(out[a].method) < method_rank(out[b].method);
  });
  std::vector<RunRecord> sorted;
  sorted.reserve(out.size());
  for (std::size_t i : order) sorted.push_back(std::move(out[i]));
  return sorted;
}

std::vector<RunRecord> run_rho_sweep(const std::string& problem, const std::map<std::string, double>& params,
                                     const std::vector<double>& rhos, const std::vector<Index>& sizes,
                                     const RunOptions& opts) {
  if (rhos.empty() || sizes.empty()) throw ArgumentError("rho sweep needs at least one rho and one size");
  for (double r : rhos)
    if (!(r > 0 && r <= 1)) throw ArgumentError("rho values must lie in (0, 1]");
  std::vector<std::pair<Index, double>> grid;
  for (Index n : sizes)
    for (double r : rhos) grid.emplace_back(n, r);

  std::vector<RunRecord> out(grid.size());
  run_parallel(grid.size(), opts.threads, [&](std::size_t c) {
    RunOptions local = opts;
    local.rho = grid[c].second;
    try {
      out[c] = run_cell(make_problem(problem, grid[c].first, params), Method::MRNABK, local);
    } catch (const std::exception&) {
      RunRecord& rec = out[c];
      rec.method = "mrnabk";
      rec.problem = canonical_problem_name(problem);
      rec.n = grid[c].first;
      rec.rho = grid[c].second;
      rec.repeats = opts.repeats;
      rec.status = Status::NumericalBreakdown;
      rec.final_residual_sq = std::nan("");
    }
  });
  std::stable_sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.n != b.n) return a.n < b.n;
    return a.rho.value_or(0) < b.rho.value_or(0);
  });
  return out;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kRunRecordHeader << '\n';
  for (const auto& r : records) {
    os << r.method << ',' << r.problem << ',' << r.n << ',' << r.m << ',' << (r.rho ? format_double(*r.rho) : "")
       << ',' << r.iters << ',' << format_double(r.final_residual_sq) << ',' << format_double(r.wall_ms) << ','
       << (r.seed ? std::to_string(*r.seed) : "") << ',' << r.repeats << ',' << to_string(r.status) << '\n';
  }
  return os.str();
}

std::string iteration_stats_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kIterationStatsHeader << '\n';
  for (const auto& r : records)
    os << r.method << ',' << r.problem << ',' << r.n << ',' << r.repeats << ',' << format_double(r.iters_median)
       << ',' << format_double(r.iters_mean) << ',' << r.iters_min << ',' << r.iters_max << '\n';
  return os.str();
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["problem"] = r.problem;
  j["n"] = r.n;
  j["m"] = r.m;
  j["rho"] = r.rho ? nlohmann::json(*r.rho) : nlohmann::json(nullptr);
  j["iters"] = r.iters;
  j["final_residual_sq"] = r.final_residual_sq;
  j["wall_ms"] = r.wall_ms;
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  j["repeats"] = r.repeats;
  j["status"] = std::string(to_string(r.status));
  j["iters_all"] = r.iters_all;
  j["iters_median"] = r.iters_median;
  j["iters_mean"] = r.iters_mean;
  j["iters_min"] = r.iters_min;
  j["iters_max"] = r.iters_max;
  return j;
}

std::string history_to_csv(const SolverReport<double>& report) {
  std::ostringstream os;
  os << kHistoryHeader << '\n';
  for (const auto& h : report.history)
    os << h.k << ',' << format_double(h.residual_sq) << ',' << h.block_size << ',' << format_double(h.step_norm)
       << '\n';
  return os.str();
}

Vector<double> resolve_x0(const std::string& selector, const ProblemSpec& spec) {
  if (selector == "paper") return spec.x0;
  if (selector == "zeros") return Vector<double>::Zero(spec.n);
  if (selector.rfind("const:", 0) == 0) {
    const std::string v = selector.substr(6);
    double value = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), value);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw ArgumentError("bad x0 constant '" + v + "'");
    return Vector<double>::Constant(spec.n, value);
  }
  throw ArgumentError("x0 must be paper, zeros or const:<v>, got '" + selector + "'");
}

SolveOutcome solve(const SolveRequest& request) {
  SolveOutcome out;
  ProblemInstance problem = make_problem(request.problem, request.n, request.params);
  out.spec = problem.spec;
  SolverConfig<double> cfg = request.config;
  cfg.method = request.method;
  const Vector<double> x0 = resolve_x0(request.x0, problem.spec);

  const auto t0 = std::chrono::steady_clock::now();
  out.report = run(*problem.system, x0, cfg);
  const auto t1 = std::chrono::steady_clock::now();
  out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  nlohmann::json& j = out.json;
  j["problem"] = problem.spec.name;
  j["n"] = problem.spec.n;
  j["m"] = problem.spec.m;
  j["params"] = problem.spec.params;
  j["method"] = std::string(to_string(cfg.method));
  j["rho"] = cfg.method == Method::MRNABK ? nlohmann::json(cfg.rho) : nlohmann::json(nullptr);
  j["tol_sq"] = cfg.tol_sq;
  j["max_iters"] = cfg.max_iters;
  j["seed"] = is_randomized(cfg.method) ? nlohmann::json(cfg.seed) : nlohmann::json(nullptr);
  j["x0"] = request.x0;
  j["status"] = std::string(to_string(out.report.status));
  j["iters"] = out.report.iters;
  j["final_residual_sq"] = out.report.final_residual_sq;
  j["wall_ms"] = out.wall_ms;
  if (!out.report.message.empty()) j["message"] = out.report.message;
  j["x"] = std::vector<double>(out.report.x.data(), out.report.x.data() + out.report.x.size());
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : out.report.history) hist.push_back({h.k, h.residual_sq, h.block_size, h.step_norm});
  j["history_columns"] = {"k", "residual_sq", "block_size", "step_norm"};
  j["history"] = std::move(hist);
  return out;
}

}  // namespace nabk
