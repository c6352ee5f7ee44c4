#include "nabk/diagnose.hpp"

#include <numeric>

#include "nabk/bench.hpp"
#include "nabk/diagnostics.hpp"
#include "nabk/registry.hpp"

namespace nabk {

namespace {

constexpr double kBoundSlack = 1e-10;
constexpr double kSingularSigma = 1e-6;

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::json run_diagnose(const DiagnoseOptions& opts) {
  if (opts.method != Method::NGABK && opts.method != Method::MRNABK)
    throw ArgumentError("diagnose supports ngabk and mrnabk only");
  const ProblemInstance inst = make_problem(opts.problem, opts.n, opts.params);
  detail::guard_dense(inst.spec.m, inst.spec.n);
  const NonlinearSystem<double>& sys = *inst.system;

  nlohmann::json out;
  out["problem"] = inst.spec.name;
  out["n"] = inst.spec.n;
  out["m"] = inst.spec.m;
  out["method"] = std::string(to_string(opts.method));
  out["rho"] = opts.method == Method::MRNABK ? nlohmann::json(opts.rho) : nlohmann::json(nullptr);

  // Reference solution
  Vector<double> x_star;
  if (auto known = sys.known_solution()) {
    x_star = *known;
    out["x_star_source"] = "known";
  } else {
    SolverConfig<double> ref;
    ref.method = Method::Newton;
    ref.tol_sq = 1e-28;
    ref.max_iters = 500;
    x_star = run(sys, inst.spec.x0, ref).x;
    out["x_star_source"] = "reference_newton";
  }
  out["x_star_residual_sq"] = evaluate_residual(sys, x_star).squaredNorm();

  // Global cone estimate over sampled pairs
  std::mt19937_64 rng(opts.seed);
  const double radius = opts.pair_radius * inst.spec.sample_box.diameter();
  const auto pairs = sample_pairs(inst.spec.sample_box, opts.pairs, radius, rng);
  const ConeEstimate<double> cone = estimate_cone(sys, pairs);
  std::vector<Index> all_rows(std::size_t(sys.rows()));
  std::iota(all_rows.begin(), all_rows.end(), Index(0));
  std::size_t lemma1_holds = 0;
  for (const auto& [x1, x2] : pairs)
    if (check_lemma1(sys, all_rows, x1, x2, cone.xi).holds) ++lemma1_holds;
  nlohmann::json cone_json;
  cone_json["xi"] = cone.xi;
  cone_json["xi_per_row"] = to_std(cone.xi_per_row);
  cone_json["available"] = cone.available;
  cone_json["pairs_used"] = cone.pairs_used;
  cone_json["pair_radius"] = radius;
  cone_json["satisfies_hypothesis"] = cone.satisfies_hypothesis();
  cone_json["lemma1_pairs_checked"] = pairs.size();
  cone_json["lemma1_pairs_holding"] = lemma1_holds;
  out["cone"] = std::move(cone_json);

  // Trajectory with snapshots
  SolverConfig<double> cfg;
  cfg.method = opts.method;
  cfg.rho = opts.rho;
  cfg.tol_sq = opts.tol_sq;
  cfg.max_iters = opts.max_iters;
  cfg.keep_iterates = true;
  const SolverReport<double> report = run(sys, resolve_x0(opts.x0, inst.spec), cfg);
  out["status"] = std::string(to_string(report.status));
  out["iters"] = report.iters;
  out["final_residual_sq"] = report.final_residual_sq;

  const std::vector<double> ratios = per_step_contraction(report, x_star);
  nlohmann::json steps = nlohmann::json::array();
  std::size_t applicable = 0, within = 0, strict = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const IterateState<double> state = IterateState<double>::at(sys, report.iterates[k], k);
    const BlockSelection<double> sel =
        opts.method == Method::NGABK ? select_ngabk(state.fx) : select_mrnabk(state.fx, opts.rho);
    // The per-step theory only uses the pair (x_k, x*).
    const double xi_step = estimate_cone(sys, {{state.x, x_star}}).xi;
    const StepBound<double> b = theorem_bound(sys, state, sel, xi_step, opts.method, opts.rho);
    const Remark2Report<double> r2 = remark2_compare(b, sys, state, xi_step);
    const bool ok = ratios[k] <= b.rho_bound + kBoundSlack;
    if (b.applicable) {
      ++applicable;
      if (ok) ++within;
      if (r2.strictly_smaller) ++strict;
    }
    steps.push_back({{"k", k},
                     {"block_size", b.block_size},
                     {"delta_or_rho", b.delta_or_rho},
                     {"xi", xi_step},
                     {"sigma_min_full", b.sigma_min_full},
                     {"sigma_max_block", b.sigma_max_block},
                     {"rho_bound", b.rho_bound},
                     {"measured_ratio", ratios[k]},
                     {"applicable", b.applicable},
                     {"within_bound", ok},
                     {"rho_nrk", r2.rho_nrk},
                     {"remark2_strict", r2.strictly_smaller}});
  }
  out["steps"] = std::move(steps);

  const Matrix<double> J_final = sys.jacobian(report.x);
  const Vector<double> sv = detail::singular_values(J_final);
  const double sigma_min_final = sv.size() ? sv[sv.size() - 1] : 0.0;
  nlohmann::json summary;
  summary["steps"] = ratios.size();
  summary["applicable_steps"] = applicable;
  summary["applicable_within_bound"] = within;
  summary["all_applicable_within_bound"] = within == applicable;
  summary["remark2_all_strict"] = strict == applicable;
  summary["sigma_min_final"] = sigma_min_final;
  summary["singular_near_solution"] = sigma_min_final < kSingularSigma;
  summary["bounds_inapplicable_steps"] = ratios.size() - applicable;
  out["summary"] = std::move(summary);
  return out;
}

}  // namespace nabk
