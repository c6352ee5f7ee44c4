#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nabk/selection.hpp"
#include "nabk/steps.hpp"
#include "nabk/system.hpp"

namespace nabk {

enum class Method { NGABK, MRNABK, NRK, RDCNK, RBCNK, Newton };

inline constexpr Method kIterativeMethods[] = {Method::NRK, Method::RDCNK, Method::NGABK, Method::RBCNK,
                                               Method::MRNABK};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::NGABK: return "ngabk";
    case Method::MRNABK: return "mrnabk";
    case Method::NRK: return "nrk";
    case Method::RDCNK: return "rdcnk";
    case Method::RBCNK: return "rbcnk";
    case Method::Newton: return "newton";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::NGABK, Method::MRNABK, Method::NRK, Method::RDCNK, Method::RBCNK, Method::Newton})
    if (to_string(m) == s) return m;
  if (s == "rd-cnk") return Method::RDCNK;
  if (s == "rb-cnk") return Method::RBCNK;
  return std::nullopt;
}

/// True for the methods that draw random indices.
inline bool is_randomized(Method m) { return m == Method::NRK || m == Method::RDCNK; }

template <typename Scalar>
struct SolverConfig {
  Method method = Method::NGABK;
  /// Relaxation for the max-residual block rule.
  Scalar rho = Scalar(0.1);
  std::size_t max_iters = 200000;
  /// Stop once ||f(x_k)||^2 < tol_sq.
  Scalar tol_sq = Scalar(1e-6);
  std::uint64_t seed = 0;
  /// Keep every iterate x_k in the report (diagnostic runs only).
  bool keep_iterates = false;

  void validate() const {
    if (!(rho > Scalar(0) && rho <= Scalar(1))) throw ArgumentError("rho must lie in (0, 1]");
    if (!(tol_sq > Scalar(0))) throw ArgumentError("tol_sq must be positive");
    if (max_iters == 0) throw ArgumentError("max_iters must be positive");
  }
};

enum class Status { Converged, MaxIters, NumericalBreakdown };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIters: return "max_iters";
    case Status::NumericalBreakdown: return "breakdown";
  }
  return "?";
}

template <typename Scalar>
struct HistoryRecord {
  std::size_t k = 0;
  Scalar residual_sq = 0;
  /// Rows used by the step taken from x_k; 0 on the terminal record.
  std::size_t block_size = 0;
  /// ||x_{k+1} - x_k||; 0 on the terminal record.
  Scalar step_norm = 0;
};

template <typename Scalar>
struct SolverReport {
  Status status = Status::MaxIters;
  std::size_t iters = 0;
  Scalar final_residual_sq = 0;
  Vector<Scalar> x;
  /// One record per visited iterate, x_0 through the last one.
  std::vector<HistoryRecord<Scalar>> history;
  /// Filled when SolverConfig::keep_iterates is set.
  std::vector<Vector<Scalar>> iterates;
  /// Set on breakdown.
  std::string message;
};

namespace detail {

template <typename Scalar>
IterateState<Scalar> advance(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                             const SolverConfig<Scalar>& cfg, std::mt19937_64& rng, std::size_t& block_size) {
  switch (cfg.method) {
    case Method::NGABK: {
      const auto sel = select_ngabk(state.fx);
      block_size = sel.size();
      return average_block_step(sys, state, sel);
    }
    case Method::MRNABK: {
      const auto sel = select_mrnabk(state.fx, cfg.rho);
      block_size = sel.size();
      return average_block_step(sys, state, sel);
    }
    case Method::NRK:
      block_size = 1;
      return nrk_step(sys, state, rng);
    case Method::RDCNK:
      block_size = 1;
      return rdcnk_step(sys, state, rng);
    case Method::RBCNK: {
      BlockSelection<Scalar> sel;
      auto next = rbcnk_step(sys, state, &sel);
      block_size = sel.size();
      return next;
    }
    case Method::Newton:
      block_size = std::size_t(sys.rows());
      return newton_step(sys, state);
  }
  throw std::logic_error("unknown method");
}

}  // namespace detail

/**
 * Iterates the configured method from x0.
 *
 * The stopping test runs before every step, so a starting point that already
 * meets the tolerance returns with zero iterations. Breakdown and domain
 * errors during the loop end the run with Status::NumericalBreakdown; the
 * message names the failing iteration.
 */
template <typename Scalar>
SolverReport<Scalar> run(const NonlinearSystem<Scalar>& sys, const PointArg<Scalar>& x0,
                         const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  if (x0.size() != sys.cols()) throw ArgumentError("x0 has length " + std::to_string(x0.size()) + ", expected " +
                                                   std::to_string(sys.cols()));
  std::mt19937_64 rng(cfg.seed);
  SolverReport<Scalar> report;
  IterateState<Scalar> state;
  state.x = x0;
  auto fail = [&](const std::exception& e, Scalar r2, std::size_t block_size) {
    report.history.push_back({state.k, r2, block_size, 0});
    report.status = Status::NumericalBreakdown;
    report.message = "iteration " + std::to_string(state.k) + ": " + e.what();
  };
  try {
    state = IterateState<Scalar>::at(sys, x0);
  } catch (const DomainError& e) {
    state.fx = Vector<Scalar>::Constant(sys.rows(), std::numeric_limits<Scalar>::quiet_NaN());
    fail(e, std::numeric_limits<Scalar>::quiet_NaN(), 0);
    report.x = state.x;
    report.final_residual_sq = std::numeric_limits<Scalar>::quiet_NaN();
    return report;
  }

  for (;;) {
    const Scalar r2 = state.residual_sq();
    if (cfg.keep_iterates) report.iterates.push_back(state.x);
    if (r2 < cfg.tol_sq || state.k >= cfg.max_iters) {
      report.history.push_back({state.k, r2, 0, 0});
      report.status = r2 < cfg.tol_sq ? Status::Converged : Status::MaxIters;
      break;
    }
    std::size_t block_size = 0;
    try {
      IterateState<Scalar> next = detail::advance(sys, state, cfg, rng, block_size);
      report.history.push_back({state.k, r2, block_size, (next.x - state.x).norm()});
      state = std::move(next);
    } catch (const BreakdownError& e) {
      fail(e, r2, block_size);
      break;
    } catch (const DomainError& e) {
      fail(e, r2, block_size);
      break;
    }
  }
  report.iters = state.k;
  report.final_residual_sq = state.residual_sq();
  report.x = std::move(state.x);
  return report;
}

}  // namespace nabk
