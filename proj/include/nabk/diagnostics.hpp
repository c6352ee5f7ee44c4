#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "nabk/problems.hpp"
#include "nabk/selection.hpp"
#include "nabk/solver.hpp"
#include "nabk/system.hpp"

namespace nabk {

/// Dense SVDs are refused above this dimension.
inline constexpr Index kMaxDenseDimension = 2000;

class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

template <typename Scalar>
using PointPair = std::pair<Vector<Scalar>, Vector<Scalar>>;

/**
 * Empirical tangential-cone constants. For row i and pair (x1, x2):
 *   |f_i(x1) - f_i(x2) - grad f_i(x1)^T (x1 - x2)| / |f_i(x1) - f_i(x2)|.
 */
template <typename Scalar>
struct ConeEstimate {
  Vector<Scalar> xi_per_row;
  /// Rows for which at least one pair had a usable residual difference.
  std::vector<bool> available;
  Scalar xi = 0;
  std::size_t pairs_used = 0;

  /// The convergence theory needs xi < 1/2.
  bool satisfies_hypothesis() const { return xi < Scalar(0.5); }
};

/// Pair differences below this are skipped per row.
template <typename Scalar>
constexpr Scalar kConeSkipThreshold = Scalar(1e-14);

template <typename Scalar>
ConeEstimate<Scalar> estimate_cone(const NonlinearSystem<Scalar>& sys, const std::vector<PointPair<Scalar>>& pairs) {
  using std::abs;
  const Index m = sys.rows();
  ConeEstimate<Scalar> est;
  est.xi_per_row = Vector<Scalar>::Zero(m);
  est.available.assign(std::size_t(m), false);
  for (const auto& [x1, x2] : pairs) {
    const Vector<Scalar> df = evaluate_residual(sys, x1) - evaluate_residual(sys, x2);
    const Vector<Scalar> dx = x1 - x2;
    bool used = false;
    for (Index i = 0; i < m; ++i) {
      const Scalar diff = abs(df[i]);
      if (diff < kConeSkipThreshold<Scalar>) continue;
      const Scalar remainder = abs(df[i] - evaluate_row_gradient(sys, i, x1).dot(dx));
      est.xi_per_row[i] = std::max(est.xi_per_row[i], remainder / diff);
      est.available[std::size_t(i)] = true;
      used = true;
    }
    if (used) ++est.pairs_used;
  }
  est.xi = 0;
  for (Index i = 0; i < m; ++i)
    if (est.available[std::size_t(i)]) est.xi = std::max(est.xi, est.xi_per_row[i]);
  return est;
}

/// Pairs with x1 uniform in the box and x2 at distance at most `radius` from x1, clipped to the box.
template <typename Scalar, typename Rng>
std::vector<PointPair<Scalar>> sample_pairs(const Box<Scalar>& box, std::size_t count, Scalar radius, Rng& rng) {
  const Index n = box.lower.size();
  std::uniform_real_distribution<Scalar> unit(0, 1);
  std::normal_distribution<Scalar> gauss(0, 1);
  std::vector<PointPair<Scalar>> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Vector<Scalar> x1(n), dir(n);
    for (Index j = 0; j < n; ++j) x1[j] = box.lower[j] + unit(rng) * (box.upper[j] - box.lower[j]);
    for (Index j = 0; j < n; ++j) dir[j] = gauss(rng);
    dir *= radius * unit(rng) / dir.norm();
    Vector<Scalar> x2 = (x1 + dir).cwiseMax(box.lower).cwiseMin(box.upper);
    out.emplace_back(std::move(x1), std::move(x2));
  }
  return out;
}

template <typename Scalar>
struct Lemma1Check {
  /// ||f_tau(x1) - f_tau(x2)||^2
  Scalar lhs = 0;
  /// ||J_tau(x1) (x1 - x2)||^2 / (1 + xi^2)
  Scalar rhs = 0;
  bool holds = false;
};

/// Block residual-difference lower bound, with relative slack 1e-10.
template <typename Scalar>
Lemma1Check<Scalar> check_lemma1(const NonlinearSystem<Scalar>& sys, const std::vector<Index>& tau,
                                 const Vector<Scalar>& x1, const Vector<Scalar>& x2, Scalar xi) {
  const Vector<Scalar> df = evaluate_residual(sys, x1) - evaluate_residual(sys, x2);
  const Vector<Scalar> dx = x1 - x2;
  Lemma1Check<Scalar> out;
  Scalar lin = 0;
  for (Index i : tau) {
    out.lhs += df[i] * df[i];
    const Scalar t = evaluate_row_gradient(sys, i, x1).dot(dx);
    lin += t * t;
  }
  out.rhs = lin / (Scalar(1) + xi * xi);
  out.holds = out.lhs >= out.rhs - Scalar(1e-10) * std::max(out.lhs, out.rhs);
  return out;
}

/// Per-step contraction factor from the convergence theorems.
template <typename Scalar>
struct StepBound {
  Scalar rho_bound = 1;
  Scalar sigma_min_full = 0;
  Scalar sigma_max_block = 0;
  std::size_t block_size = 0;
  /// delta_k for the greedy rule, rho for the max-residual rule.
  Scalar delta_or_rho = 0;
  Scalar xi = 0;
  /// Frobenius norm squared of the full Jacobian; used by the NRK comparison.
  Scalar jacobian_frobenius_sq = 0;
  /// xi < 1/2 and the full Jacobian has positive smallest singular value.
  bool applicable = false;
};

namespace detail {

inline void guard_dense(Index m, Index n) {
  if (std::max(m, n) > kMaxDenseDimension)
    throw SizeGuardError("dense singular values refused for a " + std::to_string(m) + " x " + std::to_string(n) +
                         " Jacobian (limit " + std::to_string(kMaxDenseDimension) + ")");
}

template <typename Scalar>
Vector<Scalar> singular_values(const Matrix<Scalar>& A) {
  Eigen::BDCSVD<Matrix<Scalar>> svd(A);
  return svd.singularValues();
}

}  // namespace detail

/// rho = 1 - (1 - 2 xi) / (1 + xi^2) * gain, with gain = delta|tau| s_min^2 / s_max^2 (greedy rule)
/// or rho|tau| s_min^2 / (m s_max^2) (max-residual rule).
template <typename Scalar>
StepBound<Scalar> theorem_bound(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                                const BlockSelection<Scalar>& sel, Scalar xi, Method method, Scalar rho) {
  if (method != Method::NGABK && method != Method::MRNABK)
    throw ArgumentError("theorem_bound covers the two average block methods only");
  detail::guard_dense(sys.rows(), sys.cols());
  const Matrix<Scalar> J = sys.jacobian(state.x);
  Matrix<Scalar> block(Index(sel.size()), J.cols());
  for (Index r = 0; r < block.rows(); ++r) block.row(r) = J.row(sel.indices[std::size_t(r)]);

  StepBound<Scalar> b;
  const Vector<Scalar> sv = detail::singular_values(J);
  b.sigma_min_full = sv.size() ? sv[sv.size() - 1] : Scalar(0);
  b.sigma_max_block = detail::singular_values(block)[0];
  b.block_size = sel.size();
  b.delta_or_rho = method == Method::NGABK ? sel.parameter : rho;
  b.xi = xi;
  b.jacobian_frobenius_sq = J.squaredNorm();

  const Scalar cone = (Scalar(1) - Scalar(2) * xi) / (Scalar(1) + xi * xi);
  Scalar gain = 0;
  if (b.sigma_max_block > Scalar(0)) {
    const Scalar ratio = b.sigma_min_full * b.sigma_min_full / (b.sigma_max_block * b.sigma_max_block);
    gain = method == Method::NGABK ? b.delta_or_rho * Scalar(b.block_size) * ratio
                                   : b.delta_or_rho * Scalar(b.block_size) * ratio / Scalar(sys.rows());
  }
  b.rho_bound = Scalar(1) - cone * gain;
  b.applicable = xi < Scalar(0.5) && b.sigma_min_full > Scalar(0);
  return b;
}

template <typename Scalar>
struct Remark2Report {
  Scalar rho_block = 0;
  Scalar rho_nrk = 0;
  bool strictly_smaller = false;
};

/// rho_NRK = 1 - (1 - 2 xi) / (1 + xi)^2 * s_min^2 / (m ||J||_F^2).
template <typename Scalar>
Scalar nrk_contraction_factor(Scalar xi, Scalar sigma_min, Scalar frobenius_sq, Index m) {
  return Scalar(1) - (Scalar(1) - Scalar(2) * xi) / ((Scalar(1) + xi) * (Scalar(1) + xi)) * sigma_min * sigma_min /
                         (Scalar(m) * frobenius_sq);
}

template <typename Scalar>
Remark2Report<Scalar> remark2_compare(const StepBound<Scalar>& bound, const NonlinearSystem<Scalar>& sys,
                                      const IterateState<Scalar>& state, Scalar xi) {
  Scalar frob = bound.jacobian_frobenius_sq;
  if (frob == Scalar(0)) {
    detail::guard_dense(sys.rows(), sys.cols());
    frob = sys.jacobian(state.x).squaredNorm();
  }
  Remark2Report<Scalar> r;
  r.rho_block = bound.rho_bound;
  r.rho_nrk = nrk_contraction_factor(xi, bound.sigma_min_full, frob, sys.rows());
  r.strictly_smaller = r.rho_block < r.rho_nrk;
  return r;
}

/// ||x_{k+1} - x*||^2 / ||x_k - x*||^2 along a run kept with keep_iterates; stops at the first exact hit.
template <typename Scalar>
std::vector<Scalar> per_step_contraction(const SolverReport<Scalar>& report, const PointArg<Scalar>& x_star) {
  std::vector<Scalar> ratios;
  for (std::size_t k = 0; k + 1 < report.iterates.size(); ++k) {
    const Scalar before = (report.iterates[k] - x_star).squaredNorm();
    if (before == Scalar(0)) break;
    ratios.push_back((report.iterates[k + 1] - x_star).squaredNorm() / before);
  }
  return ratios;
}

}  // namespace nabk
