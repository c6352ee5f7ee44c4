#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "nabk/system.hpp"

namespace nabk {

/// A block of row indices chosen for one iteration.
template <typename Scalar>
struct BlockSelection {
  /// Ascending row indices.
  std::vector<Index> indices;
  /// The rule's parameter: delta_k for the greedy rules, rho for the max-residual rule.
  Scalar parameter = 0;
  /// Rows whose (possibly weighted) squared residual reaches this value are selected.
  Scalar cutoff = 0;

  std::size_t size() const { return indices.size(); }
  bool contains(Index i) const {
    for (Index j : indices)
      if (j == i) return true;
    return false;
  }
};

/// First index attaining max |v_i|; ties go to the smallest index.
template <typename Derived>
Index argmax_abs(const Eigen::MatrixBase<Derived>& v) {
  using std::abs;
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (abs(v[i]) > abs(v[best])) best = i;
  return best;
}

namespace detail {

template <typename Scalar>
void require_nonzero(const Vector<Scalar>& fx) {
  if (fx.size() == 0 || fx.squaredNorm() == Scalar(0))
    throw std::logic_error("block selection on a zero residual; the solver should have stopped");
}

// Members by threshold; the argmax row is forced in so rounding in the cutoff cannot drop it.
template <typename Scalar>
std::vector<Index> rows_at_or_above(const Vector<Scalar>& sq, Scalar cutoff, Index argmax) {
  std::vector<Index> out;
  for (Index i = 0; i < sq.size(); ++i)
    if (sq[i] >= cutoff || i == argmax) out.push_back(i);
  return out;
}

}  // namespace detail

/**
 * Greedy relative-residual block:
 *   delta_k = (max_i f_i^2 / ||f||^2 + 1/m) / 2,
 *   tau_k   = { i : f_i^2 >= delta_k ||f||^2 }.
 * Needs residuals only; no Jacobian information.
 */
template <typename Scalar>
BlockSelection<Scalar> select_ngabk(const Vector<Scalar>& fx) {
  detail::require_nonzero(fx);
  const Vector<Scalar> sq = fx.cwiseAbs2();
  const Scalar total = sq.sum();
  const Index top = argmax_abs(fx);
  const Scalar delta = Scalar(0.5) * (sq[top] / total + Scalar(1) / Scalar(fx.size()));
  BlockSelection<Scalar> sel;
  sel.parameter = delta;
  sel.cutoff = delta * total;
  sel.indices = detail::rows_at_or_above(sq, sel.cutoff, top);
  return sel;
}

/// Max-residual block: tau_k = { i : f_i^2 >= rho * max_j f_j^2 }, rho in (0, 1].
template <typename Scalar>
BlockSelection<Scalar> select_mrnabk(const Vector<Scalar>& fx, Scalar rho) {
  if (!(rho > Scalar(0) && rho <= Scalar(1))) throw ArgumentError("rho must lie in (0, 1]");
  detail::require_nonzero(fx);
  const Vector<Scalar> sq = fx.cwiseAbs2();
  const Index top = argmax_abs(fx);
  BlockSelection<Scalar> sel;
  sel.parameter = rho;
  sel.cutoff = rho * sq[top];
  sel.indices = detail::rows_at_or_above(sq, sel.cutoff, top);
  return sel;
}

/**
 * Residual-distance capped block, weighted by row-gradient norms:
 *   delta_k = (max_i (f_i^2 / ||grad f_i||^2) / ||f||^2 + 1 / ||J||_F^2) / 2,
 *   I_k     = { i : f_i^2 >= delta_k ||f||^2 ||grad f_i||^2 }.
 * `grad_sq` holds ||grad f_i||^2 for every row (one full Jacobian sweep).
 * A row with zero gradient but nonzero residual has infinite distance; if any
 * exist they form the whole block.
 */
template <typename Scalar>
BlockSelection<Scalar> select_rdcnk(const Vector<Scalar>& fx, const Vector<Scalar>& grad_sq) {
  detail::require_nonzero(fx);
  if (grad_sq.size() != fx.size()) throw ArgumentError("select_rdcnk: gradient norms have wrong length");
  const Scalar frob = grad_sq.sum();
  if (frob == Scalar(0)) throw BreakdownError("select_rdcnk: every row gradient vanishes");

  const Vector<Scalar> sq = fx.cwiseAbs2();
  const Scalar total = sq.sum();
  BlockSelection<Scalar> sel;
  for (Index i = 0; i < fx.size(); ++i)
    if (grad_sq[i] == Scalar(0) && sq[i] > Scalar(0)) sel.indices.push_back(i);
  if (!sel.indices.empty()) {
    sel.parameter = std::numeric_limits<Scalar>::infinity();
    sel.cutoff = std::numeric_limits<Scalar>::infinity();
    return sel;
  }

  Index top = -1;
  Scalar best = -1;
  for (Index i = 0; i < fx.size(); ++i) {
    if (grad_sq[i] == Scalar(0)) continue;
    const Scalar ratio = sq[i] / grad_sq[i];
    if (ratio > best) {
      best = ratio;
      top = i;
    }
  }
  const Scalar delta = Scalar(0.5) * (best / total + Scalar(1) / frob);
  sel.parameter = delta;
  sel.cutoff = delta * total;
  for (Index i = 0; i < fx.size(); ++i)
    if ((grad_sq[i] > Scalar(0) && sq[i] >= sel.cutoff * grad_sq[i]) || i == top) sel.indices.push_back(i);
  return sel;
}

template <typename Scalar>
BlockSelection<Scalar> select_rdcnk(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state) {
  return select_rdcnk<Scalar>(state.fx, sys.row_gradient_sq_norms(state.x));
}

}  // namespace nabk
