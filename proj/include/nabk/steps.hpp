#pragma once

#include <random>
#include <string>

#include <Eigen/Dense>

#include "nabk/selection.hpp"
#include "nabk/system.hpp"

namespace nabk {

/// ||J^T eta||^2 below this (with a nonconverged residual) means the average direction was annihilated.
template <typename Scalar>
constexpr Scalar kBreakdownThreshold = Scalar(1e-30);

/// The averaged search direction of one block step.
template <typename Scalar>
struct StepDirection {
  /// eta = sum_{i in tau} (-f_i) e_i; zero off the block.
  Vector<Scalar> eta;
  /// J^T eta, assembled from the block's rows only.
  Vector<Scalar> jt_eta;
  /// eta^T f / ||J^T eta||^2.
  Scalar step_scale = 0;
};

/// Builds eta and J^T eta from the selected rows. Touches |tau| row gradients.
template <typename Scalar>
StepDirection<Scalar> make_step_direction(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                                          const BlockSelection<Scalar>& sel) {
  if (sel.indices.empty()) throw ArgumentError("block step needs a nonempty selection");
  StepDirection<Scalar> dir;
  dir.eta = Vector<Scalar>::Zero(sys.rows());
  dir.jt_eta = Vector<Scalar>::Zero(sys.cols());
  Scalar eta_dot_f = 0;
  for (Index i : sel.indices) {
    const Scalar fi = state.fx[i];
    dir.eta[i] = -fi;
    eta_dot_f -= fi * fi;
    sys.add_row_gradient(i, state.x, -fi, dir.jt_eta);
  }
  const Scalar denom = dir.jt_eta.squaredNorm();
  if (denom < kBreakdownThreshold<Scalar>)
    throw BreakdownError("average block direction vanished (||J^T eta||^2 = " + std::to_string(double(denom)) + ")");
  dir.step_scale = eta_dot_f / denom;
  return dir;
}

/// x_{k+1} = x_k - (eta^T f / ||J^T eta||^2) J^T eta. No pseudoinverse, no full Jacobian.
template <typename Scalar>
IterateState<Scalar> average_block_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                                        const BlockSelection<Scalar>& sel) {
  const StepDirection<Scalar> dir = make_step_direction(sys, state, sel);
  return IterateState<Scalar>::at(sys, state.x - dir.step_scale * dir.jt_eta, state.k + 1);
}

/// Projection onto the linearization of row i: x - f_i / ||grad f_i||^2 grad f_i.
template <typename Scalar>
IterateState<Scalar> row_projection_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                                         Index i) {
  const Vector<Scalar> g = evaluate_row_gradient(sys, i, state.x);
  const Scalar gg = g.squaredNorm();
  if (gg < kBreakdownThreshold<Scalar>)
    throw BreakdownError("row " + std::to_string(i) + " has a vanishing gradient");
  return IterateState<Scalar>::at(sys, state.x - (state.fx[i] / gg) * g, state.k + 1);
}

/// Draws row i with probability f_i^2 / ||f||^2.
template <typename Scalar, typename Rng>
Index sample_nrk_row(const Vector<Scalar>& fx, Rng& rng) {
  const Vector<Scalar> sq = fx.cwiseAbs2();
  std::discrete_distribution<Index> pick(sq.data(), sq.data() + sq.size());
  return pick(rng);
}

/// Nonlinear randomized Kaczmarz: one sampled row, one projection.
template <typename Scalar, typename Rng>
IterateState<Scalar> nrk_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state, Rng& rng) {
  if (state.fx.squaredNorm() == Scalar(0)) throw std::logic_error("nrk_step at an exact root");
  return row_projection_step(sys, state, sample_nrk_row(state.fx, rng));
}

/// RD-CNK as a single-sample method: form I_k, draw one index uniformly from it, project.
template <typename Scalar, typename Rng>
IterateState<Scalar> rdcnk_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state, Rng& rng,
                                BlockSelection<Scalar>* used = nullptr) {
  BlockSelection<Scalar> sel = select_rdcnk(sys, state);
  std::uniform_int_distribution<std::size_t> pick(0, sel.indices.size() - 1);
  const Index i = sel.indices[pick(rng)];
  if (used) *used = std::move(sel);
  return row_projection_step(sys, state, i);
}

namespace detail {

// Minimum-norm solution of A d = -r.
template <typename Scalar>
Vector<Scalar> min_norm_correction(const Matrix<Scalar>& A, const Vector<Scalar>& r) {
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(A);
  if (cod.rank() == 0) throw BreakdownError("least-squares block has rank zero");
  Vector<Scalar> d = -cod.solve(r);
  if (!d.allFinite()) throw BreakdownError("least-squares correction is not finite");
  return d;
}

}  // namespace detail

/**
 * RB-CNK: pseudoinverse step on a block, x + argmin-norm ||J_I d + f_I||.
 * The block comes from the same residual rule as select_ngabk so the two
 * methods differ only in how the block is applied.
 */
template <typename Scalar>
IterateState<Scalar> rbcnk_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state,
                                BlockSelection<Scalar>* used = nullptr) {
  BlockSelection<Scalar> sel = select_ngabk(state.fx);
  const Index rows = Index(sel.indices.size());
  Matrix<Scalar> JI(rows, sys.cols());
  Vector<Scalar> fI(rows);
  for (Index r = 0; r < rows; ++r) {
    const Index i = sel.indices[std::size_t(r)];
    JI.row(r) = evaluate_row_gradient(sys, i, state.x).transpose();
    fI[r] = state.fx[i];
  }
  Vector<Scalar> d = detail::min_norm_correction(JI, fI);
  if (used) *used = std::move(sel);
  return IterateState<Scalar>::at(sys, state.x + d, state.k + 1);
}

/// Newton-Raphson: x - J^+ f via minimum-norm least squares on the full Jacobian.
template <typename Scalar>
IterateState<Scalar> newton_step(const NonlinearSystem<Scalar>& sys, const IterateState<Scalar>& state) {
  const Matrix<Scalar> J = sys.jacobian(state.x);
  Vector<Scalar> d = detail::min_norm_correction(J, state.fx);
  return IterateState<Scalar>::at(sys, state.x + d, state.k + 1);
}

}  // namespace nabk
