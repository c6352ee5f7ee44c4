#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Core>

namespace nabk {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Bad caller input: wrong dimension, index out of range, parameter outside its domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation left the function's natural domain (zero denominator, non-finite value).
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, Index index) : std::domain_error(what), index_(index) {}
  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

/// The update is undefined at the current point (annihilated direction, failed factorization).
class BreakdownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * A residual map f : R^n -> R^m with per-row gradient access.
 *
 * Implementations are immutable after construction, and every member is a
 * pure function of its arguments, so a system may be shared across threads.
 * Rows are exposed one at a time because the block solvers only ever touch
 * the rows they selected.
 */
template <typename Scalar>
class NonlinearSystem {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  virtual ~NonlinearSystem() = default;

  /// Number of equations m.
  virtual Index rows() const = 0;
  /// Number of unknowns n.
  virtual Index cols() const = 0;
  virtual std::string name() const = 0;

  virtual VectorType residual(const VectorType& x) const = 0;
  /// Gradient of f_i at x, i.e. the transpose of row i of the Jacobian.
  virtual VectorType row_gradient(Index i, const VectorType& x) const = 0;

  /// out += alpha * grad f_i(x). Problems with sparse rows override this to touch only their nonzeros.
  virtual void add_row_gradient(Index i, const VectorType& x, Scalar alpha, VectorType& out) const {
    out.noalias() += alpha * row_gradient(i, x);
  }

  /// Dense Jacobian, assembled row by row unless a problem knows better.
  virtual MatrixType jacobian(const VectorType& x) const {
    MatrixType J(rows(), cols());
    for (Index i = 0; i < rows(); ++i) J.row(i) = row_gradient(i, x).transpose();
    return J;
  }

  /// Squared Euclidean norm of every row gradient. Costs one full Jacobian sweep.
  virtual VectorType row_gradient_sq_norms(const VectorType& x) const {
    VectorType out(rows());
    for (Index i = 0; i < rows(); ++i) out[i] = row_gradient(i, x).squaredNorm();
    return out;
  }

  virtual std::optional<VectorType> known_solution() const { return std::nullopt; }
};

/// Point argument of the free functions. Not deduced, so Eigen expressions convert.
template <typename Scalar>
using PointArg = std::type_identity_t<Vector<Scalar>>;

/// f(x), with dimension and finiteness checks.
template <typename Scalar>
Vector<Scalar> evaluate_residual(const NonlinearSystem<Scalar>& sys, const PointArg<Scalar>& x) {
  if (x.size() != sys.cols())
    throw ArgumentError(sys.name() + ": point has length " + std::to_string(x.size()) + ", expected " +
                        std::to_string(sys.cols()));
  Vector<Scalar> fx = sys.residual(x);
  if (fx.size() != sys.rows()) throw std::logic_error(sys.name() + ": residual has wrong length");
  for (Index i = 0; i < fx.size(); ++i) {
    if (!std::isfinite(fx[i]))
      throw DomainError(sys.name() + ": non-finite residual at row " + std::to_string(i), i);
  }
  return fx;
}

template <typename Scalar>
Vector<Scalar> evaluate_row_gradient(const NonlinearSystem<Scalar>& sys, Index i, const PointArg<Scalar>& x) {
  if (i < 0 || i >= sys.rows())
    throw ArgumentError(sys.name() + ": row index " + std::to_string(i) + " out of range [0, " +
                        std::to_string(sys.rows()) + ")");
  if (x.size() != sys.cols())
    throw ArgumentError(sys.name() + ": point has length " + std::to_string(x.size()) + ", expected " +
                        std::to_string(sys.cols()));
  return sys.row_gradient(i, x);
}

/**
 * Compares analytic row gradients against central differences.
 *
 * Step along coordinate j is h_scale * max(1, |x_j|). The returned entry for
 * row i is max_j |analytic_ij - numeric_ij| / max(1, max_j |analytic_ij|).
 */
template <typename Scalar>
Vector<Scalar> fd_check(const NonlinearSystem<Scalar>& sys, const PointArg<Scalar>& x,
                        Scalar h_scale = std::sqrt(std::numeric_limits<Scalar>::epsilon())) {
  using std::abs;
  const Index m = sys.rows(), n = sys.cols();
  Matrix<Scalar> numeric(m, n);
  Vector<Scalar> xp = x, xm = x;
  for (Index j = 0; j < n; ++j) {
    const Scalar h = h_scale * std::max(Scalar(1), abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    numeric.col(j) = (evaluate_residual(sys, xp) - evaluate_residual(sys, xm)) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  Vector<Scalar> deviation(m);
  for (Index i = 0; i < m; ++i) {
    const Vector<Scalar> g = evaluate_row_gradient(sys, i, x);
    const Scalar scale = std::max(Scalar(1), g.cwiseAbs().maxCoeff());
    deviation[i] = (g - numeric.row(i).transpose()).cwiseAbs().maxCoeff() / scale;
  }
  return deviation;
}

/// Current iterate with its cached residual.
template <typename Scalar>
struct IterateState {
  Vector<Scalar> x;
  Vector<Scalar> fx;
  std::size_t k = 0;

  static IterateState at(const NonlinearSystem<Scalar>& sys, Vector<Scalar> x0, std::size_t k = 0) {
    IterateState s;
    s.fx = evaluate_residual(sys, x0);
    s.x = std::move(x0);
    s.k = k;
    return s;
  }

  Scalar residual_sq() const { return fx.squaredNorm(); }
};

struct EvaluationCounts {
  std::size_t residual = 0;
  std::size_t row_gradient = 0;
  /// Full Jacobian sweeps (dense Jacobian or all row-gradient norms).
  std::size_t full_jacobian = 0;
};

/// Forwards to another system and counts evaluations. Counters are atomic.
template <typename Scalar>
class CountingSystem final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;
  using typename NonlinearSystem<Scalar>::MatrixType;

  explicit CountingSystem(const NonlinearSystem<Scalar>& inner) : inner_(inner) {}

  Index rows() const override { return inner_.rows(); }
  Index cols() const override { return inner_.cols(); }
  std::string name() const override { return inner_.name(); }

  VectorType residual(const VectorType& x) const override {
    ++residual_;
    return inner_.residual(x);
  }
  VectorType row_gradient(Index i, const VectorType& x) const override {
    ++row_gradient_;
    return inner_.row_gradient(i, x);
  }
  void add_row_gradient(Index i, const VectorType& x, Scalar alpha, VectorType& out) const override {
    ++row_gradient_;
    inner_.add_row_gradient(i, x, alpha, out);
  }
  MatrixType jacobian(const VectorType& x) const override {
    ++full_jacobian_;
    return inner_.jacobian(x);
  }
  VectorType row_gradient_sq_norms(const VectorType& x) const override {
    ++full_jacobian_;
    return inner_.row_gradient_sq_norms(x);
  }
  std::optional<VectorType> known_solution() const override { return inner_.known_solution(); }

  EvaluationCounts counts() const { return {residual_.load(), row_gradient_.load(), full_jacobian_.load()}; }
  void reset() {
    residual_ = 0;
    row_gradient_ = 0;
    full_jacobian_ = 0;
  }

 private:
  const NonlinearSystem<Scalar>& inner_;
  mutable std::atomic<std::size_t> residual_{0};
  mutable std::atomic<std::size_t> row_gradient_{0};
  mutable std::atomic<std::size_t> full_jacobian_{0};
};

/// f(x) = A x - b.
template <typename Scalar>
class AffineSystem final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;
  using typename NonlinearSystem<Scalar>::MatrixType;

  AffineSystem(MatrixType A, VectorType b, std::optional<VectorType> solution = std::nullopt)
      : A_(std::move(A)), b_(std::move(b)), solution_(std::move(solution)) {
    if (A_.rows() != b_.size()) throw ArgumentError("affine: A and b disagree on row count");
  }

  Index rows() const override { return A_.rows(); }
  Index cols() const override { return A_.cols(); }
  std::string name() const override { return "affine"; }
  VectorType residual(const VectorType& x) const override { return A_ * x - b_; }
  VectorType row_gradient(Index i, const VectorType&) const override { return A_.row(i).transpose(); }
  MatrixType jacobian(const VectorType&) const override { return A_; }
  std::optional<VectorType> known_solution() const override { return solution_; }

  const MatrixType& matrix() const { return A_; }

 private:
  MatrixType A_;
  VectorType b_;
  std::optional<VectorType> solution_;
};

}  // namespace nabk
