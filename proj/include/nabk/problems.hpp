#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nabk/system.hpp"

namespace nabk {

/// Axis-aligned box, one interval per coordinate.
template <typename Scalar>
struct Box {
  Vector<Scalar> lower;
  Vector<Scalar> upper;

  static Box uniform(Index n, Scalar lo, Scalar hi) {
    return {Vector<Scalar>::Constant(n, lo), Vector<Scalar>::Constant(n, hi)};
  }
  Scalar diameter() const { return (upper - lower).norm(); }
};

/**
 * Chandrasekhar H-equation, discretized on N nodes:
 *   F_i(x) = x_i - 1 / (1 - (c / 2N) sum_j mu_i x_j / (mu_i + mu_j)),  mu_i = (i - 1/2) / N.
 * The inner sum runs over every j, including j = i.
 */
template <typename Scalar>
class HEquation final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;

  HEquation(Index N, Scalar c) : N_(N), c_(c), scale_(c / (Scalar(2) * Scalar(N))), mu_(N), W_(N, N) {
    if (N < 1) throw ArgumentError("h-equation: N must be positive");
    if (!(c > Scalar(0) && c < Scalar(1))) throw ArgumentError("h-equation: c must lie in (0, 1)");
    for (Index i = 0; i < N; ++i) mu_[i] = (Scalar(i) + Scalar(0.5)) / Scalar(N);
    for (Index i = 0; i < N; ++i)
      for (Index j = 0; j < N; ++j) W_(i, j) = mu_[i] / (mu_[i] + mu_[j]);
  }

  Index rows() const override { return N_; }
  Index cols() const override { return N_; }
  std::string name() const override { return "h-equation"; }

  VectorType residual(const VectorType& x) const override {
    const VectorType s = scale_ * (W_ * x);
    VectorType out(N_);
    for (Index i = 0; i < N_; ++i) out[i] = x[i] - Scalar(1) / denominator(s[i], i);
    return out;
  }

  VectorType row_gradient(Index i, const VectorType& x) const override {
    const Scalar d = denominator(scale_ * W_.row(i).dot(x), i);
    VectorType g = (-scale_ / (d * d)) * W_.row(i).transpose();
    g[i] += Scalar(1);
    return g;
  }

  Scalar c() const { return c_; }
  const VectorType& nodes() const { return mu_; }

 private:
  Scalar denominator(Scalar s, Index i) const {
    const Scalar d = Scalar(1) - s;
    if (d == Scalar(0) || !std::isfinite(d))
      throw DomainError("h-equation: denominator 1 - s_i vanishes at row " + std::to_string(i), i);
    return d;
  }

  Index N_;
  Scalar c_;
  Scalar scale_;
  VectorType mu_;
  Matrix<Scalar> W_;
};

/**
 * Brown almost linear function:
 *   f_k = x_k + sum_i x_i - (n + 1)  for k < n,
 *   f_n = prod_i x_i - 1.
 * Root at all-ones.
 */
template <typename Scalar>
class BrownAlmostLinear final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;

  explicit BrownAlmostLinear(Index n) : n_(n) {
    if (n < 2) throw ArgumentError("brown: n must be at least 2");
  }

  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  std::string name() const override { return "brown"; }

  VectorType residual(const VectorType& x) const override {
    VectorType out = (x.array() + (x.sum() - Scalar(n_ + 1))).matrix();
    out[n_ - 1] = x.prod() - Scalar(1);
    return out;
  }

  VectorType row_gradient(Index i, const VectorType& x) const override {
    if (i < n_ - 1) {
      VectorType g = VectorType::Ones(n_);
      g[i] += Scalar(1);
      return g;
    }
    // prod_{j != l} x_j via prefix and suffix products
    VectorType g(n_);
    Scalar prefix = 1;
    for (Index l = 0; l < n_; ++l) {
      g[l] = prefix;
      prefix *= x[l];
    }
    Scalar suffix = 1;
    for (Index l = n_ - 1; l >= 0; --l) {
      g[l] *= suffix;
      suffix *= x[l];
    }
    return g;
  }

  std::optional<VectorType> known_solution() const override { return VectorType::Ones(n_); }

 private:
  Index n_;
};

/**
 * Squared tridiagonal Broyden system, singular Jacobian at the root:
 *   g_k = (3 - 2 x_k) x_k - x_{k-1} - 2 x_{k+1} + 1  (missing neighbours dropped at the ends),
 *   f_k = g_k^2.
 */
template <typename Scalar>
class SingularBroyden final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;

  explicit SingularBroyden(Index n) : n_(n) {
    if (n < 2) throw ArgumentError("broyden: n must be at least 2");
  }

  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  std::string name() const override { return "broyden"; }

  VectorType residual(const VectorType& x) const override {
    VectorType out(n_);
    for (Index k = 0; k < n_; ++k) {
      const Scalar g = inner(k, x);
      out[k] = g * g;
    }
    return out;
  }

  VectorType row_gradient(Index k, const VectorType& x) const override {
    VectorType grad = VectorType::Zero(n_);
    const Scalar two_g = Scalar(2) * inner(k, x);
    grad[k] = two_g * (Scalar(3) - Scalar(4) * x[k]);
    if (k > 0) grad[k - 1] = -two_g;
    if (k + 1 < n_) grad[k + 1] = Scalar(-2) * two_g;
    return grad;
  }

  void add_row_gradient(Index k, const VectorType& x, Scalar alpha, VectorType& out) const override {
    const Scalar a = alpha * Scalar(2) * inner(k, x);
    out[k] += a * (Scalar(3) - Scalar(4) * x[k]);
    if (k > 0) out[k - 1] -= a;
    if (k + 1 < n_) out[k + 1] -= Scalar(2) * a;
  }

  VectorType row_gradient_sq_norms(const VectorType& x) const override {
    VectorType out(n_);
    for (Index k = 0; k < n_; ++k) {
      const Scalar two_g = Scalar(2) * inner(k, x);
      const Scalar d = Scalar(3) - Scalar(4) * x[k];
      Scalar s = d * d;
      if (k > 0) s += Scalar(1);
      if (k + 1 < n_) s += Scalar(4);
      out[k] = two_g * two_g * s;
    }
    return out;
  }

  /// The unsquared tridiagonal residual g_k.
  Scalar inner(Index k, const VectorType& x) const {
    Scalar g = (Scalar(3) - Scalar(2) * x[k]) * x[k] + Scalar(1);
    if (k > 0) g -= x[k - 1];
    if (k + 1 < n_) g -= Scalar(2) * x[k + 1];
    return g;
  }

 private:
  Index n_;
};

/**
 * Overdetermined chain with m = 2(n - 1) equations. For 1-based k with
 * i = (k + 1) / 2:
 *   odd k:  f_k = 10 (2 x_i / (1 + x_i^2)^2 - x_{i+1}),
 *   even k: f_k = x_i - 1.
 */
template <typename Scalar>
class OverdeterminedRational final : public NonlinearSystem<Scalar> {
 public:
  using typename NonlinearSystem<Scalar>::VectorType;

  explicit OverdeterminedRational(Index n) : n_(n) {
    if (n < 2) throw ArgumentError("overdetermined: n must be at least 2");
  }

  Index rows() const override { return 2 * (n_ - 1); }
  Index cols() const override { return n_; }
  std::string name() const override { return "overdetermined"; }

  VectorType residual(const VectorType& x) const override {
    VectorType out(rows());
    for (Index i = 0; i + 1 < n_; ++i) {
      const Scalar q = Scalar(1) + x[i] * x[i];
      out[2 * i] = Scalar(10) * (Scalar(2) * x[i] / (q * q) - x[i + 1]);
      out[2 * i + 1] = x[i] - Scalar(1);
    }
    return out;
  }

  VectorType row_gradient(Index k, const VectorType& x) const override {
    VectorType g = VectorType::Zero(n_);
    const Index i = k / 2;
    if (k % 2 == 0) {
      const Scalar q = Scalar(1) + x[i] * x[i];
      g[i] = Scalar(10) * (Scalar(2) - Scalar(6) * x[i] * x[i]) / (q * q * q);
      g[i + 1] = Scalar(-10);
    } else {
      g[i] = Scalar(1);
    }
    return g;
  }

  void add_row_gradient(Index k, const VectorType& x, Scalar alpha, VectorType& out) const override {
    const Index i = k / 2;
    if (k % 2 == 0) {
      const Scalar q = Scalar(1) + x[i] * x[i];
      out[i] += alpha * Scalar(10) * (Scalar(2) - Scalar(6) * x[i] * x[i]) / (q * q * q);
      out[i + 1] -= alpha * Scalar(10);
    } else {
      out[i] += alpha;
    }
  }

  VectorType row_gradient_sq_norms(const VectorType& x) const override {
    VectorType out(rows());
    for (Index i = 0; i + 1 < n_; ++i) {
      const Scalar q = Scalar(1) + x[i] * x[i];
      const Scalar d = Scalar(10) * (Scalar(2) - Scalar(6) * x[i] * x[i]) / (q * q * q);
      out[2 * i] = d * d + Scalar(100);
      out[2 * i + 1] = Scalar(1);
    }
    return out;
  }

 private:
  Index n_;
};

}  // namespace nabk
