#include <cmath>
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "nabk/problems.hpp"
#include "nabk/system.hpp"

namespace nabk {
namespace {

using Vec = Vector<double>;

TEST(EvaluateResidual, BrownRootIsZero) {
  BrownAlmostLinear<double> brown(3);
  EXPECT_EQ(evaluate_residual(brown, Vec::Ones(3)), Vec::Zero(3));
}

TEST(EvaluateResidual, HEquationSingleNodeAtZero) {
  // Inner sum vanishes at x = 0, so F_1 = 0 - 1 / 1.
  HEquation<double> h(1, 0.9);
  EXPECT_DOUBLE_EQ(evaluate_residual(h, Vec::Zero(1))[0], -1.0);
}

TEST(EvaluateResidual, OverdeterminedAtOrigin) {
  OverdeterminedRational<double> sys(2);
  const Vec f = evaluate_residual(sys, Vec::Zero(2));
  ASSERT_EQ(f.size(), 2);
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], -1.0);
}

TEST(EvaluateResidual, DimensionMismatchIsArgumentError) {
  BrownAlmostLinear<double> brown(3);
  EXPECT_THROW(evaluate_residual(brown, Vec::Ones(4)), ArgumentError);
}

TEST(EvaluateResidual, ZeroDenominatorIsDomainErrorWithIndex) {
  // N = 1, c = 0.5: s = 0.25 * 0.5 * x, so the denominator is exactly 0 at x = 8.
  HEquation<double> h(1, 0.5);
  try {
    evaluate_residual(h, Vec::Constant(1, 8.0));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.index(), 0);
  }
}

TEST(EvaluateResidual, NonFiniteOutputCarriesRow) {
  // Only the third row overflows.
  Matrix<double> A = Matrix<double>::Identity(3, 3);
  A(2, 2) = 10;
  AffineSystem<double> sys(A, Vec::Zero(3));
  Vec x = Vec::Zero(3);
  x[2] = std::numeric_limits<double>::max();
  try {
    evaluate_residual(sys, x);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(EvaluateResidual, Deterministic) {
  HEquation<double> h(40, 0.9);
  const Vec x = Vec::LinSpaced(40, 0.0, 1.0);
  const Vec a = evaluate_residual(h, x), b = evaluate_residual(h, x);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())));
}

TEST(EvaluateRowGradient, BrownLinearRows) {
  BrownAlmostLinear<double> brown(4);
  const Vec x = Vec::LinSpaced(4, -1.0, 2.0);
  for (Index k = 0; k < 3; ++k) {
    const Vec g = evaluate_row_gradient(brown, k, x);
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(g[j], j == k ? 2.0 : 1.0);
  }
}

TEST(EvaluateRowGradient, BrownProductRowAtOnes) {
  BrownAlmostLinear<double> brown(3);
  EXPECT_EQ(evaluate_row_gradient(brown, 2, Vec::Ones(3)), Vec::Ones(3));
}

TEST(EvaluateRowGradient, BrownProductRowHandlesZeros) {
  BrownAlmostLinear<double> brown(4);
  Vec x(4);
  x << 2, 0, 3, 5;
  const Vec g = evaluate_row_gradient(brown, 3, x);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 30.0);
  EXPECT_EQ(g[2], 0.0);
  EXPECT_EQ(g[3], 0.0);
}

TEST(EvaluateRowGradient, SingularBroydenVanishesWhereInnerIsZero) {
  // g_1 = (3 + 1)(-0.5) + 1 + 1 = 0 at (-0.5, -0.5).
  SingularBroyden<double> sys(2);
  const Vec x = Vec::Constant(2, -0.5);
  EXPECT_EQ(evaluate_residual(sys, x)[0], 0.0);
  EXPECT_EQ(evaluate_row_gradient(sys, 0, x), Vec::Zero(2));
}

TEST(EvaluateRowGradient, IndexOutOfRange) {
  BrownAlmostLinear<double> brown(3);
  EXPECT_THROW(evaluate_row_gradient(brown, 3, Vec::Ones(3)), ArgumentError);
  EXPECT_THROW(evaluate_row_gradient(brown, -1, Vec::Ones(3)), ArgumentError);
}

TEST(FdCheck, BrownHalfOnes) {
  BrownAlmostLinear<double> brown(5);
  const Vec dev = fd_check(brown, Vec::Constant(5, 0.5));
  EXPECT_LT(dev.maxCoeff(), 1e-6);
}

TEST(FdCheck, AffineRowsAtRoundingLevel) {
  Matrix<double> A(3, 4);
  A << 1, -2, 3, 0.5, 4, 0, -1, 2, 0.25, 7, 1, -3;
  AffineSystem<double> sys(A, Vec::Ones(3));
  const Vec dev = fd_check(sys, Vec::LinSpaced(4, -1.0, 1.0));
  EXPECT_LT(dev.maxCoeff(), 1e-7);
}

TEST(FdCheck, HEquationAtZero) {
  HEquation<double> h(50, 0.9);
  EXPECT_LT(fd_check(h, Vec::Zero(50)).maxCoeff(), 1e-5);
}

TEST(FdCheck, DetectsWrongGradient) {
  struct Wrong final : NonlinearSystem<double> {
    Index rows() const override { return 1; }
    Index cols() const override { return 1; }
    std::string name() const override { return "wrong"; }
    Vec residual(const Vec& x) const override { return x.array().square().matrix(); }
    Vec row_gradient(Index, const Vec& x) const override { return 3.0 * x; }
  } wrong;
  // analytic 3 against numeric 2, relative to max(1, 3)
  EXPECT_NEAR(fd_check(wrong, Vec::Constant(1, 1.0))[0], 1.0 / 3.0, 1e-6);
}

TEST(CountingSystem, CountsEachKindSeparately) {
  BrownAlmostLinear<double> brown(4);
  CountingSystem<double> counted(brown);
  const Vec x = Vec::Constant(4, 0.5);
  evaluate_residual(counted, x);
  evaluate_row_gradient(counted, 1, x);
  evaluate_row_gradient(counted, 3, x);
  counted.jacobian(x);
  counted.row_gradient_sq_norms(x);
  const EvaluationCounts c = counted.counts();
  EXPECT_EQ(c.residual, 1u);
  EXPECT_EQ(c.row_gradient, 2u);
  EXPECT_EQ(c.full_jacobian, 2u);
}

TEST(IterateState, CachesResidual) {
  HEquation<double> h(10, 0.9);
  const Vec x = Vec::Constant(10, 0.3);
  const auto s = IterateState<double>::at(h, x, 4);
  EXPECT_EQ(s.k, 4u);
  EXPECT_EQ(s.fx, evaluate_residual(h, x));
}

TEST(Jacobian, DefaultAssemblyMatchesRows) {
  SingularBroyden<double> sys(6);
  const Vec x = Vec::LinSpaced(6, -0.9, -0.1);
  const Matrix<double> J = sys.jacobian(x);
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(J.row(i).transpose(), sys.row_gradient(i, x));
  const Vec norms = sys.row_gradient_sq_norms(x);
  EXPECT_LT((norms - J.rowwise().squaredNorm()).cwiseAbs().maxCoeff(), 1e-12 * norms.maxCoeff());
}

}  // namespace
}  // namespace nabk
