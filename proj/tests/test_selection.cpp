#include <random>

#include <gtest/gtest.h>

#include "nabk/selection.hpp"

namespace nabk {
namespace {

using Vec = Vector<double>;
using Rows = std::vector<Index>;

Vec vec(std::initializer_list<double> v) {
  Vec out(Index(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(SelectNgabk, UniformResidualSelectsAll) {
  const auto sel = select_ngabk(vec({1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(sel.parameter, 0.25);
  EXPECT_EQ(sel.indices, (Rows{0, 1, 2, 3}));
}

TEST(SelectNgabk, SingleSpike) {
  const auto sel = select_ngabk(vec({2, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(sel.parameter, 0.625);
  EXPECT_EQ(sel.indices, (Rows{0}));
}

TEST(SelectNgabk, GradedResidual) {
  // ||f||^2 = 14, delta = (9/14 + 1/3) / 2 = 41/84, cutoff = 41/6.
  const auto sel = select_ngabk(vec({3, 2, 1}));
  EXPECT_NEAR(sel.parameter, 41.0 / 84.0, 1e-15);
  EXPECT_NEAR(sel.cutoff, 41.0 / 6.0, 1e-14);
  EXPECT_EQ(sel.indices, (Rows{0}));
}

TEST(SelectNgabk, SignIgnored) {
  EXPECT_EQ(select_ngabk(vec({-3, 2, -1})).indices, (Rows{0}));
  EXPECT_EQ(select_ngabk(vec({-1, 1, -1, 1})).indices, (Rows{0, 1, 2, 3}));
}

TEST(SelectNgabk, ZeroResidualIsLogicError) {
  EXPECT_THROW(select_ngabk(Vec(Vec::Zero(3))), std::logic_error);
}

TEST(SelectNgabk, PropertiesOnRandomVectors) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0, 1);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> scale_exp(-6, 6);
  for (int t = 0; t < 10000; ++t) {
    Vec f(len(rng));
    const double s = std::pow(10.0, scale_exp(rng));
    for (auto& v : f) v = s * gauss(rng);
    const auto sel = select_ngabk(f);
    ASSERT_FALSE(sel.indices.empty());
    ASSERT_TRUE(sel.contains(argmax_abs(f)));
    ASSERT_GE(sel.parameter, 1.0 / double(f.size()) * (1 - 1e-12));
    ASSERT_LE(sel.parameter, 1.0 + 1e-12);
    // every member meets the cutoff, every non-member is strictly below it
    for (Index i = 0; i < f.size(); ++i) {
      if (sel.contains(i) && i != argmax_abs(f)) ASSERT_GE(f[i] * f[i], sel.cutoff);
      if (!sel.contains(i)) ASSERT_LT(f[i] * f[i], sel.cutoff);
    }
  }
}

TEST(SelectMrnabk, SmallRhoSelectsAll) {
  const auto sel = select_mrnabk(vec({3, 2, 1}), 0.1);
  EXPECT_DOUBLE_EQ(sel.cutoff, 0.9);
  EXPECT_EQ(sel.indices, (Rows{0, 1, 2}));
}

TEST(SelectMrnabk, RhoOneSelectsMaxima) {
  EXPECT_EQ(select_mrnabk(vec({3, 2, 1}), 1.0).indices, (Rows{0}));
  EXPECT_EQ(select_mrnabk(vec({1, -3, 3, 2}), 1.0).indices, (Rows{1, 2}));
}

TEST(SelectMrnabk, RhoDomain) {
  EXPECT_THROW(select_mrnabk(vec({1, 2}), 0.0), ArgumentError);
  EXPECT_THROW(select_mrnabk(vec({1, 2}), 1.5), ArgumentError);
  EXPECT_THROW(select_mrnabk(vec({1, 2}), -0.1), ArgumentError);
}

TEST(SelectMrnabk, BlockGrowsAsRhoShrinks) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 500; ++t) {
    Vec f(30);
    for (auto& v : f) v = gauss(rng);
    std::size_t prev = 0;
    for (double rho : {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01}) {
      const auto sel = select_mrnabk(f, rho);
      ASSERT_GE(sel.size(), prev);
      ASSERT_TRUE(sel.contains(argmax_abs(f)));
      prev = sel.size();
    }
  }
}

TEST(ArgmaxAbs, TiesGoToFirst) {
  EXPECT_EQ(argmax_abs(vec({1, -4, 4, 2})), 1);
  EXPECT_EQ(argmax_abs(vec({0, 0, 0})), 0);
}

TEST(SelectRdcnk, UnitGradientsMatchGreedyRule) {
  // With ||grad f_i|| = 1 the weighted rule reduces to the greedy one with m = ||J||_F^2.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 200; ++t) {
    Vec f(12);
    for (auto& v : f) v = gauss(rng);
    const auto a = select_rdcnk(f, Vec(Vec::Ones(12)));
    const auto b = select_ngabk(f);
    ASSERT_EQ(a.indices, b.indices);
    ASSERT_NEAR(a.parameter, b.parameter, 1e-14);
  }
}

TEST(SelectRdcnk, WeightsShiftTheBlock) {
  // f^2 / ||g||^2 = (4, 1, 1): row 0 is the farthest hyperplane even though row 1 has the larger residual.
  const Vec f = vec({2, 4, 1});
  const Vec g = vec({1, 16, 1});
  const auto sel = select_rdcnk(f, g);
  EXPECT_TRUE(sel.contains(0));
  EXPECT_FALSE(sel.contains(1));
  // delta = (4 / 21 + 1 / 18) / 2
  EXPECT_NEAR(sel.parameter, 0.5 * (4.0 / 21.0 + 1.0 / 18.0), 1e-15);
}

TEST(SelectRdcnk, ZeroGradientRowsTakeOver) {
  const auto sel = select_rdcnk(vec({1, 2, 3}), vec({0, 1, 0}));
  EXPECT_EQ(sel.indices, (Rows{0, 2}));
}

TEST(SelectRdcnk, SolvedRowWithZeroGradientIsSkipped) {
  // 0 >= cutoff * 0 must not let a satisfied, flat row into the block
  const auto sel = select_rdcnk(vec({0, 2, 1}), vec({0, 1, 1}));
  EXPECT_EQ(sel.indices, (Rows{1}));
}

TEST(SelectRdcnk, AllGradientsZeroIsBreakdown) {
  EXPECT_THROW(select_rdcnk(vec({1, 2}), vec({0, 0})), BreakdownError);
}

}  // namespace
}  // namespace nabk
