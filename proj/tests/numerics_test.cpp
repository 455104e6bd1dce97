#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cova/errors.hpp"
#include "cova/grad_check.hpp"
#include "cova/numerics.hpp"
#include "test_util.hpp"

using namespace cova;
using cova::testing::uniform;

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Rng rng(1);
  Tensor2 m = uniform(3, 4, rng);
  EXPECT_EQ(matmul(Tensor2::identity(3), m), m);
}

TEST(Matmul, SmallProduct) {
  Tensor2 a = Tensor2::from_rows({{1, 2}, {3, 4}});
  Tensor2 b = Tensor2::from_rows({{0}, {1}});
  EXPECT_EQ(matmul(a, b), Tensor2::from_rows({{2}, {4}}));
}

TEST(Matmul, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Tensor2(2, 3), Tensor2(4, 5)), InputError);
}

TEST(Matmul, BitDeterministic) {
  Rng rng(2);
  Tensor2 a = uniform(17, 23, rng);
  Tensor2 b = uniform(23, 9, rng);
  Tensor2 first = matmul(a, b);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(matmul(a, b), first);
}

TEST(Matmul, TransposedVariantsAgree) {
  Rng rng(3);
  Tensor2 a = uniform(5, 4, rng);
  Tensor2 b = uniform(5, 3, rng);
  Tensor2 c = uniform(6, 4, rng);
  Tensor2 tn = matmul_tn(a, b);
  Tensor2 ref_tn = matmul(transpose(a), b);
  Tensor2 nt = matmul_nt(a, c);
  Tensor2 ref_nt = matmul(a, transpose(c));
  for (std::size_t i = 0; i < tn.size(); ++i) EXPECT_NEAR(tn.values()[i], ref_tn.values()[i], 1e-12);
  for (std::size_t i = 0; i < nt.size(); ++i) EXPECT_NEAR(nt.values()[i], ref_nt.values()[i], 1e-12);
}

TEST(Softmax, UniformRow) {
  Tensor2 p = softmax_rows(Tensor2::from_rows({{0, 0, 0}}));
  for (Real v : p.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  Tensor2 a = Tensor2::from_rows({{0.3, -1.2, 2.0}});
  Tensor2 b = Tensor2::from_rows({{100.3, 98.8, 102.0}});
  Tensor2 pa = softmax_rows(a);
  Tensor2 pb = softmax_rows(b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pa.values()[i], pb.values()[i], 1e-12);
}

TEST(Softmax, TwoEntryValues) {
  Tensor2 p = softmax_rows(Tensor2::from_rows({{1, 2}}));
  EXPECT_NEAR(p(0, 0), 0.2689, 1e-4);
  EXPECT_NEAR(p(0, 1), 0.7311, 1e-4);
}

TEST(Softmax, RowsSumToOneOnWideRange) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor2 p = softmax_rows(uniform(7, 11, rng, -50.0, 50.0));
    for (std::size_t r = 0; r < p.rows(); ++r) {
      Real s = 0.0;
      for (Real v : p.row(r)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(Sigmoid, KnownValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0), 0.8808, 1e-4);
  for (Real x : {1.0, -1.0, 5.0, -5.0}) EXPECT_NEAR(sigmoid(-x), 1.0 - sigmoid(x), 1e-15);
}

TEST(Sigmoid, MonotoneAndFiniteAtExtremes) {
  Real prev = 0.0;
  for (Real x = -40.0; x <= 30.0; x += 0.5) {
    const Real s = sigmoid(x);
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(1000.0)));
}

TEST(Gelu, ErfForm) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(1.0), 0.841344746, 1e-8);
  EXPECT_NEAR(gelu(-1.0), -0.158655254, 1e-8);
  for (Real x : {-2.0, -0.3, 0.7, 1.9}) {
    const Real fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(gelu_derivative(x), fd, 1e-7);
  }
}

TEST(L2Normalize, ThreeFourFive) {
  Vec v = l2_normalize(Vec{3, 4});
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], 0.8, 1e-15);
}

TEST(L2Normalize, ScaleInvariant) {
  Rng rng(5);
  Tensor2 x = uniform(1, 9, rng);
  Vec a = l2_normalize(x.values());
  Tensor2 y = x;
  scale_in_place(y, 7.5);
  Vec b = l2_normalize(y.values());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(L2Normalize, ZeroVectorIsDegenerate) {
  EXPECT_THROW(l2_normalize(Vec(6, 0.0)), DegenerateVectorError);
}

TEST(L2Normalize, OutputNormIsOne) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor2 x = uniform(1, 1 + trial % 40, rng, -100.0, 100.0);
    EXPECT_NEAR(norm(l2_normalize(x.values())), 1.0, 1e-6);
  }
}

TEST(Cosine, KnownValues) {
  Vec v = {0.3, -2.0, 1.1};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(Vec{1, 0}, Vec{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(Vec{1, 1}, Vec{1, 0}), 0.7071, 1e-4);
  EXPECT_THROW(cosine_similarity(Vec{0, 0}, Vec{1, 0}), DegenerateVectorError);
}

TEST(Cosine, ClampedToUnitInterval) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor2 x = uniform(1, 13, rng, -1e3, 1e3);
    Tensor2 y = x;
    scale_in_place(y, 3.3);
    const Real c = cosine_similarity(x.values(), y.values());
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
  }
}

TEST(LayerNorm, ZeroMeanUnitVariance) {
  Rng rng(8);
  Tensor2 x = uniform(4, 10, rng, -3.0, 5.0);
  Tensor2 y = layer_norm(x, Tensor2(1, 10, 1.0), Tensor2(1, 10));
  for (std::size_t r = 0; r < 4; ++r) {
    Real mean = 0.0, var = 0.0;
    for (Real v : y.row(r)) mean += v;
    mean /= 10.0;
    for (Real v : y.row(r)) var += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var / 10.0, 1.0, 1e-3);
  }
}

TEST(GradCheck, RelativeErrorDefinition) {
  EXPECT_EQ(gradient_relative_error(0.5, 0.25), 0.25);
  EXPECT_EQ(gradient_relative_error(10.0, 8.0), 0.2);
  EXPECT_EQ(gradient_relative_error(-4.0, 6.0), 10.0 / 6.0);
}

namespace {

// y = W·x summed against a fixed probe: dL/dW = probe·xᵀ.
struct LinearProbe {
  Tensor2 w, x, probe;
  Real operator()() const { return dot(probe.values(), matmul(w, x).values()); }
  Tensor2 grad() const { return matmul_nt(probe, x); }
};

}  // namespace

TEST(GradCheck, LinearLayerPasses) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    LinearProbe f{uniform(4, 3, rng), uniform(3, 1, rng), uniform(4, 1, rng)};
    Tensor2 g = f.grad();
    const std::vector<GradSlot> slots = {{"W", &f.w, &g}};
    EXPECT_TRUE(grad_check("linear", [&] { return f(); }, slots, 1e-3).passed());
  }
}

TEST(GradCheck, ConstantFunctionHasZeroError) {
  Tensor2 w(2, 2, 1.5);
  Tensor2 zero(2, 2);
  const std::vector<GradSlot> slots = {{"W", &w, &zero}};
  GradReport r = grad_check("const", [] { return 3.0; }, slots, 1e-3);
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(GradCheck, CorruptedGradientIsDetected) {
  Rng rng(9);
  LinearProbe f{uniform(4, 3, rng, 1.0, 2.0), uniform(3, 1, rng, 1.0, 2.0),
                uniform(4, 1, rng, 1.0, 2.0)};
  Tensor2 g = f.grad();
  scale_in_place(g, 2.0);
  const std::vector<GradSlot> slots = {{"W", &f.w, &g}};
  GradReport r = grad_check("linear-x2", [&] { return f(); }, slots, 1e-3);
  EXPECT_FALSE(r.passed());
  ASSERT_EQ(r.per_parameter.size(), 1u);
  EXPECT_EQ(r.per_parameter[0].first, "W");
}

TEST(GradCheck, NonFiniteAnalyticGradientThrows) {
  Tensor2 w(1, 2, 1.0);
  Tensor2 g(1, 2);
  g(0, 1) = std::numeric_limits<Real>::quiet_NaN();
  const std::vector<GradSlot> slots = {{"W", &w, &g}};
  EXPECT_THROW(grad_check("nan", [] { return 0.0; }, slots, 1e-3), NumericsError);
}

TEST(GradCheck, RestoresParameterValues) {
  Rng rng(10);
  LinearProbe f{uniform(3, 3, rng), uniform(3, 1, rng), uniform(3, 1, rng)};
  const Tensor2 before = f.w;
  Tensor2 g = f.grad();
  const std::vector<GradSlot> slots = {{"W", &f.w, &g}};
  grad_check("linear", [&] { return f(); }, slots, 1e-3);
  EXPECT_EQ(f.w, before);
}
