#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cova/errors.hpp"
#include "cova/gradcheck_suite.hpp"
#include "cova/resampler.hpp"
#include "test_util.hpp"

using namespace cova;
using cova::testing::uniform;

namespace {

ResamplerParams small_params(std::uint64_t seed) {
  Rng rng(seed);
  ResamplerParams p = init_resampler({4, 6, 5}, rng);
  // Larger than init so attention is visibly non-uniform.
  ResamplerParams::visit(p, [](const std::string&, Tensor2& t) { scale_in_place(t, 30.0); });
  return p;
}

}  // namespace

TEST(Resampler, OutputShapeIsTokensByWidth) {
  Rng rng(1);
  ResamplerParams p = init_resampler({8, 32, 24}, rng);
  for (std::size_t t : {1u, 3u, 64u}) {
    Tensor2 out = resample(uniform(t, 24, rng), p);
    EXPECT_EQ(out.rows(), 8u);
    EXPECT_EQ(out.cols(), 32u);
  }
}

TEST(Resampler, DefaultConfigMatchesDocumentedDims) {
  ResamplerConfig c;
  EXPECT_EQ(c.tokens, 8u);
  EXPECT_EQ(c.width, 512u);
  EXPECT_EQ(c.audio_width, 768u);
}

TEST(Resampler, PermutingQueriesPermutesOutputs) {
  ResamplerParams p = small_params(2);
  Rng rng(3);
  Tensor2 audio = uniform(7, 5, rng);
  Tensor2 out = resample(audio, p);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  ResamplerParams q = p;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy(p.queries.row(perm[i]).begin(), p.queries.row(perm[i]).end(), q.queries.row(i).begin());
  }
  Tensor2 permuted = resample(audio, q);
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) EXPECT_EQ(permuted(i, j), out(perm[i], j));
}

TEST(Resampler, SingleTokenGivesProjectedValueOnEveryRow) {
  ResamplerParams p = small_params(4);
  Rng rng(5);
  Tensor2 audio = uniform(1, 5, rng);
  Tensor2 out = resample(audio, p);
  Tensor2 expected = matmul(matmul(audio, p.value_proj), p.out_proj);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) EXPECT_NEAR(out(i, j), expected(0, j), 1e-12);
}

TEST(Resampler, InvariantToAudioTokenOrder) {
  ResamplerParams p = small_params(6);
  Rng rng(7);
  Tensor2 audio = uniform(9, 5, rng);
  std::vector<std::size_t> order(9);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  Tensor2 shuffled(9, 5);
  for (std::size_t i = 0; i < 9; ++i)
    std::copy(audio.row(order[i]).begin(), audio.row(order[i]).end(), shuffled.row(i).begin());
  Tensor2 a = resample(audio, p);
  Tensor2 b = resample(shuffled, p);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
}

TEST(Resampler, EmptyAudioIsAnError) {
  ResamplerParams p = small_params(8);
  EXPECT_THROW(resample(Tensor2(0, 5), p), EmptyAudioError);
}

TEST(Resampler, WidthMismatchIsAnError) {
  ResamplerParams p = small_params(8);
  EXPECT_THROW(resample(Tensor2(3, 4), p), InputError);
}

TEST(Resampler, SilentClipUsesNoAudioToken) {
  ResamplerParams p = small_params(9);
  Tensor2 out = resample_or_silent(Tensor2(0, 5), p);
  EXPECT_EQ(out, resample(p.no_audio, p));
}

TEST(Resampler, Deterministic) {
  ResamplerParams p = small_params(10);
  Rng rng(11);
  Tensor2 audio = uniform(6, 5, rng);
  EXPECT_EQ(resample(audio, p), resample(audio, p));
}

TEST(Resampler, GradientCheckFiveSeeds) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GradReport r = check_resampler(seed, 1e-3);
    EXPECT_TRUE(r.passed()) << "seed " << seed << " error " << r.max_relative_error;
    std::vector<std::string> names;
    for (const auto& [n, e] : r.per_parameter) names.push_back(n);
    for (const char* n : {"resampler.queries", "resampler.key_proj", "resampler.value_proj",
                          "resampler.out_proj"}) {
      EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    }
    EXPECT_TRUE(check_resampler_silent(seed, 1e-3).passed());
  }
}
