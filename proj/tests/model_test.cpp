#include <gtest/gtest.h>

#include <cmath>

#include "cova/errors.hpp"
#include "cova/gradcheck_suite.hpp"
#include "cova/model.hpp"
#include "cova/params.hpp"
#include "test_util.hpp"

using namespace cova;
using cova::testing::uniform;

namespace {

FusionConfig tiny_model() {
  FusionConfig m;
  m.width = 8;
  m.audio_width = 6;
  m.tokens = 3;
  m.layers = 2;
  m.ffn_multiplier = 2;
  m.hidden = 8;
  return m;
}

TripletRecord random_triplet(Rng& rng, bool zero_text) {
  TripletRecord t;
  t.id = "q";
  t.query_frames = uniform(4, 8, rng);
  t.query_audio = uniform(5, 6, rng);
  t.text = zero_text ? Tensor2(4, 8) : uniform(4, 8, rng);
  t.target_id = "g";
  return t;
}

}  // namespace

TEST(EncodeQuery, ZeroTextClosedGateGivesFrameMeanDirection) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 1);
  cova::testing::close_gates(p);
  Rng rng(2);
  TripletRecord t = random_triplet(rng, true);
  Vec q = encode_query(t, p, m).f_avt;
  Vec want = l2_normalize(column_mean(t.query_frames));
  for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(q[j], want[j], 1e-9);
}

TEST(EncodeQuery, Deterministic) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 3);
  Rng rng(4);
  TripletRecord t = random_triplet(rng, false);
  EXPECT_EQ(encode_query(t, p, m).f_avt, encode_query(t, p, m).f_avt);
}

TEST(EncodeQuery, DiffersFromTargetWhenTextIsPresent) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 5);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    TripletRecord t = random_triplet(rng, false);
    Vec q = encode_query(t, p, m).f_avt;
    Vec v = encode_target({"g", t.query_frames, t.query_audio}, p, m);
    Real diff = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) diff += std::abs(q[j] - v[j]);
    EXPECT_GT(diff, 1e-6);
  }
}

TEST(EncodeQuery, TextWidthMismatchIsAnError) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 7);
  Rng rng(8);
  TripletRecord t = random_triplet(rng, false);
  t.text = Tensor2(4, 9);
  EXPECT_THROW(encode_query(t, p, m), InputError);
}

TEST(EncodeTarget, ClosedGateGivesNormalizedFrameMean) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 9);
  cova::testing::close_gates(p);
  Rng rng(10);
  GalleryEntry g{"g", uniform(4, 8, rng), uniform(5, 6, rng)};
  Vec v = encode_target(g, p, m);
  Vec want = l2_normalize(column_mean(g.frames));
  for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(v[j], want[j], 1e-12);
}

TEST(EncodeTarget, AlwaysUnitNorm) {
  FusionConfig m = tiny_model();
  Rng rng(11);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FusionParams p = init_fusion(m, seed);
    GalleryEntry g{"g", uniform(4, 8, rng, -4, 4), uniform(5, 6, rng, -4, 4)};
    EXPECT_NEAR(norm(encode_target(g, p, m)), 1.0, 1e-12);
  }
}

TEST(EncodeTarget, SilentClipUsesNoAudioToken) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 12);
  Rng rng(13);
  GalleryEntry silent{"g", uniform(4, 8, rng), Tensor2(0, 6)};
  GalleryEntry explicit_token{"g", silent.frames, p.resampler.no_audio};
  EXPECT_EQ(encode_target(silent, p, m), encode_target(explicit_token, p, m));
}

TEST(EncodeTarget, AudioSwitchOffIgnoresAudio) {
  FusionConfig m = tiny_model();
  m.use_audio = false;
  FusionParams p = init_fusion(m, 14);
  Rng rng(15);
  Tensor2 frames = uniform(4, 8, rng);
  EXPECT_EQ(encode_target({"a", frames, uniform(5, 6, rng)}, p, m),
            encode_target({"b", frames, uniform(5, 6, rng)}, p, m));
}

TEST(EncodeAv, AverageFusionIsMeanOfFramesAndAudio) {
  FusionConfig m = tiny_model();
  m.av_fusion = AvFusion::average;
  FusionParams p = init_fusion(m, 16);
  Rng rng(17);
  Tensor2 frames = uniform(4, 8, rng);
  Tensor2 audio = uniform(5, 6, rng);
  Vec f = encode_av(frames, audio, p, m);
  Vec fm = column_mean(frames);
  Vec am = column_mean(resample(audio, p.resampler));
  for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(f[j], 0.5 * (fm[j] + am[j]), 1e-12);
}

TEST(EncodeQuery, NoTextFusionEqualsTargetEncoding) {
  FusionConfig m = tiny_model();
  m.text_fusion = TextFusion::none;
  FusionParams p = init_fusion(m, 18);
  Rng rng(19);
  TripletRecord t = random_triplet(rng, false);
  Vec q = encode_query(t, p, m).f_avt;
  Vec v = encode_target({"g", t.query_frames, t.query_audio}, p, m);
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_NEAR(q[j], v[j], 1e-12);
}

TEST(FusionParams, NamedTensorsCoverEveryModule) {
  FusionConfig m = tiny_model();
  FusionParams p = init_fusion(m, 20);
  std::size_t res = 0, gft = 0, avt = 0, tau = 0;
  for (const auto& [name, t] : named_tensors(p)) {
    if (name.rfind("resampler.", 0) == 0) ++res;
    else if (name.rfind("gft.", 0) == 0) ++gft;
    else if (name.rfind("avt.", 0) == 0) ++avt;
    else if (name == "log_tau") ++tau;
    else ADD_FAILURE() << "unexpected tensor " << name;
  }
  EXPECT_EQ(res, 5u);
  EXPECT_EQ(gft, 14u * m.layers);
  EXPECT_EQ(avt, 4u);
  EXPECT_EQ(tau, 1u);
  EXPECT_NEAR(p.tau(), 0.07, 1e-15);
}

TEST(FusionParams, FusionNamesRoundTrip) {
  for (auto v : {AvFusion::gated, AvFusion::average}) EXPECT_EQ(parse_av_fusion(to_string(v)), v);
  for (auto v : {TextFusion::none, TextFusion::average, TextFusion::adaptive})
    EXPECT_EQ(parse_text_fusion(to_string(v)), v);
  EXPECT_THROW(parse_text_fusion("sum"), ConfigError);
}

TEST(EndToEnd, GradientCheckFiveSeeds) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GradReport r = check_end_to_end(seed, 1e-3);
    EXPECT_TRUE(r.passed()) << "seed " << seed << " error " << r.max_relative_error;
  }
}
