#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "cova/embedding_io.hpp"
#include "cova/errors.hpp"
#include "cova/pipeline.hpp"
#include "test_util.hpp"

using namespace cova;

namespace {

// Unit vector at cosine c from e1 inside the plane (e1, e_axis).
Vec at_cosine(Real c, std::size_t axis = 1, std::size_t dim = 4) {
  Vec v(dim, 0.0);
  v[0] = c;
  v[axis] = std::sqrt(1.0 - c * c);
  return v;
}

ClipRecord clip(const std::string& id, Vec video, Vec audio) {
  return ClipRecord{id, std::move(video), std::move(audio), {}, {}};
}

Vec e1() { return at_cosine(1.0); }

std::vector<ClipRecord> random_clips(std::size_t n, std::uint64_t seed) {
  // Clustered so that every band and the dedup rule get exercised.
  Rng rng(seed);
  std::normal_distribution<Real> g(0.0, 1.0);
  const std::size_t d = 6;
  std::vector<Vec> centres(5, Vec(d));
  for (auto& c : centres)
    for (Real& x : c) x = g(rng);
  std::vector<ClipRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec v = centres[i % 5], a = centres[(i / 5) % 5];
    const Real sv = 0.05 + 0.3 * static_cast<Real>(i % 3);
    for (Real& x : v) x += sv * g(rng);
    for (Real& x : a) x += 0.2 * g(rng);
    out.push_back(clip("c" + std::to_string(1000 + (i * 7919) % 9000), v, a));
  }
  return out;
}

}  // namespace

TEST(ClipEmbedding, IsTheFrameMean) {
  Tensor2 f(2, 3, {1.0, 2.0, 3.0, 3.0, 2.0, 1.0});
  EXPECT_EQ(clip_embedding(f), (Vec{2.0, 2.0, 2.0}));
  EXPECT_THROW(clip_embedding(Tensor2(0, 3)), EmptyInputError);
}

TEST(Dedup, DropsOnlyWhenBothSimilaritiesExceed) {
  auto a = clip("a", e1(), e1());
  EXPECT_EQ(dedup({a, clip("b", at_cosine(0.93), at_cosine(0.97))}).size(), 1u);
  EXPECT_EQ(dedup({a, clip("b", at_cosine(0.93), at_cosine(0.95))}).size(), 2u);
  EXPECT_EQ(dedup({a, clip("b", at_cosine(0.91), at_cosine(0.99))}).size(), 2u);
}

TEST(Dedup, KeepsTheFirstOfIdenticalClips) {
  std::vector<ClipRecord> five;
  for (int i = 0; i < 5; ++i) five.push_back(clip("dup" + std::to_string(i), e1(), e1()));
  auto kept = dedup(five);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, "dup0");
}

TEST(Dedup, IsIdempotentAndLeavesNoDuplicatePair) {
  auto recs = random_clips(120, 3);
  DedupThresholds t{0.9, 0.9};
  auto once = dedup(recs, t);
  auto twice = dedup(once, t);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].id, twice[i].id);
  for (std::size_t i = 0; i < once.size(); ++i)
    for (std::size_t j = i + 1; j < once.size(); ++j)
      EXPECT_FALSE(cosine_similarity(once[i].video, once[j].video) > t.video &&
                   cosine_similarity(once[i].audio, once[j].audio) > t.audio);
  EXPECT_LT(once.size(), recs.size());
}

TEST(ClassifyPair, BandExamples) {
  BandConfig b;
  EXPECT_EQ(classify_pair(0.94, 0.5, b), Band::visual_similar_audio_differ);
  EXPECT_EQ(classify_pair(0.86, 0.97, b), Band::visual_differ_audio_similar);
  EXPECT_EQ(classify_pair(0.94, 0.9, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.5, 0.5, b), std::nullopt);
}

TEST(ClassifyPair, BoundsAreStrict) {
  BandConfig b;
  EXPECT_EQ(classify_pair(0.92, 0.5, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.96, 0.5, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.94, 0.85, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.85, 0.97, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.88, 0.97, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.86, 0.95, b), std::nullopt);
  EXPECT_EQ(classify_pair(0.86, 1.0, b), std::nullopt);
  EXPECT_EQ(classify_pair(std::nextafter(0.92, 1.0), 0.5, b), Band::visual_similar_audio_differ);
}

TEST(ClassifyPair, AnyCombinatorNeedsOneCondition) {
  BandConfig b;
  b.combinator = Combinator::any;
  EXPECT_EQ(classify_pair(0.94, 0.99, b), Band::visual_similar_audio_differ);
  EXPECT_EQ(classify_pair(0.10, 0.50, b), Band::visual_similar_audio_differ);
  EXPECT_EQ(classify_pair(0.86, 0.90, b), Band::visual_differ_audio_similar);
  EXPECT_EQ(classify_pair(0.90, 0.90, b), std::nullopt);
}

TEST(MinePairs, MatchesBruteForce) {
  auto recs = random_clips(80, 5);
  BandConfig b;
  b.band1_video = {0.6, 0.97};
  b.band2_video = {0.3, 0.6};
  b.band2_audio = {0.9, 1.0};
  auto mined = mine_pairs(recs, b, 3);
  std::set<std::tuple<int, std::string, std::string>> expected;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < recs.size(); ++j) {
      if (i == j || recs[i].id > recs[j].id) continue;
      auto band = classify_pair(cosine_similarity(recs[i].video, recs[j].video),
                                cosine_similarity(recs[i].audio, recs[j].audio), b);
      if (band) expected.emplace(static_cast<int>(*band), recs[i].id, recs[j].id);
    }
  std::set<std::tuple<int, std::string, std::string>> got;
  for (const auto& p : mined) {
    EXPECT_LT(p.id_a, p.id_b);
    got.emplace(static_cast<int>(p.band), p.id_a, p.id_b);
  }
  EXPECT_EQ(got.size(), mined.size());
  EXPECT_EQ(got, expected);
  EXPECT_FALSE(expected.empty());
  EXPECT_TRUE(std::is_sorted(mined.begin(), mined.end(), [](const auto& x, const auto& y) {
    return std::tie(x.band, x.id_a, x.id_b) < std::tie(y.band, y.id_a, y.id_b);
  }));
}

TEST(MinePairs, IndependentOfInputOrder) {
  auto recs = random_clips(40, 6);
  BandConfig b;
  b.band1_video = {0.6, 0.97};
  auto a = mine_pairs(recs, b);
  std::reverse(recs.begin(), recs.end());
  auto r = mine_pairs(recs, b);
  ASSERT_EQ(a.size(), r.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id_a, r[i].id_a);
    EXPECT_EQ(a[i].id_b, r[i].id_b);
    EXPECT_NEAR(a[i].s_v, r[i].s_v, 1e-12);
  }
}

TEST(ClipsIo, RoundTripsThroughDisk) {
  auto dir = cova::testing::temp_dir("clips_io");
  SynthConfig s = cova::testing::small_synth(2);
  SynthData d = synth_build(s);
  synth_write(d, s, dir);
  auto clips = load_clips(dir / "clips.jsonl");
  ASSERT_EQ(clips.size(), d.clips.size());
  EXPECT_EQ(clips[0].id, d.clips[0].id);
  EXPECT_EQ(clips[0].video, clip_embedding(d.clips[0].frames));

  auto kept = dedup(clips);
  write_clips(kept, dir, dir / "out" / "dedup.jsonl");
  auto again = load_clips(dir / "out" / "dedup.jsonl");
  ASSERT_EQ(again.size(), kept.size());
  EXPECT_EQ(again.back().audio, kept.back().audio);

  write_pairs(mine_pairs(again), dir / "out" / "pairs.jsonl");
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "pairs.jsonl"));
}

TEST(ClipsIo, PairsCarryEmptyAnnotationFields) {
  auto dir = cova::testing::temp_dir("pairs_io");
  write_pairs({{"a", "b", 0.94, 0.5, Band::visual_similar_audio_differ}}, dir / "p.jsonl");
  std::ifstream in(dir / "p.jsonl");
  std::string line;
  std::getline(in, line);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["band"], 1);
  EXPECT_EQ(j["caption_a"], "");
  EXPECT_EQ(j["modification"]["audm"], "");
  EXPECT_TRUE(j["verified"].is_null());
}

TEST(ClipsIo, MissingTensorNamesTheRecord) {
  auto dir = cova::testing::temp_dir("clips_missing");
  std::ofstream(dir / "clips.jsonl") << R"({"id":"x1","frames":"nope.avct","audio_caption":"nope2.avct"})"
                                     << "\n";
  try {
    load_clips(dir / "clips.jsonl");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("x1"), std::string::npos);
  }
}
