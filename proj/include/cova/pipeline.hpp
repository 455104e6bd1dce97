#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cova/numerics.hpp"

namespace cova {

struct ClipRecord {
  std::string id;
  Vec video;  // E_v, frame mean
  Vec audio;  // E_a, audio-caption embedding
  // Source paths, carried through to pipeline outputs when known.
  std::string frames_path;
  std::string caption_path;
};

// Column mean of the frame embeddings, not renormalized.
Vec clip_embedding(const Tensor2& frames);

struct DedupThresholds {
  Real video = 0.92;
  Real audio = 0.96;
};

// Greedy scan in input order: a record is dropped when an earlier retained
// record has s_v > video AND s_a > audio.
std::vector<ClipRecord> dedup(const std::vector<ClipRecord>& records,
                              const DedupThresholds& thresholds = {});

enum class Band { visual_similar_audio_differ = 1, visual_differ_audio_similar = 2 };
std::string band_name(Band b);

// Open interval (lo, hi).
struct Interval {
  Real lo = 0.0;
  Real hi = 0.0;
  bool contains(Real x) const noexcept { return lo < x && x < hi; }
};

enum class Combinator { all, any };

struct BandConfig {
  Interval band1_video{0.92, 0.96};
  Interval band1_audio{0.0, 0.85};
  Interval band2_video{0.85, 0.88};
  Interval band2_audio{0.95, 1.0};
  // all: both the video and the audio condition must hold; any: either.
  // Under `any` a pair matching both bands is reported as band 1.
  Combinator combinator = Combinator::all;
};

std::optional<Band> classify_pair(Real s_v, Real s_a, const BandConfig& bands);

struct CandidatePair {
  std::string id_a;  // id_a < id_b
  std::string id_b;
  Real s_v = 0.0;
  Real s_a = 0.0;
  Band band = Band::visual_similar_audio_differ;
};

// Every unordered pair is tested; output sorted by (band, id_a, id_b).
std::vector<CandidatePair> mine_pairs(const std::vector<ClipRecord>& records,
                                      const BandConfig& bands = {}, std::size_t threads = 1);

// clips.jsonl: {"id":..,"frames":<N×D tensor>,"audio_caption":<1×D or D tensor>}
std::vector<ClipRecord> load_clips(const std::filesystem::path& manifest);
// Paths are rewritten relative to the output file's directory.
void write_clips(const std::vector<ClipRecord>& records, const std::filesystem::path& source_dir,
                 const std::filesystem::path& out);
// One JSON line per pair, with empty caption and modification-text fields
// for the downstream captioning and verification steps.
void write_pairs(const std::vector<CandidatePair>& pairs, const std::filesystem::path& out);

}  // namespace cova
