#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cova/dataset.hpp"
#include "cova/model.hpp"

namespace cova {

namespace fs = std::filesystem;

// Tensor file: "AVCT1", u8 dtype, u8 rank, rank × u64 dims (little endian),
// row-major little-endian payload. Rank-1 tensors load as 1×n.
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

void write_tensor(const fs::path& path, const Tensor2& t, DType dtype = DType::f32);
Tensor2 read_tensor(const fs::path& path);

// Rounds every value through f32, matching what a f32 tensor file stores.
void round_to_f32(Tensor2& t);

// Manifest: one JSON object per line.
//   {"role":"meta","N":8,"T":64,"D":512,"D_a":768}            (optional, first)
//   {"id":..,"role":"triplet","query_frames":..,"query_audio":..,"text":..,
//    "target_id":..,"carriers":[..]}
//   {"id":..,"role":"gallery","frames":..,"audio":..}
// Paths are relative to the manifest's directory.
Dataset load_dataset(const fs::path& manifest);
void save_dataset(const Dataset& data, const fs::path& manifest);

// Checkpoint: "AVCK1", u32 version, u64 step, u32 length + config JSON,
// u32 tensor count, then per tensor (u32 name length, name, f64 tensor
// record), then a u64 FNV-1a checksum of everything before it.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t step = 0;
  FusionConfig config;
  FusionParams params;
};

nlohmann::ordered_json to_json(const FusionConfig& c);
FusionConfig fusion_config_from_json(const nlohmann::json& j);

void save_checkpoint(const fs::path& path, const FusionParams& params, const FusionConfig& config,
                     std::uint64_t step);
Checkpoint load_checkpoint(const fs::path& path);
// Throws ConfigMismatchError when the stored config differs from `expected`.
Checkpoint load_checkpoint(const fs::path& path, const FusionConfig& expected);

struct SynthConfig {
  std::size_t train_triplets = 512;
  std::size_t test_triplets = 128;
  std::size_t gallery_extra = 1000;  // distractors added to the test gallery
  std::size_t frames = 8;
  std::size_t audio_tokens = 64;
  std::size_t width = 512;
  std::size_t audio_width = 768;
  Real noise = 0.05;  // σ
  // Probability that a triplet changes only the audio (carried by t_audm);
  // otherwise one or two of obj/act/att carry a visual change.
  Real audio_change_prob = 0.5;
  Real audio_shift = 0.5;    // norm of the t_audm share
  Real visual_shift = 1.0;   // total norm of the visual shares
  Real null_text_scale = 20.0;  // norm of the placeholder text for non-carrier fields
  Real audio_scale = 1.0;
  std::uint64_t seed = 0;
};

// One clip for the dedup / mining pipeline: frames plus an audio-caption
// embedding.
struct ClipSource {
  std::string id;
  Tensor2 frames;   // N×D
  Tensor2 caption;  // 1×D
};

struct SynthData {
  Dataset train;
  Dataset test;
  Tensor2 null_text;  // 4×D
  std::vector<ClipSource> clips;
  // Per test triplet: the sum of the planted shares (the ideal text edit).
  std::vector<Vec> test_edits;
  std::vector<Vec> train_edits;
};

SynthData synth_build(const SynthConfig& config);
// Writes train.jsonl, test.jsonl, clips.jsonl, null_text.avct, synth.json
// and tensors/ under `out_dir`.
void synth_write(const SynthData& data, const SynthConfig& config, const fs::path& out_dir);

nlohmann::ordered_json to_json(const SynthConfig& c);

}  // namespace cova
