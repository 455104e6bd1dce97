#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "cova/numerics.hpp"

namespace cova {

inline constexpr std::size_t kTextComponents = 4;  // obj, act, att, audm

struct DatasetDims {
  std::size_t frames = 8;        // N
  std::size_t audio_tokens = 64;  // T
  std::size_t width = 512;       // D
  std::size_t audio_width = 768;  // D_a

  friend bool operator==(const DatasetDims&, const DatasetDims&) = default;
};

struct GalleryEntry {
  std::string id;
  Tensor2 frames;  // N×D
  Tensor2 audio;   // T×D_a, T may be 0 for a silent clip
};

// The target clip lives in the gallery; `target_index` is resolved at load.
struct TripletRecord {
  std::string id;
  Tensor2 query_frames;  // N×D
  Tensor2 query_audio;   // T×D_a
  Tensor2 text;          // 4×D rows obj, act, att, audm; a zero row is a missing field
  std::string target_id;
  std::size_t target_index = 0;
  // Names of the text components that carry the modification, when known
  // (synthetic data); used by ablation reports.
  std::vector<std::string> carriers;
};

struct Dataset {
  DatasetDims dims;
  std::vector<TripletRecord> triplets;
  std::vector<GalleryEntry> gallery;

  // Fills every triplet's target_index. Throws LoadError naming the first
  // triplet whose target is absent.
  void resolve_targets();
};

}  // namespace cova
