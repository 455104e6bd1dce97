#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "cova/embedding_io.hpp"
#include "cova/model.hpp"
#include "cova/numerics.hpp"
#include "cova/random.hpp"

namespace cova::testing {

inline Tensor2 uniform(std::size_t r, std::size_t c, Rng& rng, Real lo = -1.0, Real hi = 1.0) {
  std::uniform_real_distribution<Real> u(lo, hi);
  Tensor2 t(r, c);
  for (Real& v : t.values()) v = u(rng);
  return t;
}

inline Vec to_vec(std::span<const Real> s) { return Vec(s.begin(), s.end()); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cova_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Small dataset shape used across tests.
inline SynthConfig small_synth(std::uint64_t seed) {
  SynthConfig c;
  c.train_triplets = 64;
  c.test_triplets = 24;
  c.gallery_extra = 40;
  c.frames = 4;
  c.audio_tokens = 5;
  c.width = 16;
  c.audio_width = 12;
  c.seed = seed;
  return c;
}

inline FusionConfig model_for(const SynthConfig& s) {
  FusionConfig m;
  m.width = s.width;
  m.audio_width = s.audio_width;
  m.tokens = 4;
  m.layers = 2;
  m.ffn_multiplier = 2;
  m.hidden = 16;
  return m;
}

// Shuts the audio path of every fusion layer: no attention output, a
// saturated-closed gate and a zero feed-forward, so f_av = mean(frames).
inline void close_gates(FusionParams& p, Real gate_bias = -30.0) {
  for (auto& l : p.gft.layers) {
    l.out_proj.fill(0.0);
    l.gate_bias.fill(gate_bias);
    l.ffn_in.fill(0.0);
    l.ffn_in_bias.fill(0.0);
    l.ffn_out.fill(0.0);
    l.ffn_out_bias.fill(0.0);
  }
}

// Hand-built weights that recognise the synthetic placeholder text: hidden
// unit x fires only when text field x holds its placeholder, which drives
// that field's weight to ~0; real edits and f_av get weight ~1.
inline void plant_composition(FusionParams& p, const Tensor2& null_text) {
  const std::size_t d = null_text.cols();
  p.avt.hidden_proj.fill(0.0);
  p.avt.hidden_bias.fill(0.0);
  p.avt.out_proj.fill(0.0);
  p.avt.out_bias.fill(30.0);
  for (std::size_t x = 0; x < null_text.rows(); ++x) {
    const Real scale = norm(null_text.row(x));
    for (std::size_t j = 0; j < d; ++j) p.avt.hidden_proj((x + 1) * d + j, x) = null_text(x, j) / scale;
    p.avt.hidden_bias(0, x) = -scale / 2.0;
    p.avt.out_proj(x, x + 1) = -60.0 / (scale / 2.0);
  }
}

}  // namespace cova::testing
