#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cova/attention.hpp"
#include "cova/numerics.hpp"
#include "cova/random.hpp"

namespace cova {

struct GftConfig {
  std::size_t layers = 2;  // L
  std::size_t width = 512;  // D
  std::size_t ffn_multiplier = 4;
};

// One pre-norm block: frames cross-attend to audio tokens, a sigmoid gate
// over [LN(x) ‖ attn] scales the attention residual, then a GELU
// feed-forward residual.
struct GftLayerParams {
  Tensor2 ln1_gain, ln1_bias;        // 1×D
  Tensor2 query_proj, key_proj;      // D×D
  Tensor2 value_proj, out_proj;      // D×D
  Tensor2 gate_proj;                 // 2D×D, rows [0,D) act on LN(x), [D,2D) on attn
  Tensor2 gate_bias;                 // 1×D
  Tensor2 ln2_gain, ln2_bias;        // 1×D
  Tensor2 ffn_in, ffn_in_bias;       // D×kD, 1×kD
  Tensor2 ffn_out, ffn_out_bias;     // kD×D, 1×D

  template <class Self, class Fn>
  static void visit(Self& self, const std::string& prefix, Fn&& fn) {
    fn(prefix + "ln1_gain", self.ln1_gain);
    fn(prefix + "ln1_bias", self.ln1_bias);
    fn(prefix + "query_proj", self.query_proj);
    fn(prefix + "key_proj", self.key_proj);
    fn(prefix + "value_proj", self.value_proj);
    fn(prefix + "out_proj", self.out_proj);
    fn(prefix + "gate_proj", self.gate_proj);
    fn(prefix + "gate_bias", self.gate_bias);
    fn(prefix + "ln2_gain", self.ln2_gain);
    fn(prefix + "ln2_bias", self.ln2_bias);
    fn(prefix + "ffn_in", self.ffn_in);
    fn(prefix + "ffn_in_bias", self.ffn_in_bias);
    fn(prefix + "ffn_out", self.ffn_out);
    fn(prefix + "ffn_out_bias", self.ffn_out_bias);
  }
};

struct GftParams {
  std::vector<GftLayerParams> layers;

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      GftLayerParams::visit(self.layers[l], "gft.layer" + std::to_string(l) + ".", fn);
    }
  }

  std::size_t width() const noexcept {
    return layers.empty() ? 0 : layers.front().query_proj.rows();
  }
};

inline constexpr Real kGftDenseInitStd = 0.02;

// Attention projections start at N(0, 1/D); gate and feed-forward weights
// at N(0, 0.02²); biases at 0 (gate open halfway); layer-norm gains at 1.
GftParams init_gft(const GftConfig& config, Rng& rng);

struct GftLayerCache {
  Tensor2 input;
  LayerNormCache ln1;
  Tensor2 normed;  // LN1(x)
  AttentionCache attention;
  Tensor2 context;
  Tensor2 attn;  // context·out_proj
  Tensor2 gate;  // sigmoid activations
  LayerNormCache ln2;
  Tensor2 normed2;
  Tensor2 ffn_pre;
  Tensor2 ffn_act;
};

struct GftCache {
  std::vector<GftLayerCache> layers;
  Tensor2 audio;
  std::size_t frame_count = 0;
};

// Refined frames f^(L) (N×D).
Tensor2 gft_refine(const Tensor2& frames, const Tensor2& audio, const GftParams& params,
                   GftCache* cache = nullptr);

// Arithmetic column mean; throws EmptyInputError on zero rows.
Vec mean_pool(const Tensor2& x);

// f_av = mean_pool(gft_refine(frames, audio)).
Vec fuse_av(const Tensor2& frames, const Tensor2& audio, const GftParams& params,
            GftCache* cache = nullptr);

struct GftInputGrads {
  Tensor2 d_frames;
  Tensor2 d_audio;
};

// Backward of fuse_av given dL/df_av; accumulates parameter gradients.
GftInputGrads fuse_av_backward(const GftCache& cache, const GftParams& params,
                               std::span<const Real> d_fused, GftParams& grads);

}  // namespace cova
