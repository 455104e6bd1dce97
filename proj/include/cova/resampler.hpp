#pragma once

#include <cstddef>
#include <string>

#include "cova/attention.hpp"
#include "cova/numerics.hpp"
#include "cova/random.hpp"

namespace cova {

struct ResamplerConfig {
  std::size_t tokens = 8;  // M
  std::size_t width = 512;  // D
  std::size_t audio_width = 768;  // D_a
};

// Learned query tokens cross-attend over projected audio tokens.
struct ResamplerParams {
  Tensor2 queries;     // M×D
  Tensor2 key_proj;    // D_a×D
  Tensor2 value_proj;  // D_a×D
  Tensor2 out_proj;    // D×D
  Tensor2 no_audio;    // 1×D_a, stands in for a clip with no audio tokens

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("resampler.queries"), self.queries);
    fn(std::string("resampler.key_proj"), self.key_proj);
    fn(std::string("resampler.value_proj"), self.value_proj);
    fn(std::string("resampler.out_proj"), self.out_proj);
    fn(std::string("resampler.no_audio"), self.no_audio);
  }

  std::size_t tokens() const noexcept { return queries.rows(); }
  std::size_t width() const noexcept { return queries.cols(); }
  std::size_t audio_width() const noexcept { return key_proj.rows(); }
};

inline constexpr Real kResamplerInitStd = 0.02;

ResamplerParams init_resampler(const ResamplerConfig& config, Rng& rng);

struct ResamplerCache {
  Tensor2 audio;
  AttentionCache attention;
  Tensor2 context;
  bool used_no_audio = false;
};

// audio: T×D_a → M×D. Throws EmptyAudioError when T = 0.
Tensor2 resample(const Tensor2& audio, const ResamplerParams& params,
                 ResamplerCache* cache = nullptr);

// As resample, but a clip without audio tokens is replaced by the learned
// no-audio token.
Tensor2 resample_or_silent(const Tensor2& audio, const ResamplerParams& params,
                           ResamplerCache* cache = nullptr);

// Accumulates parameter gradients into `grads` and returns dL/daudio
// (T×D_a; 1×D_a when the no-audio token was used).
Tensor2 resample_backward(const ResamplerCache& cache, const ResamplerParams& params,
                          const Tensor2& d_out, ResamplerParams& grads);

}  // namespace cova
