#include "cova/resampler.hpp"

#include <cmath>

#include "cova/errors.hpp"

namespace cova {

namespace {

Real attention_scale(const ResamplerParams& p) {
  return 1.0 / std::sqrt(static_cast<Real>(p.width()));
}

}  // namespace

ResamplerParams init_resampler(const ResamplerConfig& config, Rng& rng) {
  if (config.tokens == 0 || config.width == 0 || config.audio_width == 0) {
    throw ConfigError("resampler: tokens, width and audio_width must be positive");
  }
  ResamplerParams p;
  p.queries = random_normal(config.tokens, config.width, kResamplerInitStd, rng);
  p.key_proj = random_normal(config.audio_width, config.width, kResamplerInitStd, rng);
  p.value_proj = random_normal(config.audio_width, config.width, kResamplerInitStd, rng);
  p.out_proj = random_normal(config.width, config.width, kResamplerInitStd, rng);
  p.no_audio = random_normal(1, config.audio_width, kResamplerInitStd, rng);
  return p;
}

Tensor2 resample(const Tensor2& audio, const ResamplerParams& params, ResamplerCache* cache) {
  if (audio.rows() == 0) {
    throw EmptyAudioError("resample: audio has no tokens");
  }
  if (audio.cols() != params.audio_width()) {
    throw InputError("resample: audio width " + std::to_string(audio.cols()) +
                     " does not match D_a=" + std::to_string(params.audio_width()));
  }
  Tensor2 keys = matmul(audio, params.key_proj);
  Tensor2 values = matmul(audio, params.value_proj);
  AttentionCache* attn_cache = cache != nullptr ? &cache->attention : nullptr;
  Tensor2 context = attend(params.queries, keys, values, attention_scale(params), attn_cache);
  Tensor2 out = matmul(context, params.out_proj);
  if (cache != nullptr) {
    cache->audio = audio;
    cache->context = std::move(context);
    cache->used_no_audio = false;
  }
  return out;
}

Tensor2 resample_or_silent(const Tensor2& audio, const ResamplerParams& params,
                           ResamplerCache* cache) {
  if (audio.rows() != 0) return resample(audio, params, cache);
  Tensor2 out = resample(params.no_audio, params, cache);
  if (cache != nullptr) cache->used_no_audio = true;
  return out;
}

Tensor2 resample_backward(const ResamplerCache& cache, const ResamplerParams& params,
                          const Tensor2& d_out, ResamplerParams& grads) {
  add_in_place(grads.out_proj, matmul_tn(cache.context, d_out));
  Tensor2 d_context = matmul_nt(d_out, params.out_proj);
  AttentionGrads ag = attend_backward(cache.attention, attention_scale(params), d_context);
  add_in_place(grads.queries, ag.d_queries);
  add_in_place(grads.key_proj, matmul_tn(cache.audio, ag.d_keys));
  add_in_place(grads.value_proj, matmul_tn(cache.audio, ag.d_values));
  Tensor2 d_audio = matmul_nt(ag.d_keys, params.key_proj);
  add_in_place(d_audio, matmul_nt(ag.d_values, params.value_proj));
  if (cache.used_no_audio) add_in_place(grads.no_audio, d_audio);
  return d_audio;
}

}  // namespace cova
