#include "cova/model.hpp"

#include <cmath>

#include "cova/errors.hpp"
#include "cova/objective.hpp"

namespace cova {

std::string to_string(AvFusion v) { return v == AvFusion::gated ? "gated" : "average"; }

std::string to_string(TextFusion v) {
  switch (v) {
    case TextFusion::none: return "none";
    case TextFusion::average: return "average";
    case TextFusion::adaptive: return "adaptive";
  }
  return "adaptive";
}

AvFusion parse_av_fusion(const std::string& s) {
  if (s == "gated") return AvFusion::gated;
  if (s == "average") return AvFusion::average;
  throw ConfigError("unknown av fusion '" + s + "' (expected gated|average)");
}

TextFusion parse_text_fusion(const std::string& s) {
  if (s == "none") return TextFusion::none;
  if (s == "average") return TextFusion::average;
  if (s == "adaptive") return TextFusion::adaptive;
  throw ConfigError("unknown text fusion '" + s + "' (expected none|average|adaptive)");
}

Real FusionParams::tau() const { return std::exp(log_tau(0, 0)); }

FusionParams init_fusion(const FusionConfig& config, std::uint64_t seed) {
  FusionParams p;
  Rng res_rng = make_rng(seed, 11);
  Rng gft_rng = make_rng(seed, 12);
  Rng avt_rng = make_rng(seed, 13);
  p.resampler = init_resampler({config.tokens, config.width, config.audio_width}, res_rng);
  p.gft = init_gft({config.layers, config.width, config.ffn_multiplier}, gft_rng);
  p.avt = init_avt({config.width, config.hidden}, avt_rng);
  p.log_tau = Tensor2(1, 1, std::log(kInitialTemperature));
  return p;
}

Vec encode_av(const Tensor2& frames, const Tensor2& audio, const FusionParams& params,
              const FusionConfig& config, AvTape* tape) {
  static const Tensor2 kSilent;
  const Tensor2& used_audio = config.use_audio ? audio : kSilent;
  ResamplerCache res_cache;
  Tensor2 resampled = resample_or_silent(used_audio, params.resampler,
                                         tape != nullptr ? &res_cache : nullptr);
  Vec f_av;
  GftCache gft_cache;
  if (config.av_fusion == AvFusion::gated) {
    f_av = fuse_av(frames, resampled, params.gft, tape != nullptr ? &gft_cache : nullptr);
  } else {
    if (frames.cols() != resampled.cols()) {
      throw InputError("encode_av: frame width " + std::to_string(frames.cols()) +
                       " does not match D=" + std::to_string(resampled.cols()));
    }
    Vec fm = mean_pool(frames);
    Vec am = column_mean(resampled);
    f_av.resize(fm.size());
    for (std::size_t j = 0; j < fm.size(); ++j) f_av[j] = 0.5 * (fm[j] + am[j]);
  }
  if (tape != nullptr) {
    tape->gated = config.av_fusion == AvFusion::gated;
    tape->silent = used_audio.rows() == 0;
    tape->resampler = std::move(res_cache);
    tape->resampled = std::move(resampled);
    tape->gft = std::move(gft_cache);
    tape->frame_count = frames.rows();
    tape->f_av = f_av;
  }
  return f_av;
}

Vec encode_target(const GalleryEntry& entry, const FusionParams& params,
                  const FusionConfig& config, TargetTape* tape) {
  Vec f_av = encode_av(entry.frames, entry.audio, params, config,
                       tape != nullptr ? &tape->av : nullptr);
  Vec out = l2_normalize(f_av);
  if (tape != nullptr) tape->embedding = out;
  return out;
}

ComposedQuery encode_query(const TripletRecord& record, const FusionParams& params,
                           const FusionConfig& config, const ComponentMask& keep,
                           QueryTape* tape) {
  if (record.text.rows() != kTextComponents || record.text.cols() != config.width) {
    throw InputError("triplet " + record.id + ": text must be 4x" +
                     std::to_string(config.width));
  }
  Vec f_av = encode_av(record.query_frames, record.query_audio, params, config,
                       tape != nullptr ? &tape->av : nullptr);
  Tensor2 components(kComponents, config.width);
  std::copy(f_av.begin(), f_av.end(), components.row(kAv).begin());
  for (std::size_t i = 0; i < kTextComponents; ++i) {
    auto src = record.text.row(i);
    std::copy(src.begin(), src.end(), components.row(i + 1).begin());
  }
  ComponentMask mask = keep;
  bool fixed = true;
  switch (config.text_fusion) {
    case TextFusion::none:
      for (std::size_t i = 1; i < kComponents; ++i) mask[i] = false;
      break;
    case TextFusion::average: break;
    case TextFusion::adaptive: fixed = false; break;
  }
  return avt_fuse(components, params.avt, mask, fixed, tape != nullptr ? &tape->avt : nullptr);
}

namespace {

void encode_av_backward(const AvTape& tape, const FusionParams& params,
                        std::span<const Real> d_f_av, FusionParams& grads,
                        bool train_resampler) {
  Tensor2 d_resampled;
  if (tape.gated) {
    GftInputGrads g = fuse_av_backward(tape.gft, params.gft, d_f_av, grads.gft);
    d_resampled = std::move(g.d_audio);
  } else {
    const std::size_t m = tape.resampled.rows();
    d_resampled = Tensor2(m, tape.resampled.cols());
    const Real s = 0.5 / static_cast<Real>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d_resampled.cols(); ++j) d_resampled(i, j) = s * d_f_av[j];
  }
  if (train_resampler) resample_backward(tape.resampler, params.resampler, d_resampled, grads.resampler);
}

}  // namespace

void encode_query_backward(const QueryTape& tape, const FusionParams& params,
                           const FusionConfig&, std::span<const Real> d_query,
                           FusionParams& grads, bool train_resampler) {
  Tensor2 d_components = avt_backward(tape.avt, params.avt, d_query, grads.avt);
  encode_av_backward(tape.av, params, d_components.row(kAv), grads, train_resampler);
}

void encode_target_backward(const TargetTape& tape, const FusionParams& params,
                            const FusionConfig&, std::span<const Real> d_target,
                            FusionParams& grads, bool train_resampler) {
  Vec d_f_av = l2_normalize_backward(tape.av.f_av, tape.embedding, d_target);
  encode_av_backward(tape.av, params, d_f_av, grads, train_resampler);
}

}  // namespace cova
