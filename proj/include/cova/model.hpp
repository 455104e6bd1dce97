#pragma once

#include <cstdint>
#include <string>

#include "cova/avt.hpp"
#include "cova/dataset.hpp"
#include "cova/gft.hpp"
#include "cova/resampler.hpp"

namespace cova {

// Audio-visual fusion: the gated transformer, or a plain average of the
// frame mean and the resampled-audio mean.
enum class AvFusion { gated, average };
// Text fusion: none (video+audio only), fixed equal weights, or the
// query-adaptive MLP weights.
enum class TextFusion { none, average, adaptive };

std::string to_string(AvFusion v);
std::string to_string(TextFusion v);
AvFusion parse_av_fusion(const std::string& s);
TextFusion parse_text_fusion(const std::string& s);

struct FusionConfig {
  std::size_t width = 512;        // D
  std::size_t audio_width = 768;  // D_a
  std::size_t tokens = 8;         // M
  std::size_t layers = 2;         // L
  std::size_t ffn_multiplier = 4;
  std::size_t hidden = 256;       // H
  AvFusion av_fusion = AvFusion::gated;
  TextFusion text_fusion = TextFusion::adaptive;
  // When false every clip is encoded as silent (learned no-audio token).
  bool use_audio = true;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

struct FusionParams {
  ResamplerParams resampler;
  GftParams gft;
  AvtParams avt;
  Tensor2 log_tau;  // 1×1

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    ResamplerParams::visit(self.resampler, fn);
    GftParams::visit(self.gft, fn);
    AvtParams::visit(self.avt, fn);
    fn(std::string("log_tau"), self.log_tau);
  }

  Real tau() const;
};

FusionParams init_fusion(const FusionConfig& config, std::uint64_t seed);

struct AvTape {
  bool gated = true;
  bool silent = false;
  ResamplerCache resampler;
  Tensor2 resampled;  // M×D
  GftCache gft;
  std::size_t frame_count = 0;
  Vec f_av;
};

// Unnormalized f_av for one clip.
Vec encode_av(const Tensor2& frames, const Tensor2& audio, const FusionParams& params,
              const FusionConfig& config, AvTape* tape = nullptr);

struct TargetTape {
  AvTape av;
  Vec embedding;
};

// l2_normalize(f_av); text plays no role on the target side.
Vec encode_target(const GalleryEntry& entry, const FusionParams& params,
                  const FusionConfig& config, TargetTape* tape = nullptr);

struct QueryTape {
  AvTape av;
  AvtCache avt;
};

ComposedQuery encode_query(const TripletRecord& record, const FusionParams& params,
                           const FusionConfig& config, const ComponentMask& keep = kAllComponents,
                           QueryTape* tape = nullptr);

// Backward passes accumulate into `grads`. With train_resampler false the
// resampler branch is skipped and its gradients stay untouched.
void encode_query_backward(const QueryTape& tape, const FusionParams& params,
                           const FusionConfig& config, std::span<const Real> d_query,
                           FusionParams& grads, bool train_resampler = true);
void encode_target_backward(const TargetTape& tape, const FusionParams& params,
                            const FusionConfig& config, std::span<const Real> d_target,
                            FusionParams& grads, bool train_resampler = true);

}  // namespace cova
