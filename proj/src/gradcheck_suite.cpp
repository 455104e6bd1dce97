#include "cova/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>

#include "cova/avt.hpp"
#include "cova/gft.hpp"
#include "cova/model.hpp"
#include "cova/objective.hpp"
#include "cova/params.hpp"
#include "cova/random.hpp"
#include "cova/resampler.hpp"
#include "cova/trainer.hpp"

namespace cova {

namespace {

constexpr std::size_t kWidth = 6;
constexpr std::size_t kAudioWidth = 5;
constexpr std::size_t kTokens = 3;
constexpr std::size_t kFrames = 3;
constexpr std::size_t kAudioTokens = 4;

Real probe_dot(const Tensor2& probe, const Tensor2& out) {
  return dot(probe.values(), out.values());
}

// Draws values uniformly in [−1, 1].
Tensor2 uniform(std::size_t r, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  Tensor2 t(r, c);
  for (Real& v : t.values()) v = u(rng);
  return t;
}

template <class P>
std::vector<GradSlot> slots_for(P& params, const P& grads) {
  std::vector<GradSlot> out;
  auto p = named_tensors(params);
  auto g = named_tensors(grads);
  for (std::size_t k = 0; k < p.size(); ++k) out.push_back({p[k].first, p[k].second, g[k].second});
  return out;
}

// Re-scales randomly initialized weights so gradients are not tiny
// compared to the finite-difference noise floor.
template <class P>
void rescale(P& params, Real s) {
  P::visit(params, [&](const std::string&, Tensor2& t) { scale_in_place(t, s); });
}

}  // namespace

GradReport check_resampler(std::uint64_t seed, Real tolerance) {
  Rng rng = make_rng(seed, 101);
  ResamplerParams p = init_resampler({kTokens, kWidth, kAudioWidth}, rng);
  rescale(p, 25.0);
  Tensor2 audio = uniform(kAudioTokens, kAudioWidth, rng);
  Tensor2 probe = uniform(kTokens, kWidth, rng);

  ResamplerCache cache;
  resample(audio, p, &cache);
  ResamplerParams grads = zeros_like(p);
  Tensor2 d_audio = resample_backward(cache, p, probe, grads);

  auto slots = slots_for(p, grads);
  slots.erase(std::remove_if(slots.begin(), slots.end(),
                             [](const GradSlot& s) { return s.name == "resampler.no_audio"; }),
              slots.end());
  slots.push_back({"audio", &audio, &d_audio});
  return grad_check("resampler", [&] { return probe_dot(probe, resample(audio, p)); }, slots,
                    tolerance);
}

GradReport check_resampler_silent(std::uint64_t seed, Real tolerance) {
  Rng rng = make_rng(seed, 102);
  ResamplerParams p = init_resampler({kTokens, kWidth, kAudioWidth}, rng);
  rescale(p, 25.0);
  Tensor2 probe = uniform(kTokens, kWidth, rng);
  const Tensor2 silent;
  ResamplerCache cache;
  resample_or_silent(silent, p, &cache);
  ResamplerParams grads = zeros_like(p);
  resample_backward(cache, p, probe, grads);
  auto slots = slots_for(p, grads);
  return grad_check("resampler(no-audio)",
                    [&] { return probe_dot(probe, resample_or_silent(silent, p)); }, slots,
                    tolerance);
}

GradReport check_gft(std::uint64_t seed, std::size_t layers, Real tolerance) {
  Rng rng = make_rng(seed, 200 + layers);
  GftParams p = init_gft({layers, kWidth, 2}, rng);
  // Non-trivial gate, norm and bias values so every path is exercised.
  for (auto& l : p.layers) {
    scale_in_place(l.gate_proj, 20.0);
    scale_in_place(l.ffn_in, 20.0);
    scale_in_place(l.ffn_out, 20.0);
    add_in_place(l.ln1_gain, uniform(1, kWidth, rng));
    l.ln1_bias = uniform(1, kWidth, rng);
    l.gate_bias = uniform(1, kWidth, rng);
    add_in_place(l.ln2_gain, uniform(1, kWidth, rng));
    l.ln2_bias = uniform(1, kWidth, rng);
    l.ffn_in_bias = uniform(1, l.ffn_in_bias.cols(), rng);
    l.ffn_out_bias = uniform(1, kWidth, rng);
  }
  Tensor2 frames = uniform(kFrames, kWidth, rng);
  Tensor2 audio = uniform(kTokens, kWidth, rng);
  Tensor2 probe = uniform(1, kWidth, rng);

  GftCache cache;
  fuse_av(frames, audio, p, &cache);
  GftParams grads = zeros_like(p);
  GftInputGrads dx = fuse_av_backward(cache, p, probe.values(), grads);

  auto slots = slots_for(p, grads);
  slots.push_back({"frames", &frames, &dx.d_frames});
  slots.push_back({"audio", &audio, &dx.d_audio});
  return grad_check("gft(L=" + std::to_string(layers) + ")",
                    [&] { return dot(probe.values(), fuse_av(frames, audio, p)); }, slots,
                    tolerance);
}

GradReport check_avt(std::uint64_t seed, Real tolerance) {
  Rng rng = make_rng(seed, 300);
  // Redraw until no hidden unit sits within reach of the ReLU kink.
  for (;;) {
    AvtParams p = init_avt({kWidth, 7}, rng);
    scale_in_place(p.hidden_proj, 10.0);
    scale_in_place(p.out_proj, 50.0);
    p.hidden_bias = uniform(1, 7, rng);
    p.out_bias = uniform(1, kComponents, rng);
    Tensor2 components = uniform(kComponents, kWidth, rng);
    Tensor2 probe = uniform(1, kWidth, rng);

    AvtCache cache;
    avt_fuse(components, p, kAllComponents, false, &cache);
    const auto pre = cache.mlp.hidden_pre.values();
    if (std::any_of(pre.begin(), pre.end(), [](Real v) { return std::abs(v) < 1e-2; })) continue;

    AvtParams grads = zeros_like(p);
    Tensor2 d_components = avt_backward(cache, p, probe.values(), grads);
    auto slots = slots_for(p, grads);
    slots.push_back({"components", &components, &d_components});
    return grad_check("avt",
                      [&] { return dot(probe.values(), avt_fuse(components, p).f_avt); },
                      slots, tolerance);
  }
}

GradReport check_loss_through_tau(std::uint64_t seed, Real tolerance) {
  Rng rng = make_rng(seed, 400);
  constexpr std::size_t b = 4;
  Tensor2 queries = uniform(b, kWidth, rng);
  Tensor2 targets = uniform(b, kWidth, rng);
  std::uniform_real_distribution<Real> u(std::log(0.2), std::log(2.0));
  Tensor2 log_tau(1, 1, u(rng));

  ContrastiveGrads g = contrastive_loss(queries, targets, log_tau(0, 0));
  Tensor2 d_log_tau(1, 1, g.d_log_tau);
  const std::vector<GradSlot> slots = {{"log_tau", &log_tau, &d_log_tau},
                                       {"queries", &queries, &g.d_queries},
                                       {"targets", &targets, &g.d_targets}};
  return grad_check(
      "info_nce(tau)",
      [&] { return info_nce(similarity_matrix(queries, targets, std::exp(log_tau(0, 0)))); }, slots,
      tolerance);
}

GradReport check_end_to_end(std::uint64_t seed, Real tolerance) {
  Rng rng = make_rng(seed, 500);
  FusionConfig model;
  model.width = kWidth;
  model.audio_width = kAudioWidth;
  model.tokens = kTokens;
  model.layers = 1;
  model.ffn_multiplier = 2;
  model.hidden = 5;
  FusionParams params = init_fusion(model, seed);
  rescale(params.resampler, 25.0);
  params.log_tau(0, 0) = 0.0;

  Dataset data;
  data.dims = {kFrames, kAudioTokens, kWidth, kAudioWidth};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string id = std::to_string(i);
    data.gallery.push_back({"g" + id, uniform(kFrames, kWidth, rng), uniform(kAudioTokens, kAudioWidth, rng)});
    TripletRecord t;
    t.id = "q" + id;
    t.query_frames = uniform(kFrames, kWidth, rng);
    t.query_audio = uniform(kAudioTokens, kAudioWidth, rng);
    t.text = uniform(kTextComponents, kWidth, rng);
    t.target_id = "g" + id;
    data.triplets.push_back(std::move(t));
  }
  data.resolve_targets();
  const std::vector<std::size_t> batch = {0, 1, 2};
  TrainConfig tc;
  BatchResult br = batch_gradients(data, batch, params, model, tc);
  auto slots = slots_for(params, br.grads);
  slots.erase(std::remove_if(slots.begin(), slots.end(),
                             [](const GradSlot& s) { return s.name == "resampler.no_audio"; }),
              slots.end());
  return grad_check("end-to-end",
                    [&] { return batch_gradients(data, batch, params, model, tc).loss; }, slots,
                    tolerance);
}

std::vector<GradReport> gradcheck_suite(const std::vector<std::uint64_t>& seeds, Real tolerance) {
  std::vector<GradReport> out;
  for (std::uint64_t s : seeds) {
    out.push_back(check_resampler(s, tolerance));
    out.push_back(check_resampler_silent(s, tolerance));
    out.push_back(check_gft(s, 1, tolerance));
    out.push_back(check_gft(s, 2, tolerance));
    out.push_back(check_avt(s, tolerance));
    out.push_back(check_loss_through_tau(s, tolerance));
  }
  return out;
}

}  // namespace cova
