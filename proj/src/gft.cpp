#include "cova/gft.hpp"

#include <cmath>

#include "cova/errors.hpp"

namespace cova {

namespace {

Real attention_scale(std::size_t width) { return 1.0 / std::sqrt(static_cast<Real>(width)); }

// Splits a 2D×D gate matrix into its LN(x) half and its attn half.
Tensor2 row_block(const Tensor2& m, std::size_t begin, std::size_t count) {
  Tensor2 out(count, m.cols());
  for (std::size_t i = 0; i < count; ++i) {
    auto src = m.row(begin + i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor2 layer_forward(const Tensor2& x, const Tensor2& audio, const GftLayerParams& p,
                      GftLayerCache* c) {
  const std::size_t d = x.cols();
  LayerNormCache ln1;
  Tensor2 h = layer_norm(x, p.ln1_gain, p.ln1_bias, &ln1);

  Tensor2 q = matmul(h, p.query_proj);
  Tensor2 k = matmul(audio, p.key_proj);
  Tensor2 v = matmul(audio, p.value_proj);
  AttentionCache attn_cache;
  Tensor2 context = attend(q, k, v, attention_scale(d), c != nullptr ? &attn_cache : nullptr);
  Tensor2 attn = matmul(context, p.out_proj);

  Tensor2 gate = matmul(h, row_block(p.gate_proj, 0, d));
  add_in_place(gate, matmul(attn, row_block(p.gate_proj, d, d)));
  add_row_broadcast(gate, p.gate_bias);
  for (Real& g : gate.values()) g = sigmoid(g);

  Tensor2 x1 = x;
  add_in_place(x1, hadamard(gate, attn));

  LayerNormCache ln2;
  Tensor2 u = layer_norm(x1, p.ln2_gain, p.ln2_bias, &ln2);
  Tensor2 pre = matmul(u, p.ffn_in);
  add_row_broadcast(pre, p.ffn_in_bias);
  Tensor2 act(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) act.values()[i] = gelu(pre.values()[i]);
  Tensor2 ffn = matmul(act, p.ffn_out);
  add_row_broadcast(ffn, p.ffn_out_bias);

  Tensor2 x2 = x1;
  add_in_place(x2, ffn);

  if (c != nullptr) {
    c->input = x;
    c->ln1 = std::move(ln1);
    c->normed = std::move(h);
    c->attention = std::move(attn_cache);
    c->context = std::move(context);
    c->attn = std::move(attn);
    c->gate = std::move(gate);
    c->ln2 = std::move(ln2);
    c->normed2 = std::move(u);
    c->ffn_pre = std::move(pre);
    c->ffn_act = std::move(act);
  }
  return x2;
}

// Returns dL/dx and adds dL/daudio into d_audio.
Tensor2 layer_backward(const GftLayerCache& c, const Tensor2& audio, const GftLayerParams& p,
                       const Tensor2& d_out, GftLayerParams& g, Tensor2& d_audio) {
  const std::size_t d = c.input.cols();

  // Feed-forward residual.
  Tensor2 d_x1 = d_out;
  add_in_place(g.ffn_out, matmul_tn(c.ffn_act, d_out));
  add_in_place(g.ffn_out_bias, column_sum(d_out));
  Tensor2 d_pre = matmul_nt(d_out, p.ffn_out);
  for (std::size_t i = 0; i < d_pre.size(); ++i) {
    d_pre.values()[i] *= gelu_derivative(c.ffn_pre.values()[i]);
  }
  add_in_place(g.ffn_in, matmul_tn(c.normed2, d_pre));
  add_in_place(g.ffn_in_bias, column_sum(d_pre));
  Tensor2 d_u = matmul_nt(d_pre, p.ffn_in);
  add_in_place(d_x1, layer_norm_backward(c.ln2, p.ln2_gain, d_u, g.ln2_gain, g.ln2_bias));

  // Gated attention residual: x1 = x + gate ⊙ attn.
  Tensor2 d_x = d_x1;
  Tensor2 d_attn = hadamard(d_x1, c.gate);
  Tensor2 d_gate_pre(c.gate.rows(), c.gate.cols());
  for (std::size_t i = 0; i < d_gate_pre.size(); ++i) {
    const Real gv = c.gate.values()[i];
    d_gate_pre.values()[i] = d_x1.values()[i] * c.attn.values()[i] * gv * (1.0 - gv);
  }
  Tensor2 d_gate_h = matmul_tn(c.normed, d_gate_pre);
  Tensor2 d_gate_a = matmul_tn(c.attn, d_gate_pre);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      g.gate_proj(i, j) += d_gate_h(i, j);
      g.gate_proj(d + i, j) += d_gate_a(i, j);
    }
  }
  add_in_place(g.gate_bias, column_sum(d_gate_pre));
  Tensor2 d_h = matmul_nt(d_gate_pre, row_block(p.gate_proj, 0, d));
  add_in_place(d_attn, matmul_nt(d_gate_pre, row_block(p.gate_proj, d, d)));

  // Cross-attention.
  add_in_place(g.out_proj, matmul_tn(c.context, d_attn));
  Tensor2 d_context = matmul_nt(d_attn, p.out_proj);
  AttentionGrads ag = attend_backward(c.attention, attention_scale(d), d_context);
  add_in_place(g.query_proj, matmul_tn(c.normed, ag.d_queries));
  add_in_place(d_h, matmul_nt(ag.d_queries, p.query_proj));
  add_in_place(g.key_proj, matmul_tn(audio, ag.d_keys));
  add_in_place(g.value_proj, matmul_tn(audio, ag.d_values));
  add_in_place(d_audio, matmul_nt(ag.d_keys, p.key_proj));
  add_in_place(d_audio, matmul_nt(ag.d_values, p.value_proj));

  add_in_place(d_x, layer_norm_backward(c.ln1, p.ln1_gain, d_h, g.ln1_gain, g.ln1_bias));
  return d_x;
}

}  // namespace

GftParams init_gft(const GftConfig& config, Rng& rng) {
  if (config.layers == 0 || config.width == 0 || config.ffn_multiplier == 0) {
    throw ConfigError("gft: layers, width and ffn_multiplier must be positive");
  }
  const std::size_t d = config.width;
  const std::size_t hidden = d * config.ffn_multiplier;
  const Real attn_std = 1.0 / std::sqrt(static_cast<Real>(d));
  GftParams params;
  for (std::size_t l = 0; l < config.layers; ++l) {
    GftLayerParams p;
    p.ln1_gain = Tensor2(1, d, 1.0);
    p.ln1_bias = Tensor2(1, d);
    p.query_proj = random_normal(d, d, attn_std, rng);
    p.key_proj = random_normal(d, d, attn_std, rng);
    p.value_proj = random_normal(d, d, attn_std, rng);
    p.out_proj = random_normal(d, d, attn_std, rng);
    p.gate_proj = random_normal(2 * d, d, kGftDenseInitStd, rng);
    p.gate_bias = Tensor2(1, d);
    p.ln2_gain = Tensor2(1, d, 1.0);
    p.ln2_bias = Tensor2(1, d);
    p.ffn_in = random_normal(d, hidden, kGftDenseInitStd, rng);
    p.ffn_in_bias = Tensor2(1, hidden);
    p.ffn_out = random_normal(hidden, d, kGftDenseInitStd, rng);
    p.ffn_out_bias = Tensor2(1, d);
    params.layers.push_back(std::move(p));
  }
  return params;
}

Tensor2 gft_refine(const Tensor2& frames, const Tensor2& audio, const GftParams& params,
                   GftCache* cache) {
  const std::size_t d = params.width();
  if (params.layers.empty()) throw ConfigError("gft: no layers");
  if (frames.cols() != d || audio.cols() != d) {
    throw InputError("gft: width mismatch (frames " + std::to_string(frames.cols()) +
                     ", audio " + std::to_string(audio.cols()) + ", D=" + std::to_string(d) +
                     ")");
  }
  if (frames.rows() == 0) throw EmptyInputError("gft: no frames");
  if (audio.rows() == 0) throw EmptyAudioError("gft: no audio tokens");
  if (cache != nullptr) {
    cache->layers.assign(params.layers.size(), GftLayerCache{});
    cache->audio = audio;
    cache->frame_count = frames.rows();
  }
  Tensor2 x = frames;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    x = layer_forward(x, audio, params.layers[l],
                      cache != nullptr ? &cache->layers[l] : nullptr);
  }
  return x;
}

Vec mean_pool(const Tensor2& x) {
  if (x.rows() == 0) throw EmptyInputError("mean_pool: no rows");
  return column_mean(x);
}

Vec fuse_av(const Tensor2& frames, const Tensor2& audio, const GftParams& params,
            GftCache* cache) {
  return mean_pool(gft_refine(frames, audio, params, cache));
}

GftInputGrads fuse_av_backward(const GftCache& cache, const GftParams& params,
                               std::span<const Real> d_fused, GftParams& grads) {
  const std::size_t d = params.width();
  const std::size_t n = cache.frame_count;
  Tensor2 d_x(n, d);
  const Real inv_n = 1.0 / static_cast<Real>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) d_x(i, j) = d_fused[j] * inv_n;

  GftInputGrads out;
  out.d_audio = Tensor2(cache.audio.rows(), cache.audio.cols());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    d_x = layer_backward(cache.layers[l], cache.audio, params.layers[l], d_x, grads.layers[l],
                         out.d_audio);
  }
  out.d_frames = std::move(d_x);
  return out;
}

}  // namespace cova
