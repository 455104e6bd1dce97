#include "cova/avt.hpp"

#include <algorithm>

#include "cova/errors.hpp"

namespace cova {

AvtParams init_avt(const AvtConfig& config, Rng& rng) {
  if (config.width == 0 || config.hidden == 0) {
    throw ConfigError("avt: width and hidden must be positive");
  }
  AvtParams p;
  p.hidden_proj = random_normal(kComponents * config.width, config.hidden, kAvtInitStd, rng);
  p.hidden_bias = Tensor2(1, config.hidden);
  p.out_proj = random_normal(config.hidden, kComponents, kAvtInitStd, rng);
  p.out_bias = Tensor2(1, kComponents);
  return p;
}

Tensor2 stack_components(std::span<const Real> f_av, std::span<const Real> t_obj,
                         std::span<const Real> t_act, std::span<const Real> t_att,
                         std::span<const Real> t_audm) {
  const std::array<std::span<const Real>, kComponents> parts = {f_av, t_obj, t_act, t_att,
                                                                t_audm};
  const std::size_t d = f_av.size();
  Tensor2 out(kComponents, d);
  for (std::size_t i = 0; i < kComponents; ++i) {
    if (parts[i].size() != d) {
      throw InputError(std::string("avt: component ") + kComponentNames[i] + " has width " +
                       std::to_string(parts[i].size()) + ", expected " + std::to_string(d));
    }
    std::copy(parts[i].begin(), parts[i].end(), out.row(i).begin());
  }
  return out;
}

ComponentMask present_components(const Tensor2& components) {
  ComponentMask mask{};
  for (std::size_t i = 0; i < kComponents; ++i) {
    auto r = components.row(i);
    mask[i] = std::any_of(r.begin(), r.end(), [](Real v) { return v != 0.0; });
  }
  return mask;
}

Weights predict_weights(const Tensor2& components, const AvtParams& params,
                        AvtMlpCache* cache) {
  if (components.rows() != kComponents || components.cols() != params.width()) {
    throw InputError("avt: components are " + std::to_string(components.rows()) + "x" +
                     std::to_string(components.cols()) + ", expected 5x" +
                     std::to_string(params.width()));
  }
  Tensor2 input(1, components.size(), std::vector<Real>(components.values().begin(),
                                                        components.values().end()));
  Tensor2 pre = matmul(input, params.hidden_proj);
  add_row_broadcast(pre, params.hidden_bias);
  Tensor2 hidden = pre;
  for (Real& v : hidden.values()) v = std::max(v, 0.0);
  Tensor2 logits = matmul(hidden, params.out_proj);
  add_row_broadcast(logits, params.out_bias);
  Weights w{};
  for (std::size_t i = 0; i < kComponents; ++i) w[i] = sigmoid(logits(0, i));
  if (cache != nullptr) {
    cache->input = std::move(input);
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->weights = w;
  }
  return w;
}

Weights predict_weights(std::span<const Real> f_av, std::span<const Real> t_obj,
                        std::span<const Real> t_act, std::span<const Real> t_att,
                        std::span<const Real> t_audm, const AvtParams& params) {
  return predict_weights(stack_components(f_av, t_obj, t_act, t_att, t_audm), params);
}

namespace {

Vec weighted_sum(const Tensor2& components, const Weights& weights) {
  Vec sum(components.cols(), 0.0);
  for (std::size_t i = 0; i < kComponents; ++i) {
    if (weights[i] == 0.0) continue;
    auto r = components.row(i);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += weights[i] * r[j];
  }
  return sum;
}

}  // namespace

Vec compose(const Tensor2& components, const Weights& weights) {
  if (components.rows() != kComponents) {
    throw InputError("compose: expected 5 components, got " +
                     std::to_string(components.rows()));
  }
  return l2_normalize(weighted_sum(components, weights));
}

ComposedQuery avt_fuse(const Tensor2& components, const AvtParams& params,
                       const ComponentMask& keep, bool fixed_average, AvtCache* cache) {
  ComponentMask mask = present_components(components);
  for (std::size_t i = 0; i < kComponents; ++i) mask[i] = mask[i] && keep[i];

  AvtMlpCache mlp;
  Weights predicted{};
  if (fixed_average) {
    if (components.rows() != kComponents) {
      throw InputError("avt: expected 5 components, got " + std::to_string(components.rows()));
    }
    predicted.fill(0.5);
  } else {
    predicted = predict_weights(components, params, cache != nullptr ? &mlp : nullptr);
  }
  Weights effective{};
  for (std::size_t i = 0; i < kComponents; ++i) effective[i] = mask[i] ? predicted[i] : 0.0;

  Vec sum = weighted_sum(components, effective);
  ComposedQuery out{l2_normalize(sum), effective};
  if (cache != nullptr) {
    cache->components = components;
    cache->mlp = std::move(mlp);
    cache->mask = mask;
    cache->fixed = fixed_average;
    cache->effective = effective;
    cache->sum = std::move(sum);
    cache->f_avt = out.f_avt;
  }
  return out;
}

Tensor2 avt_backward(const AvtCache& cache, const AvtParams& params,
                     std::span<const Real> d_f_avt, AvtParams& grads) {
  const std::size_t d = cache.components.cols();
  Vec d_sum = l2_normalize_backward(cache.sum, cache.f_avt, d_f_avt);

  Tensor2 d_components(kComponents, d);
  Tensor2 d_logits(1, kComponents);
  for (std::size_t i = 0; i < kComponents; ++i) {
    if (!cache.mask[i]) continue;
    auto row = cache.components.row(i);
    auto d_row = d_components.row(i);
    for (std::size_t j = 0; j < d; ++j) d_row[j] = cache.effective[i] * d_sum[j];
    if (!cache.fixed) {
      const Real w = cache.mlp.weights[i];
      d_logits(0, i) = dot(row, d_sum) * w * (1.0 - w);
    }
  }
  if (cache.fixed) return d_components;

  add_in_place(grads.out_proj, matmul_tn(cache.mlp.hidden, d_logits));
  add_in_place(grads.out_bias, d_logits);
  Tensor2 d_hidden = matmul_nt(d_logits, params.out_proj);
  for (std::size_t k = 0; k < d_hidden.size(); ++k) {
    if (cache.mlp.hidden_pre.values()[k] <= 0.0) d_hidden.values()[k] = 0.0;
  }
  add_in_place(grads.hidden_proj, matmul_tn(cache.mlp.input, d_hidden));
  add_in_place(grads.hidden_bias, d_hidden);
  Tensor2 d_input = matmul_nt(d_hidden, params.hidden_proj);
  for (std::size_t k = 0; k < d_input.size(); ++k) {
    d_components.values()[k] += d_input.values()[k];
  }
  return d_components;
}

}  // namespace cova
