#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "cova/numerics.hpp"
#include "cova/random.hpp"

namespace cova {

// Row order of the component matrix and of the weight vector.
enum Component : std::size_t { kAv = 0, kObj = 1, kAct = 2, kAtt = 3, kAudm = 4 };
inline constexpr std::size_t kComponents = 5;
inline constexpr std::array<const char*, kComponents> kComponentNames = {"av", "obj", "act",
                                                                         "att", "audm"};

using Weights = std::array<Real, kComponents>;
using ComponentMask = std::array<bool, kComponents>;

inline constexpr ComponentMask kAllComponents = {true, true, true, true, true};

struct AvtConfig {
  std::size_t width = 512;  // D
  std::size_t hidden = 256;  // H
};

struct AvtParams {
  Tensor2 hidden_proj;  // 5D×H
  Tensor2 hidden_bias;  // 1×H
  Tensor2 out_proj;     // H×5
  Tensor2 out_bias;     // 1×5

  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string("avt.hidden_proj"), self.hidden_proj);
    fn(std::string("avt.hidden_bias"), self.hidden_bias);
    fn(std::string("avt.out_proj"), self.out_proj);
    fn(std::string("avt.out_bias"), self.out_bias);
  }

  std::size_t width() const noexcept { return hidden_proj.rows() / kComponents; }
  std::size_t hidden() const noexcept { return hidden_proj.cols(); }
};

inline constexpr Real kAvtInitStd = 0.02;

AvtParams init_avt(const AvtConfig& config, Rng& rng);

// Stacks f_av, t_obj, t_act, t_att, t_audm into a 5×D matrix.
Tensor2 stack_components(std::span<const Real> f_av, std::span<const Real> t_obj,
                         std::span<const Real> t_act, std::span<const Real> t_att,
                         std::span<const Real> t_audm);

// A component whose row is all zeros counts as missing.
ComponentMask present_components(const Tensor2& components);

struct AvtMlpCache {
  Tensor2 input;       // 1×5D
  Tensor2 hidden_pre;  // 1×H
  Tensor2 hidden;      // 1×H
  Weights weights{};
};

// sigmoid(MLP(concat)), each weight in (0,1).
Weights predict_weights(const Tensor2& components, const AvtParams& params,
                        AvtMlpCache* cache = nullptr);
Weights predict_weights(std::span<const Real> f_av, std::span<const Real> t_obj,
                        std::span<const Real> t_act, std::span<const Real> t_att,
                        std::span<const Real> t_audm, const AvtParams& params);

// l2_normalize(Σ w_i c_i). Throws DegenerateVectorError on a near-zero sum.
Vec compose(const Tensor2& components, const Weights& weights);

struct ComposedQuery {
  Vec f_avt;
  Weights weights{};  // effective weights, masked components are 0
};

struct AvtCache {
  Tensor2 components;
  AvtMlpCache mlp;
  ComponentMask mask{};
  bool fixed = false;
  Weights effective{};
  Vec sum;
  Vec f_avt;
};

// Predicted weights with missing (zero) components and any component
// cleared in `keep` forced to 0. With `fixed_average` the MLP is bypassed
// and every kept component gets 0.5.
ComposedQuery avt_fuse(const Tensor2& components, const AvtParams& params,
                       const ComponentMask& keep = kAllComponents, bool fixed_average = false,
                       AvtCache* cache = nullptr);

// Returns dL/dcomponents (5×D) and accumulates MLP gradients.
Tensor2 avt_backward(const AvtCache& cache, const AvtParams& params,
                     std::span<const Real> d_f_avt, AvtParams& grads);

}  // namespace cova
