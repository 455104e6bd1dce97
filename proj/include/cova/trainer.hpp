#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cova/dataset.hpp"
#include "cova/model.hpp"
#include "cova/retrieval.hpp"

namespace cova {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  Real learning_rate = 1e-4;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // epochs between evaluations, 0 = never
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real adam_eps = 1e-8;
  std::optional<Real> clip_norm;
  bool train_resampler = true;
  std::size_t threads = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;
  Real mean_loss = 0.0;
  std::optional<MetricsTable> eval;
};

struct TrainLog {
  std::vector<Real> step_losses;
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
};

struct TrainResult {
  FusionParams params;
  TrainLog log;
  std::uint64_t steps = 0;
};

// Names of the tensors the optimizer updates, in checkpoint order.
std::vector<std::string> trained_parameter_names(const FusionParams& params,
                                                 const TrainConfig& config);

// Adam with bias correction.
class Adam {
 public:
  Adam(const FusionParams& shape, const TrainConfig& config);
  void step(FusionParams& params, const FusionParams& grads);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  TrainConfig config_;
  FusionParams m_;
  FusionParams v_;
  std::uint64_t t_ = 0;
};

// Loss and gradients for one batch of triplet indices.
struct BatchResult {
  Real loss = 0.0;
  FusionParams grads;
};
BatchResult batch_gradients(const Dataset& data, std::span<const std::size_t> batch,
                            const FusionParams& params, const FusionConfig& model,
                            const TrainConfig& config);

// Scales grads so their global L2 norm is at most max_norm; returns the
// norm before clipping.
Real clip_global_norm(FusionParams& grads, Real max_norm);

// Parameters start from init_fusion(model, config.seed). `log_jsonl`, when
// given, receives one line per step and per epoch. `eval_data` is used
// every `eval_every` epochs.
TrainResult train(const Dataset& data, const FusionConfig& model, const TrainConfig& config,
                  const Dataset* eval_data = nullptr, std::ostream* log_jsonl = nullptr);
TrainResult train(const Dataset& data, const FusionConfig& model, const TrainConfig& config,
                  FusionParams initial, const Dataset* eval_data = nullptr,
                  std::ostream* log_jsonl = nullptr);

}  // namespace cova
