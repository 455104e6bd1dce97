#include "cova/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "cova/errors.hpp"
#include "cova/objective.hpp"
#include "cova/parallel.hpp"
#include "cova/params.hpp"

namespace cova {

namespace {

bool is_trained(const std::string& name, const TrainConfig& config) {
  return config.train_resampler || name.rfind("resampler.", 0) != 0;
}

}  // namespace

std::vector<std::string> trained_parameter_names(const FusionParams& params,
                                                 const TrainConfig& config) {
  std::vector<std::string> names;
  for (const auto& [name, t] : named_tensors(params)) {
    if (is_trained(name, config)) names.push_back(name);
  }
  return names;
}

Adam::Adam(const FusionParams& shape, const TrainConfig& config)
    : config_(config), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

void Adam::step(FusionParams& params, const FusionParams& grads) {
  ++t_;
  const Real c1 = 1.0 - std::pow(config_.beta1, static_cast<Real>(t_));
  const Real c2 = 1.0 - std::pow(config_.beta2, static_cast<Real>(t_));
  auto p = named_tensors(params);
  auto g = named_tensors(grads);
  auto m = named_tensors(m_);
  auto v = named_tensors(v_);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!is_trained(p[k].first, config_)) continue;
    auto pv = p[k].second->values();
    auto gv = g[k].second->values();
    auto mv = m[k].second->values();
    auto vv = v[k].second->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = config_.beta1 * mv[i] + (1.0 - config_.beta1) * gv[i];
      vv[i] = config_.beta2 * vv[i] + (1.0 - config_.beta2) * gv[i] * gv[i];
      const Real m_hat = mv[i] / c1;
      const Real v_hat = vv[i] / c2;
      pv[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.adam_eps);
    }
  }
}

Real clip_global_norm(FusionParams& grads, Real max_norm) {
  Real sq = 0.0;
  FusionParams::visit(grads, [&](const std::string&, Tensor2& t) {
    for (Real v : t.values()) sq += v * v;
  });
  const Real total = std::sqrt(sq);
  if (total > max_norm && total > 0.0) {
    const Real s = max_norm / total;
    FusionParams::visit(grads, [&](const std::string&, Tensor2& t) { scale_in_place(t, s); });
  }
  return total;
}

BatchResult batch_gradients(const Dataset& data, std::span<const std::size_t> batch,
                            const FusionParams& params, const FusionConfig& model,
                            const TrainConfig& config) {
  const std::size_t b = batch.size();
  if (b < 2) throw BatchTooSmallError("batch of " + std::to_string(b) + " has no negatives");
  std::vector<QueryTape> qtapes(b);
  std::vector<TargetTape> ttapes(b);
  Tensor2 queries(b, model.width);
  Tensor2 targets(b, model.width);
  parallel_for(b, config.threads, [&](std::size_t i) {
    const TripletRecord& rec = data.triplets[batch[i]];
    ComposedQuery q = encode_query(rec, params, model, kAllComponents, &qtapes[i]);
    std::copy(q.f_avt.begin(), q.f_avt.end(), queries.row(i).begin());
    Vec t = encode_target(data.gallery[rec.target_index], params, model, &ttapes[i]);
    std::copy(t.begin(), t.end(), targets.row(i).begin());
  });

  ContrastiveGrads cg = contrastive_loss(queries, targets, params.log_tau(0, 0));
  BatchResult out{cg.loss, zeros_like(params)};
  if (!std::isfinite(cg.loss)) return out;
  for (std::size_t i = 0; i < b; ++i) {
    encode_query_backward(qtapes[i], params, model, cg.d_queries.row(i), out.grads,
                          config.train_resampler);
    encode_target_backward(ttapes[i], params, model, cg.d_targets.row(i), out.grads,
                           config.train_resampler);
  }
  out.grads.log_tau(0, 0) += cg.d_log_tau;
  return out;
}

TrainResult train(const Dataset& data, const FusionConfig& model, const TrainConfig& config,
                  const Dataset* eval_data, std::ostream* log_jsonl) {
  return train(data, model, config, init_fusion(model, config.seed), eval_data, log_jsonl);
}

TrainResult train(const Dataset& data, const FusionConfig& model, const TrainConfig& config,
                  FusionParams initial, const Dataset* eval_data, std::ostream* log_jsonl) {
  if (config.batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (!(config.learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (data.triplets.size() < config.batch_size) {
    throw ConfigError("dataset has " + std::to_string(data.triplets.size()) +
                      " triplets, fewer than one batch of " + std::to_string(config.batch_size));
  }
  if (data.dims.width != model.width || data.dims.audio_width != model.audio_width) {
    throw ConfigError("dataset dims D=" + std::to_string(data.dims.width) + ", D_a=" +
                      std::to_string(data.dims.audio_width) + " do not match model D=" +
                      std::to_string(model.width) + ", D_a=" + std::to_string(model.audio_width));
  }
  const auto start = std::chrono::steady_clock::now();
  TrainResult result{std::move(initial), {}, 0};
  Adam adam(result.params, config);
  Rng shuffle_rng = make_rng(config.seed, 21);
  std::vector<std::size_t> order(data.triplets.size());
  const std::size_t batches = order.size() / config.batch_size;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Real epoch_loss = 0.0;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      std::span<const std::size_t> batch(order.data() + bi * config.batch_size, config.batch_size);
      auto fail = [&](const std::string& what) {
        std::string ids;
        for (std::size_t i : batch) ids += (ids.empty() ? "" : ",") + data.triplets[i].id;
        return TrainingError(what + " at step " + std::to_string(result.steps) + " (epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(bi) + ", ids " +
                             ids + ")");
      };
      BatchResult br;
      try {
        br = batch_gradients(data, batch, result.params, model, config);
      } catch (const DegenerateVectorError& e) {
        throw fail(e.what());
      } catch (const NumericsError& e) {
        throw fail(e.what());
      }
      if (!std::isfinite(br.loss)) throw fail("non-finite loss");
      if (config.clip_norm) clip_global_norm(br.grads, *config.clip_norm);
      adam.step(result.params, br.grads);
      ++result.steps;
      result.log.step_losses.push_back(br.loss);
      epoch_loss += br.loss;
      if (log_jsonl != nullptr) {
        nlohmann::ordered_json j;
        j["step"] = result.steps;
        j["epoch"] = epoch;
        j["loss"] = br.loss;
        j["tau"] = result.params.tau();
        *log_jsonl << j.dump() << "\n";
      }
    }
    EpochRecord rec{epoch, batches > 0 ? epoch_loss / static_cast<Real>(batches) : 0.0, {}};
    if (eval_data != nullptr && config.eval_every > 0 && (epoch + 1) % config.eval_every == 0) {
      EvalOptions opts;
      opts.threads = config.threads;
      rec.eval = evaluate(eval_data->triplets, eval_data->gallery, result.params, model, opts).metrics;
    }
    if (log_jsonl != nullptr) {
      nlohmann::ordered_json j;
      j["epoch"] = epoch;
      j["mean_loss"] = rec.mean_loss;
      if (rec.eval) {
        j["R@1"] = rec.eval->r1;
        j["R@5"] = rec.eval->r5;
        j["R@10"] = rec.eval->r10;
        j["MnR"] = rec.eval->mean_rank;
      }
      *log_jsonl << j.dump() << "\n";
    }
    result.log.epochs.push_back(rec);
  }
  result.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace cova
