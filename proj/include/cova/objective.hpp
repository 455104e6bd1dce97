#pragma once

#include "cova/numerics.hpp"

namespace cova {

inline constexpr Real kInitialTemperature = 0.07;

// S[i][j] = q_i·t_j / τ. Throws BatchTooSmallError when B < 2.
Tensor2 similarity_matrix(const Tensor2& queries, const Tensor2& targets, Real tau);

// Symmetric InfoNCE: mean over query→target rows and target→query columns
// of −log softmax at the diagonal.
Real info_nce(const Tensor2& scores);

// dLoss/dS.
Tensor2 info_nce_grad(const Tensor2& scores);

struct ContrastiveGrads {
  Real loss = 0.0;
  Tensor2 d_queries;
  Tensor2 d_targets;
  Real d_log_tau = 0.0;
};

// Loss and gradients with τ = exp(log_tau).
ContrastiveGrads contrastive_loss(const Tensor2& queries, const Tensor2& targets,
                                  Real log_tau);

}  // namespace cova
