#include "cova/objective.hpp"

#include <algorithm>
#include <cmath>

#include "cova/errors.hpp"

namespace cova {

namespace {

// log Σ exp over row i (by_row) or column i.
Real log_sum_exp(const Tensor2& s, std::size_t i, bool by_row) {
  const std::size_t n = by_row ? s.cols() : s.rows();
  auto at = [&](std::size_t j) { return by_row ? s(i, j) : s(j, i); };
  Real m = at(0);
  for (std::size_t j = 1; j < n; ++j) m = std::max(m, at(j));
  Real acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += std::exp(at(j) - m);
  return m + std::log(acc);
}

void require_square(const Tensor2& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw InputError("info_nce: score matrix must be square and non-empty, got " +
                     std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
}

}  // namespace

Tensor2 similarity_matrix(const Tensor2& queries, const Tensor2& targets, Real tau) {
  if (queries.rows() < 2) {
    throw BatchTooSmallError("similarity_matrix: batch of " + std::to_string(queries.rows()) +
                             " has no negatives");
  }
  if (!queries.same_shape(targets)) {
    throw InputError("similarity_matrix: query and target batches differ in shape");
  }
  if (!(tau > 0.0)) throw InputError("similarity_matrix: temperature must be positive");
  Tensor2 s = matmul_nt(queries, targets);
  scale_in_place(s, 1.0 / tau);
  return s;
}

Real info_nce(const Tensor2& scores) {
  require_square(scores);
  const std::size_t b = scores.rows();
  Real total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    total += log_sum_exp(scores, i, true) - scores(i, i);
    total += log_sum_exp(scores, i, false) - scores(i, i);
  }
  return total / (2.0 * static_cast<Real>(b));
}

Tensor2 info_nce_grad(const Tensor2& scores) {
  require_square(scores);
  const std::size_t b = scores.rows();
  Tensor2 row_p = softmax_rows(scores);
  Tensor2 col_p = transpose(softmax_rows(transpose(scores)));
  const Real inv = 1.0 / (2.0 * static_cast<Real>(b));
  Tensor2 d(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const Real eye = i == j ? 1.0 : 0.0;
      d(i, j) = inv * ((row_p(i, j) - eye) + (col_p(i, j) - eye));
    }
  }
  return d;
}

ContrastiveGrads contrastive_loss(const Tensor2& queries, const Tensor2& targets,
                                  Real log_tau) {
  const Real tau = std::exp(log_tau);
  Tensor2 s = similarity_matrix(queries, targets, tau);
  ContrastiveGrads out;
  out.loss = info_nce(s);
  Tensor2 ds = info_nce_grad(s);
  for (std::size_t k = 0; k < ds.size(); ++k) out.d_log_tau -= ds.values()[k] * s.values()[k];
  out.d_queries = matmul(ds, targets);
  scale_in_place(out.d_queries, 1.0 / tau);
  out.d_targets = matmul_tn(ds, queries);
  scale_in_place(out.d_targets, 1.0 / tau);
  return out;
}

}  // namespace cova
