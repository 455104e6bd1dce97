#include "cova/attention.hpp"

#include "cova/errors.hpp"

namespace cova {

Tensor2 attend(const Tensor2& queries, const Tensor2& keys, const Tensor2& values, Real scale,
               AttentionCache* cache) {
  if (keys.rows() != values.rows()) {
    throw InputError("attend: key/value row counts differ");
  }
  Tensor2 scores = matmul_nt(queries, keys);
  scale_in_place(scores, scale);
  Tensor2 weights = softmax_rows(scores);
  Tensor2 context = matmul(weights, values);
  if (cache != nullptr) {
    cache->queries = queries;
    cache->keys = keys;
    cache->values = values;
    cache->weights = std::move(weights);
  }
  return context;
}

AttentionGrads attend_backward(const AttentionCache& cache, Real scale,
                               const Tensor2& d_context) {
  AttentionGrads g;
  Tensor2 d_weights = matmul_nt(d_context, cache.values);
  g.d_values = matmul_tn(cache.weights, d_context);
  Tensor2 d_scores = softmax_rows_backward(cache.weights, d_weights);
  scale_in_place(d_scores, scale);
  g.d_queries = matmul(d_scores, cache.keys);
  g.d_keys = matmul_tn(d_scores, cache.queries);
  return g;
}

}  // namespace cova
