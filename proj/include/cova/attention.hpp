#pragma once

#include "cova/numerics.hpp"

namespace cova {

// Single-head scaled dot-product attention over already-projected
// queries (n×d), keys (m×d) and values (m×d). No positional terms, so the
// result is invariant to the order of key/value rows.
struct AttentionCache {
  Tensor2 queries;
  Tensor2 keys;
  Tensor2 values;
  Tensor2 weights;  // n×m, rows sum to 1
};

Tensor2 attend(const Tensor2& queries, const Tensor2& keys, const Tensor2& values, Real scale,
               AttentionCache* cache = nullptr);

struct AttentionGrads {
  Tensor2 d_queries;
  Tensor2 d_keys;
  Tensor2 d_values;
};

AttentionGrads attend_backward(const AttentionCache& cache, Real scale,
                               const Tensor2& d_context);

}  // namespace cova
