#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cova {

using Real = double;
using Vec = std::vector<Real>;

// Floor below which a vector is treated as degenerate (zero) by
// normalization and cosine similarity.
inline constexpr Real kNormEps = 1e-12;

// Dense row-major matrix. Vectors that need to live next to matrices
// (biases, gains) are stored as 1×n.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, Real fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<Real> values);

  static Tensor2 from_rows(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor2 row_vector(std::span<const Real> values);
  static Tensor2 identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }

  void fill(Real v);
  bool same_shape(const Tensor2& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

// Products. All kernels use a fixed loop order, so results are
// bit-reproducible for a given build.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// aᵀ·b without materializing the transpose.
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
// a·bᵀ without materializing the transpose.
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
Tensor2 transpose(const Tensor2& a);

void add_in_place(Tensor2& dst, const Tensor2& src);
void add_scaled_in_place(Tensor2& dst, const Tensor2& src, Real scale);
void add_row_broadcast(Tensor2& dst, const Tensor2& row);  // row is 1×cols
void scale_in_place(Tensor2& dst, Real s);
Tensor2 hadamard(const Tensor2& a, const Tensor2& b);

// Column sums / means as 1×cols.
Tensor2 column_sum(const Tensor2& a);
Vec column_mean(const Tensor2& a);

Tensor2 softmax_rows(const Tensor2& m);
// Given P = softmax_rows(S) and dL/dP, returns dL/dS.
Tensor2 softmax_rows_backward(const Tensor2& p, const Tensor2& dp);

Real sigmoid(Real x) noexcept;
Real gelu(Real x) noexcept;
Real gelu_derivative(Real x) noexcept;

Real dot(std::span<const Real> u, std::span<const Real> v);
Real norm(std::span<const Real> v);
Vec l2_normalize(std::span<const Real> v, Real eps = kNormEps);
// dL/dx for y = x/‖x‖, given y and dL/dy.
Vec l2_normalize_backward(std::span<const Real> x, std::span<const Real> y,
                          std::span<const Real> dy);
Real cosine_similarity(std::span<const Real> u, std::span<const Real> v,
                       Real eps = kNormEps);

// Per-row layer normalization with learned gain and bias (both 1×cols).
struct LayerNormCache {
  Tensor2 normalized;  // (x − μ)/σ
  Vec inv_std;
};
inline constexpr Real kLayerNormEps = 1e-5;
Tensor2 layer_norm(const Tensor2& x, const Tensor2& gain, const Tensor2& bias,
                   LayerNormCache* cache = nullptr);
// Returns dL/dx and accumulates parameter gradients.
Tensor2 layer_norm_backward(const LayerNormCache& cache, const Tensor2& gain,
                            const Tensor2& dy, Tensor2& d_gain, Tensor2& d_bias);

}  // namespace cova
