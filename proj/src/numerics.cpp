#include "cova/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cova/errors.hpp"

namespace cova {

namespace {

std::string shape_str(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InputError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}

}  // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<Real> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw InputError("Tensor2: " + std::to_string(data_.size()) +
                     " values for shape " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<Real>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Real> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InputError("Tensor2::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor2(r, c, std::move(values));
}

Tensor2 Tensor2::row_vector(std::span<const Real> values) {
  return Tensor2(1, values.size(), std::vector<Real>(values.begin(), values.end()));
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor2::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor2::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw InputError("matmul: dimension mismatch " + shape_str(a) + " x " + shape_str(b));
  }
  Tensor2 c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real* out = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real aik = a(i, k);
      if (aik == 0.0) continue;
      const Real* brow = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows()) {
    throw InputError("matmul_tn: dimension mismatch " + shape_str(a) + "ᵀ x " +
                     shape_str(b));
  }
  Tensor2 c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Real* brow = b.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real aik = a(i, k);
      if (aik == 0.0) continue;
      Real* out = c.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.cols()) {
    throw InputError("matmul_nt: dimension mismatch " + shape_str(a) + " x " +
                     shape_str(b) + "ᵀ");
  }
  Tensor2 c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  }
  return c;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void add_in_place(Tensor2& dst, const Tensor2& src) {
  require_same_shape(dst, src, "add_in_place");
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void add_scaled_in_place(Tensor2& dst, const Tensor2& src, Real scale) {
  require_same_shape(dst, src, "add_scaled_in_place");
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void add_row_broadcast(Tensor2& dst, const Tensor2& row) {
  if (row.rows() != 1 || row.cols() != dst.cols()) {
    throw InputError("add_row_broadcast: expected 1x" + std::to_string(dst.cols()) +
                     ", got " + shape_str(row));
  }
  for (std::size_t i = 0; i < dst.rows(); ++i) {
    auto r = dst.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += row(0, j);
  }
}

void scale_in_place(Tensor2& dst, Real s) {
  for (Real& v : dst.values()) v *= s;
}

Tensor2 hadamard(const Tensor2& a, const Tensor2& b) {
  require_same_shape(a, b, "hadamard");
  Tensor2 c(a.rows(), a.cols());
  auto av = a.values();
  auto bv = b.values();
  auto cv = c.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = av[i] * bv[i];
  return c;
}

Tensor2 column_sum(const Tensor2& a) {
  Tensor2 s(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s(0, j) += r[j];
  }
  return s;
}

Vec column_mean(const Tensor2& a) {
  if (a.rows() == 0) throw EmptyInputError("column_mean: no rows");
  Vec m(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  }
  const Real inv = 1.0 / static_cast<Real>(a.rows());
  for (Real& v : m) v *= inv;
  return m;
}

Tensor2 softmax_rows(const Tensor2& m) {
  Tensor2 out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const Real mx = *std::max_element(in.begin(), in.end());
    Real total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    const Real inv = 1.0 / total;
    for (Real& v : o) v *= inv;
  }
  return out;
}

Tensor2 softmax_rows_backward(const Tensor2& p, const Tensor2& dp) {
  require_same_shape(p, dp, "softmax_rows_backward");
  Tensor2 ds(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const Real inner = dot(p.row(i), dp.row(i));
    for (std::size_t j = 0; j < p.cols(); ++j) ds(i, j) = p(i, j) * (dp(i, j) - inner);
  }
  return ds;
}

Real sigmoid(Real x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

Real gelu(Real x) noexcept { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

Real gelu_derivative(Real x) noexcept {
  const Real cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const Real pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Real dot(std::span<const Real> u, std::span<const Real> v) {
  if (u.size() != v.size()) {
    throw InputError("dot: length mismatch " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  Real s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

Real norm(std::span<const Real> v) { return std::sqrt(dot(v, v)); }

Vec l2_normalize(std::span<const Real> v, Real eps) {
  const Real n = norm(v);
  if (!(n > eps)) {
    throw DegenerateVectorError("l2_normalize: norm " + std::to_string(n) +
                                " is not above eps");
  }
  Vec out(v.begin(), v.end());
  for (Real& x : out) x /= n;
  return out;
}

Vec l2_normalize_backward(std::span<const Real> x, std::span<const Real> y,
                          std::span<const Real> dy) {
  const Real n = norm(x);
  const Real proj = dot(y, dy);
  Vec dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = (dy[i] - y[i] * proj) / n;
  return dx;
}

Real cosine_similarity(std::span<const Real> u, std::span<const Real> v, Real eps) {
  const Real nu = norm(u);
  const Real nv = norm(v);
  if (!(nu > eps) || !(nv > eps)) {
    throw DegenerateVectorError("cosine_similarity: zero-norm input");
  }
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

Tensor2 layer_norm(const Tensor2& x, const Tensor2& gain, const Tensor2& bias,
                   LayerNormCache* cache) {
  const std::size_t d = x.cols();
  if (gain.rows() != 1 || gain.cols() != d || !gain.same_shape(bias)) {
    throw InputError("layer_norm: gain/bias must be 1x" + std::to_string(d));
  }
  Tensor2 normalized(x.rows(), d);
  Vec inv_std(x.rows());
  Tensor2 y(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    Real mean = 0.0;
    for (Real v : r) mean += v;
    mean /= static_cast<Real>(d);
    Real var = 0.0;
    for (Real v : r) var += (v - mean) * (v - mean);
    var /= static_cast<Real>(d);
    inv_std[i] = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < d; ++j) {
      normalized(i, j) = (r[j] - mean) * inv_std[i];
      y(i, j) = gain(0, j) * normalized(i, j) + bias(0, j);
    }
  }
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor2 layer_norm_backward(const LayerNormCache& cache, const Tensor2& gain,
                            const Tensor2& dy, Tensor2& d_gain, Tensor2& d_bias) {
  const Tensor2& xhat = cache.normalized;
  require_same_shape(xhat, dy, "layer_norm_backward");
  const std::size_t d = xhat.cols();
  const Real inv_d = 1.0 / static_cast<Real>(d);
  Tensor2 dx(xhat.rows(), d);
  Vec dxhat(d);
  for (std::size_t i = 0; i < xhat.rows(); ++i) {
    Real sum_dxhat = 0.0;
    Real sum_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      d_gain(0, j) += dy(i, j) * xhat(i, j);
      d_bias(0, j) += dy(i, j);
      dxhat[j] = dy(i, j) * gain(0, j);
      sum_dxhat += dxhat[j];
      sum_dxhat_xhat += dxhat[j] * xhat(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) = cache.inv_std[i] *
                 (dxhat[j] - inv_d * sum_dxhat - xhat(i, j) * inv_d * sum_dxhat_xhat);
    }
  }
  return dx;
}

}  // namespace cova
