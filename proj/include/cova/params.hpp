#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cova/numerics.hpp"

namespace cova {

// Parameter structs expose `static void visit(Self&, Fn)` which calls
// fn(name, tensor) for every trainable tensor in a fixed order. The order
// is part of the checkpoint format.

template <class P>
P zeros_like(const P& params) {
  P z = params;
  P::visit(z, [](const std::string&, Tensor2& t) { t.fill(0.0); });
  return z;
}

template <class P>
std::vector<std::pair<std::string, Tensor2*>> named_tensors(P& params) {
  std::vector<std::pair<std::string, Tensor2*>> out;
  P::visit(params, [&](const std::string& name, Tensor2& t) { out.emplace_back(name, &t); });
  return out;
}

template <class P>
std::vector<std::pair<std::string, const Tensor2*>> named_tensors(const P& params) {
  std::vector<std::pair<std::string, const Tensor2*>> out;
  P::visit(params,
           [&](const std::string& name, const Tensor2& t) { out.emplace_back(name, &t); });
  return out;
}

template <class P>
std::size_t scalar_count(const P& params) {
  std::size_t n = 0;
  P::visit(params, [&](const std::string&, const Tensor2& t) { n += t.size(); });
  return n;
}

}  // namespace cova
