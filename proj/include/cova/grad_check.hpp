#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cova/numerics.hpp"

namespace cova {

// A trainable tensor under test: `value` is perturbed in place during the
// check and restored afterwards; `analytic` holds dObjective/dValue.
struct GradSlot {
  std::string name;
  Tensor2* value;
  const Tensor2* analytic;
};

struct GradReport {
  std::string op;
  Real max_relative_error = 0.0;
  std::vector<std::pair<std::string, Real>> per_parameter;
  Real tolerance = 0.0;

  bool passed() const noexcept { return max_relative_error < tolerance; }
};

inline constexpr Real kGradCheckStep = 1e-4;

// |a − n| / max(1, |a|, |n|)
Real gradient_relative_error(Real analytic, Real numeric) noexcept;

// Central finite differences over every scalar of every slot. The objective
// must be a pure function of the slot values. Throws NumericsError if any
// analytic gradient entry is non-finite.
GradReport grad_check(std::string op, const std::function<Real()>& objective,
                      std::span<const GradSlot> slots, Real tolerance,
                      Real step = kGradCheckStep);

}  // namespace cova
