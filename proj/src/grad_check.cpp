#include "cova/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cova/errors.hpp"

namespace cova {

Real gradient_relative_error(Real analytic, Real numeric) noexcept {
  const Real denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

GradReport grad_check(std::string op, const std::function<Real()>& objective,
                      std::span<const GradSlot> slots, Real tolerance, Real step) {
  GradReport report;
  report.op = std::move(op);
  report.tolerance = tolerance;

  for (const GradSlot& slot : slots) {
    if (!slot.value->same_shape(*slot.analytic)) {
      throw InputError("grad_check: analytic gradient shape differs for " + slot.name);
    }
    if (!slot.analytic->all_finite()) {
      throw NumericsError("grad_check: non-finite analytic gradient for " + slot.name);
    }
    Real worst = 0.0;
    auto values = slot.value->values();
    auto analytic = slot.analytic->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Real saved = values[i];
      values[i] = saved + step;
      const Real plus = objective();
      values[i] = saved - step;
      const Real minus = objective();
      values[i] = saved;
      const Real numeric = (plus - minus) / (2.0 * step);
      worst = std::max(worst, gradient_relative_error(analytic[i], numeric));
    }
    report.per_parameter.emplace_back(slot.name, worst);
    report.max_relative_error = std::max(report.max_relative_error, worst);
  }
  return report;
}

}  // namespace cova
