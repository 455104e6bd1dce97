#pragma once

#include <cstdint>
#include <vector>

#include "cova/grad_check.hpp"

namespace cova {

// Finite-difference checks of every trainable module on small random
// problems (inputs drawn well inside the unsaturated range).
GradReport check_resampler(std::uint64_t seed, Real tolerance);
GradReport check_resampler_silent(std::uint64_t seed, Real tolerance);
GradReport check_gft(std::uint64_t seed, std::size_t layers, Real tolerance);
GradReport check_avt(std::uint64_t seed, Real tolerance);
GradReport check_loss_through_tau(std::uint64_t seed, Real tolerance);
// Whole model: batch of triplets → composed queries and targets → loss.
GradReport check_end_to_end(std::uint64_t seed, Real tolerance);

// All module checks for each seed (end-to-end excluded).
std::vector<GradReport> gradcheck_suite(const std::vector<std::uint64_t>& seeds, Real tolerance);

}  // namespace cova
