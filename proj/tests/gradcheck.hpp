#pragma once

#include <cstdint>
#include <string>

namespace testing_support {

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t below_floor = 0;  // both gradients under the relative-error floor
  double worst_rel = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0, worst_numeric = 0.0;
};

/// Compares analytic gradients of the 64-bit model (2 layers, 2 heads, dim 16,
/// vocab 64) with central differences (step 1e-5) on `n_params` parameters
/// drawn without replacement. rel = |a - n| / max(|a|, |n|, floor).
GradCheckResult gradient_check(std::uint64_t seed, std::size_t n_params, bool mask_context = false,
                               double init_std = 0.3, double floor = 1e-7);

}  // namespace testing_support
