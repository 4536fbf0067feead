#pragma once

#include <cstdint>
#include <vector>

#include "wntk/analytic_kernels.hpp"

namespace wntk {

// Monte-Carlo estimates of the infinite-width kernels from random NTK-parameterised
// networks of the given hidden width (kappa = 1). Means and standard errors are over
// independent trials.
struct MonteCarloKernels {
  Matrix ntk_mean;
  Matrix ntk_stderr;
  std::vector<Matrix> sigma_mean;      // layer l at index l-1
  std::vector<Matrix> sigma_dot_mean;  // index 0 (layer 1) left empty
  LayerKernelStack layer_mean;
};

// Deterministic given seed. Requires width >= 64 and trials >= 1.
MonteCarloKernels mc_kernel_oracle(const Matrix& x, const NetworkShape& shape, std::size_t width,
                                   std::size_t trials, std::uint64_t seed);

}  // namespace wntk
