#pragma once

#include "config.hpp"

namespace wntk::cli {

int cmd_kernel(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_learn_weights(const RunConfig& cfg);
int cmd_verify_stability(const RunConfig& cfg);
int cmd_verify_lazy(const RunConfig& cfg);
int cmd_verify_equivalence(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);

}  // namespace wntk::cli
