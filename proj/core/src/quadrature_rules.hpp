#pragma once

#include <vector>

#include "wntk/analytic_kernels.hpp"

namespace wntk::detail {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Physicists' Gauss-Hermite rule for weight exp(-x^2) on the real line.
GaussRule gauss_hermite(int order);
// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int order);

// Reusable bivariate-moment integrator for one activation and one order.
class MomentIntegrator {
 public:
  MomentIntegrator(ActivationKind act, int order);

  MomentPair operator()(const BivariateMoment& m) const;

 private:
  MomentPair smooth(const BivariateMoment& m) const;
  MomentPair relu_panels(const BivariateMoment& m) const;

  ActivationKind act_;
  GaussRule hermite_;
  GaussRule legendre_;
};

}  // namespace wntk::detail
