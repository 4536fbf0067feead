#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wntk/analytic_kernels.hpp"
#include "wntk/types.hpp"

namespace wntk {

// One train/validation instance of the weight-learning objective. `train` is the
// layer stack on train x train, `cross` on validation x train (rows = validation).
struct WeightProblem {
  LayerKernelStack train;
  LayerKernelStack cross;
  Matrix y_train;  // n_T x c
  Matrix y_val;    // n_V x c
  double ridge = 0.1;

  void validate() const;
};

// Validation predictions f*(X_V) and their derivatives with respect to each a_l:
//   d f*/d a_l = Theta_V,l alpha - A_V (A + ridge I)^{-1} Theta_l alpha
// with one factorisation of A shared across layers.
struct WeightGradient {
  Matrix prediction;              // n_V x c
  std::vector<Matrix> derivative; // per layer, n_V x c
};

WeightGradient layer_weight_gradient(const WeightProblem& p, const LayerWeights& w);

// Squared validation error ||f*(X_V) - Y_V||_F^2.
double validation_loss(const WeightProblem& p, const LayerWeights& w);
// Delta_l = 2 <f*(X_V) - Y_V, d f*/d a_l>, the gradient of validation_loss.
Vector validation_loss_gradient(const WeightProblem& p, const LayerWeights& w);
// Central differences of validation_loss through the full fit/predict pipeline.
// Step h must lie in [1e-7, 1e-3].
Vector finite_diff_weight_gradient(const WeightProblem& p, const LayerWeights& w, double h);

struct WeightLearnerConfig {
  LayerWeights init;
  double eta_w = 0.01;
  double ratio = 0.2;  // validation fraction r
  double ridge = 0.1;
  std::size_t max_iters = 50;
  double tol = 1e-5;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  bool resample_each_iter = true;

  void validate(std::size_t n, std::size_t depth) const;
};

struct WeightIteration {
  LayerWeights weights;  // after the update
  double val_loss = 0.0; // at the pre-update weights
  Vector gradient;
};

struct WeightTrace {
  std::vector<WeightIteration> iterations;
  LayerWeights final_weights;
  bool step_halved = false;  // a SingularKernel forced eta_w / 2
  bool aborted = false;      // a second SingularKernel ended the run

  // "iteration,w1..wL,val_loss,grad_norm", one record per line with a header.
  void write_records(std::ostream& out) const;
};

// Gradient descent on layer-wise weights. `stack` holds the layer kernels over all n
// samples; each iteration draws a train/validation split (resampled per iteration
// unless disabled), rebuilds the WNTK estimator and updates every a_l.
WeightTrace algorithm1_update_loop(const LayerKernelStack& stack, const Matrix& y, const WeightLearnerConfig& cfg);

// Problem for one explicit split of the full stack.
WeightProblem make_weight_problem(const LayerKernelStack& stack, const Matrix& y,
                                  const std::vector<std::size_t>& train, const std::vector<std::size_t>& val,
                                  double ridge);

}  // namespace wntk
