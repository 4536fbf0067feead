#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "wntk/activation.hpp"
#include "wntk/analytic_kernels.hpp"
#include "wntk/types.hpp"

namespace wntk {

enum class Parameterization : std::uint8_t {
  // Unit-variance weights, explicit 1/sqrt(fan_in) factor in the forward pass.
  ntk = 0,
  // Weights drawn with variance sigma_w^2 / fan_in, no forward scaling.
  standard = 1,
};

const char* to_string(Parameterization p);
Parameterization parameterization_from_name(const std::string& name);

// Finite-width, bias-free fully connected network with scalar output.
// widths = (d0, d1, ..., dL), dL = 1; weights[l-1] is d_l x d_{l-1}.
struct Mlp {
  std::vector<std::size_t> widths;
  std::vector<Matrix> weights;
  Parameterization parameterization = Parameterization::ntk;
  ActivationKind activation = ActivationKind::relu();
  double output_scale = 1.0;  // kappa; multiplies the final output only

  std::size_t depth() const noexcept { return weights.size(); }
  std::size_t parameter_count() const noexcept;
  // Forward multiplier of layer l (1-based): 1/sqrt(d_{l-1}) in ntk mode, else 1.
  double layer_scale(std::size_t layer) const;
  // Hidden width used by width-scaled rates (d_1; equals d for equal-width nets).
  std::size_t hidden_width() const noexcept { return widths.size() > 2 ? widths[1] : widths[0]; }

  void validate() const;
};

struct InitOptions {
  Parameterization parameterization = Parameterization::ntk;
  ActivationKind activation = ActivationKind::relu();
  double output_scale = 1.0;
  double sigma_w = 1.0;  // standard parameterization only
};

// Deterministic given seed.
Mlp init_mlp(std::vector<std::size_t> widths, const InitOptions& options, std::uint64_t seed);
// Convenience for equal hidden widths: (d0, d, ..., d, 1) with `depth` layers.
std::vector<std::size_t> equal_widths(std::size_t input_dim, std::size_t width, std::size_t depth);

// Network outputs, n x 1.
Vector forward(const Mlp& m, const Matrix& x);

// Per-layer quantities from one forward/backward sweep over a batch. For sample i and
// layer l, d out_i / d W^(l) = scale_l * delta[l-1].row(i)^T * inputs[l-1].row(i).
struct Backprop {
  std::vector<Matrix> inputs;  // layer inputs g_{l-1}: n x d_{l-1} (x itself for l = 1)
  std::vector<Matrix> deltas;  // d out / d preactivation of layer l: n x d_l (includes kappa)
  std::vector<double> scales;  // forward multiplier of each layer
  Vector output;               // n
};

Backprop backprop(const Mlp& m, const Matrix& x);

struct LayerSpan {
  std::size_t layer = 0;  // 1-based
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive
};

// Dense n x P Jacobian of the output w.r.t. all weights (row-major within each W).
struct JacobianMatrix {
  Matrix values;
  std::vector<LayerSpan> layer_spans;
};

JacobianMatrix jacobian(const Mlp& m, const Matrix& x);

LayerKernelStack empirical_layer_kernels(const JacobianMatrix& j1, const JacobianMatrix& j2);
Matrix empirical_wntk(const JacobianMatrix& j1, const JacobianMatrix& j2, const LayerWeights& w);

// Same kernels from the outer-product structure of the per-layer gradients, without
// forming the n x P Jacobian:
//   Theta_l(i, j) = scale_l^2 (delta_l(i) . delta_l(j)) (g_{l-1}(i) . g_{l-1}(j)).
LayerKernelStack empirical_layer_kernels(const Backprop& b1, const Backprop& b2);
LayerKernelStack empirical_layer_kernels(const Mlp& m, const Matrix& x1, const Matrix& x2);

// eta * a_l per layer, a constant within each layer's block.
struct PerParameterRates {
  LayerWeights layer_rates;
  double base_rate = 1.0;

  double a_max() const noexcept { return layer_rates.max(); }
  void validate(std::size_t depth) const;
};

// Squared loss 0.5 * sum (f - y)^2.
double squared_loss(const Vector& output, const Vector& y);

// One full-batch step theta <- theta - eta (a (.) grad L). Throws NumericalDivergence
// on a non-finite loss or gradient.
Mlp adjusted_gd_step(const Mlp& m, const Matrix& x, const Vector& y, const PerParameterRates& rates);

struct TrainResult {
  Mlp network;
  std::vector<double> loss_trace;  // loss before each step, then the final loss
  std::size_t steps_taken = 0;
};

// Runs up to `steps` adjusted GD steps, stopping once the loss is <= stop_loss.
// A non-finite stop_loss disables early stopping.
TrainResult train_adjusted_gd(Mlp m, const Matrix& x, const Vector& y, const PerParameterRates& rates,
                              std::size_t steps,
                              double stop_loss = std::numeric_limits<double>::infinity());

struct PretrainConfig {
  double rate = 1e-2;
  double threshold = 0.9;
  std::size_t max_epochs = 200;
};

struct PretrainResult {
  Mlp network;
  std::size_t epochs = 0;
  double validation_accuracy = 0.0;
  bool threshold_reached = false;  // false means ThresholdUnreachable: best-so-far returned
};

// Binary pretraining on +-1 targets; accuracy is sign agreement on the validation rows.
PretrainResult pretrain_to_threshold(const Mlp& m, const Matrix& x, const Vector& y,
                                     const std::vector<std::size_t>& train_rows,
                                     const std::vector<std::size_t>& val_rows,
                                     const PretrainConfig& cfg);

}  // namespace wntk
