#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wntk/activation.hpp"
#include "wntk/types.hpp"

namespace wntk {

// Depth-L fully connected network with scalar output, as seen by the analytic
// (infinite-width) kernels. Only the input dimension, depth and activation matter.
struct NetworkShape {
  std::size_t input_dim = 1;
  std::size_t depth = 1;
  ActivationKind activation = ActivationKind::relu();
  // Multiplier on the first-layer covariance X1 X2^T / d0 (unit parameter variance = 1).
  double input_variance = 1.0;
  // Nodes per dimension for non-ReLU moments.
  int quadrature_order = 64;

  void validate() const;
};

// Second-moment description of a pair of centred Gaussians (u, v):
// Var u = c1^2, Var v = c2^2, Corr(u, v) = lambda.
struct BivariateMoment {
  double c1 = 1.0;
  double c2 = 1.0;
  double lambda = 0.0;
};

// E[relu(u) relu(v)]. Expects |lambda| <= 1 (clamped by the caller).
double relu_moment(const BivariateMoment& m);
// E[relu'(u) relu'(v)]; independent of c1, c2.
double relu_dot_moment(const BivariateMoment& m);

struct MomentPair {
  double value = 0.0;       // E[sigma(u) sigma(v)]
  double derivative = 0.0;  // E[sigma'(u) sigma'(v)]
};

// Numerical bivariate moments. Smooth activations use a tensor Gauss-Hermite rule on
// whitened coordinates; ReLU uses polar Gauss-Legendre panels split at its kink lines
// so it converges to the closed forms. Throws ConfigError for order < 8 or |lambda| > 1.
MomentPair quadrature_moment(const BivariateMoment& m, const ActivationKind& act, int order);

// Sigma^(l) and Sigma-dot^(l) Gram matrices between two sample sets (1-based layers).
class SigmaStack {
 public:
  SigmaStack(NetworkShape shape, std::vector<Matrix> sigma, std::vector<Matrix> sigma_dot);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t depth() const noexcept { return sigma_.size(); }
  const Matrix& sigma(std::size_t layer) const;      // layer in [1, L]
  const Matrix& sigma_dot(std::size_t layer) const;  // layer in [2, L]

 private:
  NetworkShape shape_;
  std::vector<Matrix> sigma_;
  std::vector<Matrix> sigma_dot_;  // index 0 (layer 1) is an empty placeholder
};

// Per-layer kernels Theta_l whose sum is the NTK (1-based layers).
class LayerKernelStack {
 public:
  LayerKernelStack() = default;
  explicit LayerKernelStack(std::vector<Matrix> theta);

  std::size_t depth() const noexcept { return theta_.size(); }
  Eigen::Index rows() const noexcept { return theta_.empty() ? 0 : theta_.front().rows(); }
  Eigen::Index cols() const noexcept { return theta_.empty() ? 0 : theta_.front().cols(); }
  const Matrix& operator[](std::size_t layer) const;  // layer in [1, L]
  const std::vector<Matrix>& layers() const noexcept { return theta_; }

  Matrix sum() const;
  // Restrict every layer kernel to the given rows and columns.
  LayerKernelStack select(const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols) const;

 private:
  std::vector<Matrix> theta_;
};

// Layer-wise weights a_l (the layer means mu_l of the element-wise weight law).
class LayerWeights {
 public:
  LayerWeights() = default;
  explicit LayerWeights(std::vector<double> values);
  static LayerWeights ones(std::size_t depth) { return LayerWeights(std::vector<double>(depth, 1.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }  // 0-based
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  Vector as_vector() const;

  // Negative weights are legal but make the weighted kernel possibly indefinite.
  bool has_negative() const noexcept;
  double max() const noexcept;

  bool operator==(const LayerWeights&) const = default;

 private:
  std::vector<double> values_;
};

// Sigma recursion. Throws ZeroNormInput when a self-covariance needed for the
// normalised correlation is zero.
SigmaStack sigma_recursion(const Matrix& x1, const Matrix& x2, const NetworkShape& shape);
// Same-set variant; every matrix comes out exactly symmetric.
SigmaStack sigma_recursion(const Matrix& x, const NetworkShape& shape);

Matrix ntk_from_stack(const SigmaStack& s);
LayerKernelStack layer_kernels_from_stack(const SigmaStack& s);
Matrix wntk_weighted_sum(const LayerKernelStack& k, const LayerWeights& w);
Matrix wntk_recursion(const SigmaStack& s, const LayerWeights& mu);

}  // namespace wntk
