#pragma once

#include <functional>
#include <string>

namespace wntk {

// Pointwise nonlinearity. ReLU is special-cased everywhere it matters (closed-form
// moments, subgradient 0 at the kink); every other activation is "smooth" and must
// satisfy: |sigma(0)| finite, sigma' bounded and Lipschitz.
class ActivationKind {
 public:
  using Fn = std::function<double(double)>;

  static ActivationKind relu();
  static ActivationKind smooth(std::string name, Fn value, Fn derivative);

  // Built-in smooth activations.
  static ActivationKind tanh();
  static ActivationKind identity();
  static ActivationKind erf();

  // relu | tanh | identity | erf
  static ActivationKind from_name(const std::string& name);

  bool is_relu() const noexcept { return relu_; }
  const std::string& name() const noexcept { return name_; }

  double operator()(double u) const { return relu_ ? (u > 0.0 ? u : 0.0) : value_(u); }
  double derivative(double u) const { return relu_ ? (u > 0.0 ? 1.0 : 0.0) : derivative_(u); }

 private:
  ActivationKind(bool relu, std::string name, Fn value, Fn derivative)
      : relu_(relu), name_(std::move(name)), value_(std::move(value)),
        derivative_(std::move(derivative)) {}

  bool relu_;
  std::string name_;
  Fn value_;
  Fn derivative_;
};

}  // namespace wntk
