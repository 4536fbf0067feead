#include "wntk/analytic_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "quadrature_rules.hpp"
#include "wntk/errors.hpp"

namespace wntk {

void NetworkShape::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (depth < 1) throw ConfigError("depth must be >= 1");
  if (!(input_variance > 0.0)) throw ConfigError("input_variance must be positive");
  if (!activation.is_relu() && quadrature_order < 8) throw ConfigError("quadrature_order must be >= 8");
}

double relu_moment(const BivariateMoment& m) {
  const double lam = m.lambda;
  // At |lambda| = 1 the square root is exactly zero.
  const double root = std::sqrt(std::max(0.0, 1.0 - lam * lam));
  return (lam * (std::numbers::pi - std::acos(lam)) + root) / (2.0 * std::numbers::pi) * m.c1 * m.c2;
}

double relu_dot_moment(const BivariateMoment& m) {
  return (std::numbers::pi - std::acos(m.lambda)) / (2.0 * std::numbers::pi);
}

SigmaStack::SigmaStack(NetworkShape shape, std::vector<Matrix> sigma, std::vector<Matrix> sigma_dot)
    : shape_(std::move(shape)), sigma_(std::move(sigma)), sigma_dot_(std::move(sigma_dot)) {
  if (sigma_.size() != shape_.depth || sigma_dot_.size() != shape_.depth)
    throw ConfigError("SigmaStack: layer count does not match depth");
}

const Matrix& SigmaStack::sigma(std::size_t layer) const {
  if (layer < 1 || layer > sigma_.size()) throw ConfigError("SigmaStack::sigma: layer out of range");
  return sigma_[layer - 1];
}

const Matrix& SigmaStack::sigma_dot(std::size_t layer) const {
  if (layer < 2 || layer > sigma_dot_.size()) throw ConfigError("SigmaStack::sigma_dot: layer out of range");
  return sigma_dot_[layer - 1];
}

LayerKernelStack::LayerKernelStack(std::vector<Matrix> theta) : theta_(std::move(theta)) {
  for (const auto& t : theta_) {
    if (t.rows() != rows() || t.cols() != cols())
      throw ConfigError("LayerKernelStack: layers must share one shape");
  }
}

const Matrix& LayerKernelStack::operator[](std::size_t layer) const {
  if (layer < 1 || layer > theta_.size()) throw ConfigError("LayerKernelStack: layer out of range");
  return theta_[layer - 1];
}

Matrix LayerKernelStack::sum() const {
  Matrix out = Matrix::Zero(rows(), cols());
  for (const auto& t : theta_) out += t;
  return out;
}

LayerKernelStack LayerKernelStack::select(const std::vector<std::size_t>& rows,
                                          const std::vector<std::size_t>& cols) const {
  std::vector<Matrix> out;
  out.reserve(theta_.size());
  for (const auto& t : theta_) {
    Matrix m(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) m(i, j) = t(rows[i], cols[j]);
    out.push_back(std::move(m));
  }
  return LayerKernelStack(std::move(out));
}

LayerWeights::LayerWeights(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw ConfigError("LayerWeights: non-finite weight");
}

Vector LayerWeights::as_vector() const {
  return Eigen::Map<const Vector>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

bool LayerWeights::has_negative() const noexcept {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return v < 0.0; });
}

double LayerWeights::max() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

namespace {

void check_positive_diagonal(const Vector& diag, std::size_t layer) {
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0))
      throw ZeroNormInput("zero self-covariance for sample " + std::to_string(i) + " at layer " +
                          std::to_string(layer));
  }
}

// Maps (Sigma(x,x), Sigma(x',x'), Sigma(x,x')) to the next layer's (Sigma, Sigma-dot).
class LayerMap {
 public:
  explicit LayerMap(const NetworkShape& shape) : relu_(shape.activation.is_relu()) {
    if (!relu_) integrator_.emplace(shape.activation, shape.quadrature_order);
  }

  MomentPair operator()(double self1, double self2, double cross) const {
    const double scale = std::sqrt(self1 * self2);
    BivariateMoment m{std::sqrt(self1), std::sqrt(self2), std::clamp(cross / scale, -1.0, 1.0)};
    if (!relu_) return (*integrator_)(m);
    // c1 c2 is taken from the product form so that self-pairs give lambda = 1 exactly.
    const double root = std::sqrt(std::max(0.0, 1.0 - m.lambda * m.lambda));
    const double angle = std::numbers::pi - std::acos(m.lambda);
    return {(m.lambda * angle + root) / (2.0 * std::numbers::pi) * scale,
            angle / (2.0 * std::numbers::pi)};
  }

  double self(double s) const { return (*this)(s, s, s).value; }

 private:
  bool relu_;
  std::optional<detail::MomentIntegrator> integrator_;
};

SigmaStack recurse(const Matrix& x1, const Matrix& x2, const NetworkShape& shape, bool same) {
  shape.validate();
  if (static_cast<std::size_t>(x1.cols()) != shape.input_dim ||
      static_cast<std::size_t>(x2.cols()) != shape.input_dim)
    throw ConfigError("sigma_recursion: sample dimension does not match input_dim");

  const double first_scale = shape.input_variance / static_cast<double>(shape.input_dim);
  std::vector<Matrix> sigma;
  std::vector<Matrix> sigma_dot;
  sigma.reserve(shape.depth);
  sigma_dot.reserve(shape.depth);

  Matrix cross = first_scale * (x1 * x2.transpose());
  if (same) cross = 0.5 * (cross + cross.transpose()).eval();
  Vector diag1 = first_scale * x1.rowwise().squaredNorm();
  Vector diag2 = first_scale * x2.rowwise().squaredNorm();
  if (same) diag1 = diag2 = cross.diagonal();
  sigma.push_back(cross);
  sigma_dot.emplace_back();

  const LayerMap map(shape);
  const Eigen::Index n1 = x1.rows();
  const Eigen::Index n2 = x2.rows();
  for (std::size_t layer = 2; layer <= shape.depth; ++layer) {
    check_positive_diagonal(diag1, layer);
    check_positive_diagonal(diag2, layer);
    const Matrix& prev = sigma.back();
    Matrix next(n1, n2);
    Matrix next_dot(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i) {
      const Eigen::Index j0 = same ? i : 0;
      for (Eigen::Index j = j0; j < n2; ++j) {
        const MomentPair mp = map(diag1(i), diag2(j), prev(i, j));
        next(i, j) = mp.value;
        next_dot(i, j) = mp.derivative;
        if (same) {
          next(j, i) = mp.value;
          next_dot(j, i) = mp.derivative;
        }
      }
    }
    if (same) {
      diag1 = diag2 = next.diagonal();
    } else {
      for (Eigen::Index i = 0; i < n1; ++i) diag1(i) = map.self(diag1(i));
      for (Eigen::Index j = 0; j < n2; ++j) diag2(j) = map.self(diag2(j));
    }
    sigma.push_back(std::move(next));
    sigma_dot.push_back(std::move(next_dot));
  }
  return SigmaStack(shape, std::move(sigma), std::move(sigma_dot));
}

}  // namespace

SigmaStack sigma_recursion(const Matrix& x1, const Matrix& x2, const NetworkShape& shape) {
  return recurse(x1, x2, shape, false);
}

SigmaStack sigma_recursion(const Matrix& x, const NetworkShape& shape) {
  return recurse(x, x, shape, true);
}

Matrix wntk_recursion(const SigmaStack& s, const LayerWeights& mu) {
  if (mu.size() != s.depth()) throw ConfigError("wntk_recursion: weight count does not match depth");
  Matrix acc = mu[0] * s.sigma(1);
  for (std::size_t l = 2; l <= s.depth(); ++l)
    acc = (acc.cwiseProduct(s.sigma_dot(l)) + mu[l - 1] * s.sigma(l)).eval();
  return acc;
}

Matrix ntk_from_stack(const SigmaStack& s) {
  Matrix acc = s.sigma(1);
  for (std::size_t l = 2; l <= s.depth(); ++l)
    acc = (acc.cwiseProduct(s.sigma_dot(l)) + s.sigma(l)).eval();
  return acc;
}

LayerKernelStack layer_kernels_from_stack(const SigmaStack& s) {
  const std::size_t depth = s.depth();
  std::vector<Matrix> theta(depth);
  Matrix tail = Matrix::Ones(s.sigma(1).rows(), s.sigma(1).cols());
  for (std::size_t l = depth; l >= 1; --l) {
    theta[l - 1] = s.sigma(l).cwiseProduct(tail);
    if (l >= 2) tail = tail.cwiseProduct(s.sigma_dot(l)).eval();
  }
  return LayerKernelStack(std::move(theta));
}

Matrix wntk_weighted_sum(const LayerKernelStack& k, const LayerWeights& w) {
  if (w.size() != k.depth()) throw ConfigError("wntk_weighted_sum: weight count does not match depth");
  Matrix out = Matrix::Zero(k.rows(), k.cols());
  for (std::size_t l = 1; l <= k.depth(); ++l) out += w[l - 1] * k[l];
  return out;
}

}  // namespace wntk
