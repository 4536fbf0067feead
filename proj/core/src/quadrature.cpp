#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "quadrature_rules.hpp"
#include "wntk/errors.hpp"

namespace wntk::detail {
namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix, weights
// are mu0 times the squared first components of its eigenvectors.
GaussRule golub_welsch(const Vector& off_diagonal, double mu0) {
  const Eigen::Index n = off_diagonal.size() + 1;
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = off_diagonal(k);
    jacobi(k + 1, k) = off_diagonal(k);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Radial cutoff for the polar panels; the Gaussian tail beyond it is below 1e-20.
constexpr double kRadialCutoff = 10.0;

}  // namespace

GaussRule gauss_hermite(int order) {
  Vector off(order - 1);
  for (int k = 1; k < order; ++k) off(k - 1) = std::sqrt(0.5 * k);
  return golub_welsch(off, std::sqrt(std::numbers::pi));
}

GaussRule gauss_legendre(int order) {
  Vector off(order - 1);
  for (int k = 1; k < order; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(off, 2.0);
}

MomentIntegrator::MomentIntegrator(ActivationKind act, int order) : act_(std::move(act)) {
  if (order < 8) throw ConfigError("quadrature order must be >= 8");
  if (act_.is_relu()) {
    legendre_ = gauss_legendre(order);
  } else {
    hermite_ = gauss_hermite(order);
  }
}

MomentPair MomentIntegrator::operator()(const BivariateMoment& m) const {
  if (!(std::abs(m.lambda) <= 1.0)) throw ConfigError("quadrature_moment: |lambda| > 1");
  if (m.c1 < 0.0 || m.c2 < 0.0) throw ConfigError("quadrature_moment: negative scale");
  return act_.is_relu() ? relu_panels(m) : smooth(m);
}

// u = c1 z1, v = c2 (lambda z1 + s z2) with z ~ N(0, I).
MomentPair MomentIntegrator::smooth(const BivariateMoment& m) const {
  const double s = std::sqrt(std::max(0.0, 1.0 - m.lambda * m.lambda));
  const std::size_t n = hermite_.nodes.size();
  MomentPair out;
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = std::numbers::sqrt2 * hermite_.nodes[i];
    const double u = m.c1 * z1;
    const double su = act_(u);
    const double du = act_.derivative(u);
    double acc_value = 0.0;
    double acc_deriv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z2 = std::numbers::sqrt2 * hermite_.nodes[j];
      const double v = m.c2 * (m.lambda * z1 + s * z2);
      acc_value += hermite_.weights[j] * act_(v);
      acc_deriv += hermite_.weights[j] * act_.derivative(v);
    }
    out.value += hermite_.weights[i] * su * acc_value;
    out.derivative += hermite_.weights[i] * du * acc_deriv;
  }
  out.value /= std::numbers::pi;
  out.derivative /= std::numbers::pi;
  return out;
}

// Polar coordinates z = r (cos phi, sin phi). u vanishes at phi = +-pi/2 and v at
// phi = beta +- pi/2 with beta = arccos(lambda); between consecutive kink angles the
// integrand is smooth, so each wedge gets its own tensor Gauss-Legendre panel.
MomentPair MomentIntegrator::relu_panels(const BivariateMoment& m) const {
  const double beta = std::acos(std::clamp(m.lambda, -1.0, 1.0));
  auto wrap = [](double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
  };
  std::vector<double> cuts = {wrap(0.5 * std::numbers::pi), wrap(1.5 * std::numbers::pi),
                              wrap(beta + 0.5 * std::numbers::pi),
                              wrap(beta - 0.5 * std::numbers::pi)};
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(cuts.front() + kTwoPi);

  const std::size_t n = legendre_.nodes.size();
  const double half_r = 0.5 * kRadialCutoff;
  // The ReLU integrand factorises as r^2 g(phi), so the radial integrals are shared.
  double radial_value = 0.0;
  double radial_mass = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double r = half_r * (1.0 + legendre_.nodes[b]);
    const double density = r * std::exp(-0.5 * r * r);
    radial_value += legendre_.weights[b] * density * r * r;
    radial_mass += legendre_.weights[b] * density;
  }
  MomentPair out;
  for (std::size_t w = 0; w + 1 < cuts.size(); ++w) {
    const double lo = cuts[w];
    const double hi = cuts[w + 1];
    if (hi - lo <= 0.0) continue;
    const double half_phi = 0.5 * (hi - lo);
    const double mid_phi = 0.5 * (hi + lo);
    for (std::size_t a = 0; a < n; ++a) {
      const double phi = mid_phi + half_phi * legendre_.nodes[a];
      const double cu = std::cos(phi);
      const double cv = std::cos(phi - beta);
      // Active indicator for each unit; constant inside the wedge.
      const double gate = (cu > 0.0 && cv > 0.0) ? 1.0 : 0.0;
      if (gate == 0.0) continue;
      const double wphi = legendre_.weights[a] * half_phi;
      out.value += wphi * half_r * radial_value * cu * cv;
      out.derivative += wphi * half_r * radial_mass;
    }
  }
  out.value *= m.c1 * m.c2 / kTwoPi;
  out.derivative /= kTwoPi;
  return out;
}

}  // namespace wntk::detail

namespace wntk {

MomentPair quadrature_moment(const BivariateMoment& m, const ActivationKind& act, int order) {
  return detail::MomentIntegrator(act, order)(m);
}

}  // namespace wntk
