#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "wntk/errors.hpp"
#include "wntk/kernel_io.hpp"
#include "wntk/mlp.hpp"

using namespace wntk;

namespace {

Matrix random_inputs(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

Mlp tanh_net(Parameterization p, std::uint64_t seed) {
  InitOptions o;
  o.parameterization = p;
  o.activation = ActivationKind::tanh();
  o.output_scale = 0.7;
  return init_mlp({4, 12, 9, 1}, o, seed);
}

double& param(Mlp& m, const JacobianMatrix& j, Eigen::Index col) {
  for (const auto& s : j.layer_spans) {
    if (col >= s.begin && col < s.end) {
      Matrix& w = m.weights[s.layer - 1];
      const Eigen::Index k = col - s.begin;
      return w(k / w.cols(), k % w.cols());
    }
  }
  throw std::out_of_range("column");
}

}  // namespace

TEST(Mlp, InitIsDeterministicAndShaped) {
  const Mlp a = init_mlp({3, 5, 1}, {}, 42);
  const Mlp b = init_mlp({3, 5, 1}, {}, 42);
  const Mlp c = init_mlp({3, 5, 1}, {}, 43);
  ASSERT_EQ(a.weights.size(), 2u);
  EXPECT_EQ(a.weights[0].rows(), 5);
  EXPECT_EQ(a.weights[0].cols(), 3);
  EXPECT_TRUE(a.weights[0] == b.weights[0]);
  EXPECT_FALSE(a.weights[0] == c.weights[0]);
  EXPECT_EQ(a.parameter_count(), 20u);
}

TEST(Mlp, InitVarianceFollowsParameterization) {
  InitOptions o;
  o.parameterization = Parameterization::standard;
  o.sigma_w = 2.0;
  const Mlp s = init_mlp({400, 400, 1}, o, 1);
  const double var = s.weights[0].squaredNorm() / static_cast<double>(s.weights[0].size());
  EXPECT_NEAR(var, 4.0 / 400.0, 0.05 * 4.0 / 400.0);
  const Mlp n = init_mlp({400, 400, 1}, {}, 1);
  EXPECT_NEAR(n.weights[0].squaredNorm() / static_cast<double>(n.weights[0].size()), 1.0, 0.05);
}

TEST(Mlp, SingleLinearLayerForward) {
  InitOptions o;
  o.activation = ActivationKind::identity();
  o.output_scale = 3.0;
  const Mlp m = init_mlp({4, 1}, o, 5);
  const Matrix x = random_inputs(3, 4, 6);
  const Vector expect = 3.0 * (x * m.weights[0].transpose()).col(0) / 2.0;
  EXPECT_LT((forward(m, x) - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mlp, JacobianMatchesCentralDifferences) {
  for (auto p : {Parameterization::ntk, Parameterization::standard}) {
    Mlp m = tanh_net(p, 7);
    const Matrix x = random_inputs(5, 4, 8);
    const JacobianMatrix j = jacobian(m, x);
    ASSERT_EQ(j.values.cols(), static_cast<Eigen::Index>(m.parameter_count()));
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<Eigen::Index> pick(0, j.values.cols() - 1);
    for (int t = 0; t < 100; ++t) {
      const Eigen::Index col = pick(rng);
      double& w = param(m, j, col);
      const double orig = w;
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      w = orig + h;
      const Vector up = forward(m, x);
      w = orig - h;
      const Vector down = forward(m, x);
      w = orig;
      const Vector fd = (up - down) / (2.0 * h);
      const double err = (fd - j.values.col(col)).norm() / std::max(1e-8, fd.norm());
      EXPECT_LT(err, 1e-6) << "column " << col;
    }
  }
}

TEST(Mlp, FactoredKernelsMatchDenseJacobian) {
  const Mlp m = tanh_net(Parameterization::ntk, 10);
  const Matrix x1 = random_inputs(6, 4, 11);
  const Matrix x2 = random_inputs(4, 4, 12);
  const LayerKernelStack dense = empirical_layer_kernels(jacobian(m, x1), jacobian(m, x2));
  const LayerKernelStack factored = empirical_layer_kernels(m, x1, x2);
  for (std::size_t l = 1; l <= 3; ++l) EXPECT_LT((dense[l] - factored[l]).cwiseAbs().maxCoeff(), 1e-12);
  const JacobianMatrix j1 = jacobian(m, x1), j2 = jacobian(m, x2);
  EXPECT_LT((dense.sum() - j1.values * j2.values.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, EmpiricalWntkWeightsJacobianColumns) {
  const Mlp m = tanh_net(Parameterization::standard, 13);
  const Matrix x = random_inputs(5, 4, 14);
  const JacobianMatrix j = jacobian(m, x);
  const LayerWeights w({0.5, 2.0, 1.5});
  Vector a(j.values.cols());
  for (const auto& s : j.layer_spans) a.segment(s.begin, s.end - s.begin).setConstant(w[s.layer - 1]);
  const Matrix expect = j.values * a.asDiagonal() * j.values.transpose();
  EXPECT_LT((empirical_wntk(j, j, w) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, AdjustedStepIsScaledGradientStep) {
  const Mlp m = tanh_net(Parameterization::ntk, 15);
  const Matrix x = random_inputs(6, 4, 16);
  const Vector y = random_inputs(6, 1, 17).col(0);
  PerParameterRates rates{LayerWeights({0.5, 1.0, 3.0}), 0.1};
  const Mlp next = adjusted_gd_step(m, x, y, rates);
  const JacobianMatrix j = jacobian(m, x);
  const Vector grad = j.values.transpose() * (forward(m, x) - y);
  for (const auto& s : j.layer_spans) {
    const Matrix& w0 = m.weights[s.layer - 1];
    const Matrix& w1 = next.weights[s.layer - 1];
    for (Eigen::Index k = 0; k < s.end - s.begin; ++k) {
      const double expect = w0(k / w0.cols(), k % w0.cols()) - 0.1 * rates.layer_rates[s.layer - 1] * grad(s.begin + k);
      EXPECT_NEAR(w1(k / w1.cols(), k % w1.cols()), expect, 1e-12);
    }
  }
}

TEST(Mlp, RateProductInvarianceIsBitwise) {
  const Mlp m = tanh_net(Parameterization::ntk, 18);
  const Matrix x = random_inputs(6, 4, 19);
  const Vector y = random_inputs(6, 1, 20).col(0);
  const TrainResult a = train_adjusted_gd(m, x, y, {LayerWeights({1.0, 0.5, 2.0}), 0.05}, 20);
  const TrainResult b = train_adjusted_gd(m, x, y, {LayerWeights({4.0, 2.0, 8.0}), 0.05 / 4.0}, 20);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_TRUE(a.network.weights[l] == b.network.weights[l]);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Mlp, TrainingReducesLossAndStopsEarly) {
  const Mlp m = tanh_net(Parameterization::ntk, 21);
  const Matrix x = random_inputs(6, 4, 22);
  const Vector y = random_inputs(6, 1, 23).col(0);
  const TrainResult r = train_adjusted_gd(m, x, y, {LayerWeights::ones(3), 0.2}, 300);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  const TrainResult s = train_adjusted_gd(m, x, y, {LayerWeights::ones(3), 0.2}, 300, r.loss_trace[50]);
  EXPECT_LE(s.steps_taken, 51u);
  EXPECT_THROW(train_adjusted_gd(m, x, y, {LayerWeights::ones(3), 0.2}, 0), ConfigError);
}

TEST(Mlp, DivergenceIsReported) {
  const Mlp m = tanh_net(Parameterization::standard, 24);
  const Matrix x = 1e3 * random_inputs(6, 4, 25);
  const Vector y = Vector::Constant(6, 1e3);
  EXPECT_THROW(train_adjusted_gd(m, x, y, {LayerWeights::ones(3), 1e6}, 200), NumericalDivergence);
}

TEST(Mlp, CheckpointRoundTrip) {
  const Mlp m = tanh_net(Parameterization::standard, 26);
  std::stringstream ss;
  io::write_mlp(ss, m);
  const Mlp r = io::read_mlp(ss);
  EXPECT_EQ(r.widths, m.widths);
  EXPECT_EQ(r.parameterization, m.parameterization);
  EXPECT_EQ(r.activation.name(), "tanh");
  EXPECT_EQ(r.output_scale, m.output_scale);
  for (std::size_t l = 0; l < m.depth(); ++l) EXPECT_TRUE(r.weights[l] == m.weights[l]);
  const Matrix x = random_inputs(3, 4, 27);
  EXPECT_TRUE(forward(r, x) == forward(m, x));
}

TEST(Mlp, PretrainKeepsBestNetwork) {
  InitOptions o;
  const Mlp m = init_mlp({2, 32, 1}, o, 28);
  Matrix x(40, 2);
  Vector y(40);
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g;
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = g(rng);
    x(i, 1) = g(rng);
    y(i) = x(i, 0) > 0.0 ? 1.0 : -1.0;
  }
  std::vector<std::size_t> train, val;
  for (std::size_t i = 0; i < 40; ++i) (i % 4 == 0 ? val : train).push_back(i);
  const PretrainResult r = pretrain_to_threshold(m, x, y, train, val, {0.05, 0.8, 300});
  EXPECT_TRUE(r.threshold_reached);
  EXPECT_GE(r.validation_accuracy, 0.8);
  EXPECT_THROW(pretrain_to_threshold(m, x, y, train, val, {0.05, 1.2, 10}), ConfigError);
}
