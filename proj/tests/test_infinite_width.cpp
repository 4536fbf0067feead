#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wntk/analytic_kernels.hpp"
#include "wntk/data.hpp"
#include "wntk/mc_oracle.hpp"

using namespace wntk;

TEST(InfiniteWidth, FirstLayerCovarianceIsExact) {
  const Matrix x = sphere_regression(5, 6, 1).x;
  const MonteCarloKernels mc = mc_kernel_oracle(x, NetworkShape{6, 2}, 64, 1, 3);
  EXPECT_LT((mc.sigma_mean[0] - x * x.transpose() / 6.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(InfiniteWidth, WideNetworkMatchesAnalyticNtk) {
  const Matrix x = sphere_regression(6, 8, 2).x;
  const NetworkShape shape{8, 2};
  const Matrix analytic = ntk_from_stack(sigma_recursion(x, shape));
  const MonteCarloKernels mc = mc_kernel_oracle(x, shape, 4096, 2, 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (std::abs(analytic(i, j)) > 0.05)
        EXPECT_LT(std::abs(mc.ntk_mean(i, j) - analytic(i, j)) / std::abs(analytic(i, j)), 0.05) << i << ',' << j;
}

TEST(InfiniteWidth, LayerKernelsConvergeForSmoothActivation) {
  const Matrix x = sphere_regression(5, 4, 3).x;
  NetworkShape shape{4, 3};
  shape.activation = ActivationKind::tanh();
  const LayerKernelStack analytic = layer_kernels_from_stack(sigma_recursion(x, shape));
  const MonteCarloKernels mc = mc_kernel_oracle(x, shape, 2048, 3, 5);
  for (std::size_t l = 1; l <= 3; ++l) {
    const double scale = analytic[l].cwiseAbs().maxCoeff();
    EXPECT_LT((mc.layer_mean[l] - analytic[l]).cwiseAbs().maxCoeff(), 0.1 * scale) << "layer " << l;
  }
}

TEST(InfiniteWidth, OracleIsDeterministic) {
  const Matrix x = sphere_regression(4, 3, 4).x;
  const MonteCarloKernels a = mc_kernel_oracle(x, NetworkShape{3, 2}, 64, 2, 9);
  const MonteCarloKernels b = mc_kernel_oracle(x, NetworkShape{3, 2}, 64, 2, 9);
  EXPECT_TRUE(a.ntk_mean == b.ntk_mean);
}
