#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wntk/data.hpp"
#include "wntk/dynamics.hpp"
#include "wntk/errors.hpp"

using namespace wntk;

namespace {

SweepConfig small_stability() {
  SweepConfig c = default_stability_config();
  c.widths = {32, 64};
  c.seeds = 2;
  c.steps = 20;
  c.rates = {1.0, 0.5, 2.0};
  c.eta0 = 1.0;
  return c;
}

}  // namespace

TEST(EtaCritical, KnownSpectra) {
  EXPECT_DOUBLE_EQ(estimate_eta_critical(Matrix::Identity(5, 5)), 1.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  EXPECT_NEAR(estimate_eta_critical(d), 0.5, 1e-15);
}

TEST(EtaCritical, InvariantUnderOrthogonalConjugation) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix b(6, 8), r(6, 6);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = g(rng);
  const Matrix a = b * b.transpose();
  const Matrix q = Eigen::HouseholderQR<Matrix>(r).householderQ();
  Matrix c = q * a * q.transpose();
  c = 0.5 * (c + c.transpose()).eval();
  EXPECT_NEAR(estimate_eta_critical(a), estimate_eta_critical(c), 1e-12);
}

TEST(EtaCritical, Errors) {
  Matrix a = Matrix::Identity(3, 3);
  a(2, 2) = 0.0;
  EXPECT_THROW(estimate_eta_critical(a), NonPositiveDefinite);
  Matrix s = Matrix::Identity(3, 3);
  s(0, 1) = 0.5;
  EXPECT_THROW(estimate_eta_critical(s), ConfigError);
}

TEST(Linearized, ZeroStepsIsInitialNetwork) {
  const RegressionData d = sphere_regression(10, 4, 2);
  const Mlp m = init_mlp(equal_widths(4, 32, 2), {}, 3);
  const LinearizedTrace t = linearized_iterate(m, d.x.topRows(7), d.y.head(7), {LayerWeights::ones(2), 0.1}, 0,
                                               d.x.bottomRows(3));
  ASSERT_EQ(t.train.size(), 1u);
  EXPECT_TRUE(t.train[0] == forward(m, d.x.topRows(7)));
  EXPECT_TRUE(t.probe[0] == forward(m, d.x.bottomRows(3)));
}

TEST(Linearized, MatchesParameterSpaceIteration) {
  const RegressionData d = sphere_regression(9, 3, 4);
  InitOptions o;
  o.activation = ActivationKind::tanh();
  const Mlp m = init_mlp(equal_widths(3, 16, 3), o, 5);
  const Matrix x = d.x.topRows(6), p = d.x.bottomRows(3);
  const Vector y = d.y.head(6);
  const PerParameterRates rates{LayerWeights({0.5, 1.0, 2.0}), 0.05};
  const LinearizedTrace t = linearized_iterate(m, x, y, rates, 25, p);

  const JacobianMatrix jx = jacobian(m, x), jp = jacobian(m, p);
  Vector a(jx.values.cols());
  for (const auto& s : jx.layer_spans) a.segment(s.begin, s.end - s.begin).setConstant(rates.layer_rates[s.layer - 1]);
  Vector dtheta = Vector::Zero(a.size());
  const Vector f0x = forward(m, x), f0p = forward(m, p);
  for (int k = 0; k < 25; ++k) {
    const Vector r = f0x + jx.values * dtheta - y;
    dtheta -= 0.05 * a.cwiseProduct(jx.values.transpose() * r);
  }
  EXPECT_LT((t.train.back() - (f0x + jx.values * dtheta)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((t.probe.back() - (f0p + jp.values * dtheta)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linearized, ConvergesToTargets) {
  const RegressionData d = sphere_regression(8, 5, 6);
  const Mlp m = init_mlp(equal_widths(5, 64, 2), {}, 7);
  const Matrix a = empirical_layer_kernels(m, d.x, d.x).sum();
  const double eta = estimate_eta_critical(a);
  const LinearizedTrace t = linearized_iterate(m, d.x, d.y, {LayerWeights::ones(2), eta}, 20000, Matrix(0, 5));
  EXPECT_FALSE(t.diverging);
  EXPECT_LT((t.train.back() - d.y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Linearized, ReportsDivergentRate) {
  const RegressionData d = sphere_regression(8, 5, 8);
  const Mlp m = init_mlp(equal_widths(5, 32, 2), {}, 9);
  const LinearizedTrace t = linearized_iterate(m, d.x, d.y, {LayerWeights::ones(2), 1e3}, 3, Matrix(0, 5));
  EXPECT_TRUE(t.diverging);
  EXPECT_EQ(t.train.size(), 4u);
}

TEST(SlopeFit, RecoversPowerLaw) {
  const std::vector<std::size_t> w{64, 128, 256, 1024};
  std::vector<double> v;
  for (std::size_t x : w) v.push_back(3.0 / std::sqrt(static_cast<double>(x)));
  const SlopeFit f = fit_loglog(w, v);
  EXPECT_TRUE(f.valid);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_FALSE(fit_loglog(w, {0.0, 0.0, 0.0, 0.0}).valid);
}

TEST(Stability, ZeroStepsGiveZeroDrift) {
  SweepConfig c = small_stability();
  c.steps = 0;
  const StabilityReport r = verify_stability(c);
  for (const auto& cell : r.cells) {
    EXPECT_FALSE(cell.diverged);
    EXPECT_EQ(cell.terminal_drift, 0.0);
  }
  EXPECT_FALSE(r.fit.valid);
}

TEST(Stability, RateProductInvarianceIsBitwise) {
  const StabilityReport a = verify_stability(small_stability());
  SweepConfig c = small_stability();
  for (double& v : c.rates) v *= 2.0;
  c.eta0 /= 2.0;
  const StabilityReport b = verify_stability(c);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].drift, b.cells[i].drift);
  EXPECT_EQ(a.median_drift, b.median_drift);
  for (const auto& cell : a.cells)
    for (double v : cell.drift) EXPECT_GE(v, 0.0);
}

TEST(Stability, DeterministicAndValidated) {
  const StabilityReport a = verify_stability(small_stability());
  const StabilityReport b = verify_stability(small_stability());
  EXPECT_EQ(a.median_drift, b.median_drift);
  SweepConfig bad = small_stability();
  bad.widths = {64, 32};
  EXPECT_THROW(verify_stability(bad), ConfigError);
  bad = small_stability();
  bad.eta0 = 1e4;
  EXPECT_THROW(verify_stability(bad), ConfigError);
}

TEST(Lazy, InitialGapIsZero) {
  SweepConfig c = default_lazy_config();
  c.widths = {32, 128};
  c.seeds = 2;
  c.steps = 30;
  const LazyReport r = verify_lazy(c);
  for (const auto& cell : r.cells) {
    ASSERT_FALSE(cell.train_gap.empty());
    EXPECT_EQ(cell.train_gap.front(), 0.0);
    EXPECT_EQ(cell.probe_gap.front(), 0.0);
    EXPECT_GE(cell.terminal_gap, 0.0);
  }
}

TEST(Lazy, LinearSingleLayerIsItsLinearisation) {
  SweepConfig c = default_lazy_config();
  c.widths = {16, 64};
  c.seeds = 2;
  c.steps = 40;
  c.depth = 1;
  c.activation = ActivationKind::identity();
  c.rate_rule = RateRule::absolute;
  c.eta0 = 0.5;
  const LazyReport r = verify_lazy(c);
  for (const auto& cell : r.cells)
    for (std::size_t k = 0; k < cell.train_gap.size(); ++k) {
      EXPECT_LT(cell.train_gap[k], 1e-12);
      EXPECT_LT(cell.probe_gap[k], 1e-12);
    }
}

TEST(Equivalence, UnitRatesReproduceNtkCaseBitwise) {
  SweepConfig c = default_equivalence_config();
  c.widths = {2048};
  c.seeds = 1;
  c.depth = 3;
  c.steps = 15;
  const EquivalenceReport ntk = verify_equivalence(c, {1e-4, 0.0});
  c.rates = {1.0, 1.0, 1.0};
  const EquivalenceReport w = verify_equivalence(c, {1e-4, 0.0});
  ASSERT_EQ(ntk.cells.size(), 1u);
  EXPECT_EQ(ntk.cells[0].ridge_gaps, w.cells[0].ridge_gaps);
  EXPECT_EQ(ntk.cells[0].steps_taken, w.cells[0].steps_taken);
}

TEST(Equivalence, GapShrinksWithWidthInLazyScaling) {
  SweepConfig c = default_equivalence_config();
  c.widths = {64, 2048};
  c.seeds = 3;
  c.kappa = 1.0;
  c.eta0 = 0.9;
  const EquivalenceReport r = verify_equivalence(c);
  for (const auto& cell : r.cells) EXPECT_TRUE(cell.converged);
  EXPECT_LT(r.median_gap[1], r.median_gap[0]);
}

TEST(Equivalence, HalvingKappaShrinksCorrection) {
  SweepConfig c = default_equivalence_config();
  c.widths = {4096};
  c.seeds = 1;
  c.steps = 1;
  c.kappa = 2e-2;
  const double big = verify_equivalence(c, {1e-4}).cells[0].correction_size;
  c.kappa = 1e-2;
  const double small = verify_equivalence(c, {1e-4}).cells[0].correction_size;
  EXPECT_GT(big, 0.0);
  EXPECT_LT(small, big);
}

TEST(Lipschitz, ZeroPerturbationAndLinearNetwork) {
  const Matrix x = sphere_regression(5, 4, 10).x;
  InitOptions o;
  o.parameterization = Parameterization::standard;
  const Mlp m = init_mlp(equal_widths(4, 32, 3), o, 11);
  EXPECT_EQ(jacobian_change_ratio(m, m, x), 0.0);

  o.activation = ActivationKind::identity();
  const Mlp lin = init_mlp({4, 1}, o, 12);
  Mlp moved = lin;
  moved.weights[0].array() += 0.3;
  EXPECT_EQ(jacobian_change_ratio(lin, moved, x), 0.0);
}

TEST(Lipschitz, RatioBoundedAcrossWidths) {
  const LipschitzReport r = jacobian_lipschitz_probe(8, 3, {128, 512, 2048}, 1.0, 2);
  ASSERT_EQ(r.max_ratio.size(), 3u);
  for (double v : r.max_ratio) EXPECT_GT(v, 0.0);
  EXPECT_LT(r.spread, 3.0);
}
